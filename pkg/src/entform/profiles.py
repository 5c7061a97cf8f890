"""1D profile families and the scale-differentiation identity they satisfy.

An admissible pair is a pair (rho, sigma) of real profiles with

    -t d/dt |rho_hat(t tau)|^2 = |sigma_hat(t tau)|^2

under the transform convention  f_hat(xi) = integral f(x) e^(-2 pi i x xi) dx.
Two constructions are provided:

* Gaussian pairs: rho = g_alpha, the L^1-normalized Gaussian of width alpha,
  and sigma = h_alpha = alpha * g_alpha'.  The identity holds in closed form:
  |g_alpha_hat(s)|^2 = exp(-2 pi^2 alpha^2 s^2) and |h_alpha_hat(s)|^2 =
  4 pi^2 alpha^2 s^2 exp(-2 pi^2 alpha^2 s^2).

* The square-function pair: sigma_hat is a fixed smooth bump supported on the
  annulus 1 <= |tau| <= 2, vanishing to infinite order at both edges, and
  rho_hat(xi) = (integral_xi^inf |sigma_hat|^2 dtau/tau)^(1/2).  Differentiating
  the tail integral gives the identity; evenness of |sigma_hat|^2 against the
  odd measure dtau/tau makes rho_hat even, constant on |xi| <= 1 and zero for
  |xi| >= 2.

Also here: the slow superposition Phi(x) = integral_1^inf a^(-21) e^(-(x/a)^2) da
used to dominate rapidly decaying profiles by Gaussians, and quadrature checks
for the dilation telescoping identity in one dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.special import erf

from .fields import SampledField, grid_nodes, vartheta, vartheta_power_antiderivative

__all__ = [
    "Profile",
    "AdmissiblePair",
    "QuadratureError",
    "vartheta_profile",
    "vartheta_sq_profile",
    "gaussian_profile",
    "gaussian_deriv_profile",
    "gaussian_pair",
    "make_square_function_pair",
    "shifted_packet_profile",
    "phi_superposition",
    "PHI_AT_ZERO",
    "PHI_TAIL_CONSTANT",
    "fourier_identity_residual",
    "transform_convention_residual",
    "dilation_telescoping_residual",
]


class QuadratureError(RuntimeError):
    """Raised when an adaptive quadrature fails to converge."""


@dataclass(frozen=True)
class Profile:
    """A real 1D profile with analytic evaluation.

    `antideriv` (the primitive vanishing at -infinity), when present, lets
    dilated copies be realized by exact cell integrals; profiles with an
    integrable kink (the vartheta powers) need this to avoid systematic
    quadrature bias at coarse resolution.
    """

    label: str
    func: Callable = field(compare=False)
    deriv: Callable | None = field(default=None, compare=False)
    antideriv: Callable | None = field(default=None, compare=False)

    def __call__(self, x):
        return self.func(x)

    def derivative(self, x):
        if self.deriv is None:
            raise ValueError(f"profile {self.label} has no derivative evaluator")
        return self.deriv(x)

    def dilated_weights(self, offsets: np.ndarray, t: float, h: float) -> np.ndarray:
        """Quadrature weights of [f]_t at node displacements: one weight per cell.

        With an antiderivative this is the exact integral of [f]_t over the
        cell of width h centered at each offset; otherwise the midpoint value
        times h.
        """
        d = np.asarray(offsets, dtype=np.float64)
        if self.antideriv is not None:
            a = self.antideriv((d - 0.5 * h) / t)
            b = self.antideriv((d + 0.5 * h) / t)
            return b - a
        return (h / t) * np.asarray(self.func(d / t), dtype=np.float64)

    def sample(self, L: float, n: int) -> SampledField:
        x = grid_nodes(L, n)
        return SampledField(1, L, n, np.asarray(self.func(x), dtype=np.float64), analytic=self.func)


def vartheta_profile(power: int = 4) -> Profile:
    """(1 + |x|)^(-power) with its closed-form primitive."""

    def f(x):
        return (1.0 + np.abs(x)) ** float(-power)

    def fp(x):
        x = np.asarray(x, dtype=np.float64)
        return -power * np.sign(x) * (1.0 + np.abs(x)) ** float(-power - 1)

    return Profile(
        label=f"vartheta^{power // 4}" if power % 4 == 0 else f"decay{power}",
        func=f,
        deriv=fp,
        antideriv=lambda x: vartheta_power_antiderivative(x, power),
    )


def vartheta_sq_profile() -> Profile:
    """Pointwise square of the quartic decay kernel: (1 + |x|)^(-8)."""
    return vartheta_profile(8)


def gaussian_profile(alpha: float) -> Profile:
    """g_alpha(x) = exp(-(x/alpha)^2) / (sqrt(pi) alpha); unit mass."""
    if alpha <= 0:
        raise ValueError(f"gaussian width must be positive, got {alpha}")
    c = 1.0 / (math.sqrt(math.pi) * alpha)

    def g(x):
        x = np.asarray(x, dtype=np.float64)
        return c * np.exp(-((x / alpha) ** 2))

    def gp(x):
        x = np.asarray(x, dtype=np.float64)
        return -2.0 * x / alpha**2 * g(x)

    return Profile(
        label=f"gauss({alpha:g})",
        func=g,
        deriv=gp,
        antideriv=lambda x: 0.5 * (1.0 + erf(np.asarray(x, dtype=np.float64) / alpha)),
    )


def gaussian_deriv_profile(alpha: float) -> Profile:
    """h_alpha = alpha * g_alpha'; odd, mean zero, primitive alpha * g_alpha."""
    g = gaussian_profile(alpha)

    def h(x):
        return alpha * g.deriv(x)

    def hp(x):
        x = np.asarray(x, dtype=np.float64)
        return (-2.0 / alpha + 4.0 * x**2 / alpha**3) * g.func(x)

    return Profile(
        label=f"gauss_deriv({alpha:g})",
        func=h,
        deriv=hp,
        antideriv=lambda x: alpha * g.func(x),
    )


def shifted_packet_profile(base: Profile, shift: float, exponent: int) -> Profile:
    """(1 + |shift|)^(-exponent) * base(x - shift), as an analytic profile."""
    w = (1.0 + abs(shift)) ** -exponent

    def f(x):
        return w * base.func(np.asarray(x) - shift)

    deriv = None
    if base.deriv is not None:
        deriv = lambda x: w * base.deriv(np.asarray(x) - shift)
    antideriv = None
    if base.antideriv is not None:
        antideriv = lambda x: w * base.antideriv(np.asarray(x) - shift)
    return Profile(
        label=f"{base.label}@{shift:g}^{exponent}",
        func=f,
        deriv=deriv,
        antideriv=antideriv,
    )


# -- admissible pairs ----------------------------------------------------------

@dataclass(frozen=True)
class AdmissiblePair:
    """Profiles (rho, sigma) satisfying the scale-differentiation identity."""

    rho: Profile
    sigma: Profile
    kind: str
    rho_hat_sq: Callable = field(compare=False)
    rho_hat_sq_deriv: Callable = field(compare=False)
    sigma_hat_sq: Callable = field(compare=False)


def gaussian_pair(alpha: float) -> AdmissiblePair:
    """The pair (g_alpha, h_alpha); the identity holds in closed form."""
    if alpha <= 0:
        raise ValueError(f"gaussian width must be positive, got {alpha}")
    a2 = alpha * alpha
    two_pi2 = 2.0 * math.pi**2

    def rho_hat_sq(s):
        s = np.asarray(s, dtype=np.float64)
        return np.exp(-two_pi2 * a2 * s * s)

    def rho_hat_sq_deriv(s):
        s = np.asarray(s, dtype=np.float64)
        return -2.0 * two_pi2 * a2 * s * np.exp(-two_pi2 * a2 * s * s)

    def sigma_hat_sq(s):
        # |alpha * 2 pi i s * g_alpha_hat(s)|^2
        s = np.asarray(s, dtype=np.float64)
        return (2.0 * math.pi * alpha * s) ** 2 * np.exp(-two_pi2 * a2 * s * s)

    return AdmissiblePair(
        rho=gaussian_profile(alpha),
        sigma=gaussian_deriv_profile(alpha),
        kind=f"gaussian({alpha:g})",
        rho_hat_sq=rho_hat_sq,
        rho_hat_sq_deriv=rho_hat_sq_deriv,
        sigma_hat_sq=sigma_hat_sq,
    )


def _annulus_bump(tau: np.ndarray) -> np.ndarray:
    """exp(-1/((|tau|-1)(2-|tau|))) on 1 < |tau| < 2, zero elsewhere."""
    a = np.abs(np.asarray(tau, dtype=np.float64))
    inside = (a > 1.0) & (a < 2.0)
    out = np.zeros_like(a)
    if np.any(inside):
        prod = (a[inside] - 1.0) * (2.0 - a[inside])
        out[inside] = np.exp(-1.0 / prod)
    return out


def _cosine_synthesis_table(
    xi: np.ndarray,
    amp: np.ndarray,
    x_max: float,
    dx: float,
) -> tuple[CubicSpline, CubicSpline, float]:
    """Tabulate f(x) = 2 int amp(xi) cos(2 pi xi x) dxi and its derivative.

    Trapezoid in xi (spectrally accurate for smooth compactly supported amp),
    cubic splines in x for fast vectorized evaluation; f is even so only
    x >= 0 is tabulated.
    """
    w = np.full(xi.size, xi[1] - xi[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    xs = np.arange(0.0, x_max + dx, dx)
    vals = np.empty_like(xs)
    dvals = np.empty_like(xs)
    chunk = 2048
    for i in range(0, xs.size, chunk):
        xc = xs[i : i + chunk]
        phase = 2.0 * np.pi * np.outer(xc, xi)
        vals[i : i + chunk] = 2.0 * (np.cos(phase) @ (amp * w))
        dvals[i : i + chunk] = -4.0 * np.pi * (np.sin(phase) @ (amp * w * xi))
    tail = float(np.max(np.abs(vals[xs >= 0.9 * x_max]))) if x_max > 0 else 0.0
    return CubicSpline(xs, vals), CubicSpline(xs, dvals), tail


def _even_spline_eval(spline: CubicSpline, x_max: float, parity: int):
    """Evaluate a half-line table as an even (parity=+1) or odd (-1) function."""

    def f(x):
        x = np.asarray(x, dtype=np.float64)
        a = np.abs(x)
        out = np.where(a <= x_max, spline(np.minimum(a, x_max)), 0.0)
        if parity < 0:
            out = out * np.sign(x)
        return out

    return f


_SQ_PAIR_CACHE: dict = {}


def make_square_function_pair(
    n_freq: int = 2048,
    n_tail: int = 1 << 17,
    x_max: float = 64.0,
    dx: float = 1.0 / 256.0,
) -> AdmissiblePair:
    """The pair (phi, psi) built from the annulus bump.

    psi_hat is the bump on 1 <= |tau| <= 2; phi_hat(xi) is the square root of
    the tail integral of psi_hat^2 against dtau/tau, which is even in xi,
    constant on |xi| <= 1 and zero for |xi| >= 2.  Spatial profiles are
    synthesized by cosine quadrature and tabulated on splines.
    """
    key = (n_freq, n_tail, x_max, dx)
    if key in _SQ_PAIR_CACHE:
        return _SQ_PAIR_CACHE[key]

    # Tail integral J(r) = int_max(r,1)^2 psi_hat(tau)^2 dtau/tau on a fine grid.
    r = np.linspace(1.0, 2.0, n_tail + 1)
    integrand = _annulus_bump(r) ** 2 / r
    hstep = r[1] - r[0]
    cum = np.concatenate(([0.0], np.cumsum((integrand[:-1] + integrand[1:]) * 0.5 * hstep)))
    J = cum[-1] - cum  # J(r[i]) = integral from r[i] to 2
    c0 = float(cum[-1])
    J_spline = CubicSpline(r, J)

    def rho_hat_sq(s):
        s = np.abs(np.asarray(s, dtype=np.float64))
        out = np.where(s <= 1.0, c0, 0.0)
        mid = (s > 1.0) & (s < 2.0)
        if np.any(mid):
            out = np.array(out, dtype=np.float64)
            out[mid] = np.maximum(J_spline(s[mid]), 0.0)
        return out

    def rho_hat_sq_deriv(s):
        s = np.asarray(s, dtype=np.float64)
        a = np.abs(s)
        mid = (a > 1.0) & (a < 2.0)
        out = np.zeros_like(a)
        if np.any(mid):
            out[mid] = -_annulus_bump(a[mid]) ** 2 / a[mid] * np.sign(s[mid])
        return out

    def sigma_hat_sq(s):
        return _annulus_bump(s) ** 2

    def phi_hat(xi):
        return np.sqrt(rho_hat_sq(xi))

    # Spatial synthesis.
    xi_phi = np.linspace(0.0, 2.0, n_freq + 1)
    phi_spline, dphi_spline, _ = _cosine_synthesis_table(xi_phi, phi_hat(xi_phi), x_max, dx)
    tau_psi = np.linspace(1.0, 2.0, n_freq + 1)
    psi_spline, dpsi_spline, _ = _cosine_synthesis_table(tau_psi, _annulus_bump(tau_psi), x_max, dx)

    phi = Profile(
        label="sqfn_phi",
        func=_even_spline_eval(phi_spline, x_max, +1),
        deriv=_even_spline_eval(dphi_spline, x_max, -1),
    )
    psi = Profile(
        label="sqfn_psi",
        func=_even_spline_eval(psi_spline, x_max, +1),
        deriv=_even_spline_eval(dpsi_spline, x_max, -1),
    )

    pair = AdmissiblePair(
        rho=phi,
        sigma=psi,
        kind="square-function",
        rho_hat_sq=rho_hat_sq,
        rho_hat_sq_deriv=rho_hat_sq_deriv,
        sigma_hat_sq=sigma_hat_sq,
    )
    object.__setattr__(pair, "phi_hat", phi_hat)
    object.__setattr__(pair, "psi_hat", _annulus_bump)
    object.__setattr__(pair, "plateau", c0)
    _SQ_PAIR_CACHE[key] = pair
    return pair


# -- the slow Gaussian superposition -------------------------------------------

PHI_AT_ZERO = 0.05  # integral_1^inf a^(-21) da = 1/20
PHI_TAIL_CONSTANT = float(math.factorial(9)) / 2.0  # x^20 Phi(x) -> 9!/2


def _phi_superposition_scalar(x: float, rel_tol: float) -> float:
    ax = abs(x)
    if ax < 1e-8:
        val, err = quad(lambda a: a**-21.0 * math.exp(-((x / a) ** 2)), 1.0, np.inf,
                        epsrel=rel_tol, epsabs=0.0)
        scale = abs(val)
    else:
        # Substituting b = x/a turns the integral into x^(-20) int_0^x b^19 e^(-b^2) db,
        # removing the infinite range and the large-x cancellation.
        val, err = quad(lambda b: b**19.0 * math.exp(-b * b), 0.0, ax,
                        epsrel=rel_tol, epsabs=0.0)
        if not np.isfinite(val) or val <= 0.0:
            raise QuadratureError(f"superposition quadrature failed at x={x}")
        scale = val
        val = val * ax**-20.0
    if err > 10.0 * rel_tol * scale + 1e-300:
        raise QuadratureError(
            f"superposition quadrature did not converge at x={x}: err={err:g}"
        )
    return float(val)


def phi_superposition(x, rel_tol: float = 1e-8):
    """Phi(x) = integral_1^inf a^(-21) exp(-(x/a)^2) da, adaptive quadrature.

    Phi(0) = 1/20, and x^20 Phi(x) -> 9!/2 as |x| grows.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        return _phi_superposition_scalar(float(arr), rel_tol)
    return np.array([_phi_superposition_scalar(float(v), rel_tol) for v in arr.ravel()]).reshape(arr.shape)


# -- identity residuals ----------------------------------------------------------

def fourier_identity_residual(
    pair: AdmissiblePair,
    ts: np.ndarray,
    taus: np.ndarray,
    method: str = "derivative",
    fd_step: float = 5e-3,
) -> float:
    """Sup residual of -t d/dt |rho_hat(t tau)|^2 = |sigma_hat(t tau)|^2.

    Returned value is max |lhs - rhs| over the (t, tau) grid, normalized by
    max |rhs| over the same grid.  `method` selects how the t-derivative is
    realized: "derivative" uses the pair's analytic derivative of |rho_hat|^2,
    "fd" uses Richardson-extrapolated central differences in log t.
    """
    ts = np.asarray(ts, dtype=np.float64)
    taus = np.asarray(taus, dtype=np.float64)
    S = np.outer(ts, taus)
    rhs = np.asarray(pair.sigma_hat_sq(S), dtype=np.float64)
    if method == "derivative":
        lhs = -S * np.asarray(pair.rho_hat_sq_deriv(S), dtype=np.float64)
    elif method == "fd":
        def dlog(delta):
            up = np.asarray(pair.rho_hat_sq(S * math.exp(delta)), dtype=np.float64)
            dn = np.asarray(pair.rho_hat_sq(S * math.exp(-delta)), dtype=np.float64)
            return (up - dn) / (2.0 * delta)

        coarse = dlog(fd_step)
        fine = dlog(fd_step / 2.0)
        lhs = -(4.0 * fine - coarse) / 3.0
    else:
        raise ValueError(f"unknown method {method!r}")
    denom = float(np.max(np.abs(rhs)))
    if denom == 0.0:
        return float(np.max(np.abs(lhs - rhs)))
    return float(np.max(np.abs(lhs - rhs))) / denom


def transform_convention_residual(
    pair: AdmissiblePair,
    taus: np.ndarray,
    L: float = 64.0,
    n: int = 1 << 13,
) -> float:
    """Cross-check |sigma_hat|^2 against a direct Riemann transform of sigma.

    Guards the transform convention: the closed-form spectra and the sampled
    profile must describe the same function.
    """
    x = grid_nodes(L, n)
    h = 2.0 * L / n
    vals = np.asarray(pair.sigma.func(x), dtype=np.float64)
    taus = np.asarray(taus, dtype=np.float64)
    phase = np.exp(-2j * np.pi * np.outer(taus, x))
    hat = phase @ vals * h
    direct = np.abs(hat) ** 2
    closed = np.asarray(pair.sigma_hat_sq(taus), dtype=np.float64)
    denom = max(float(np.max(np.abs(closed))), 1e-300)
    return float(np.max(np.abs(direct - closed))) / denom


def dilation_telescoping_residual(
    profile: Profile,
    k: int,
    xs: np.ndarray,
    steps: int = 64,
    nodes_per_step: int = 4,
) -> float:
    """Residual of [f]_{2^(k-1)} - [f]_{2^k} = int (-t d/dt [f]_t) dt/t over one octave.

    The t-derivative is realized through -t d/dt [f]_t = [f + id * f']_t.  The
    dt/t integral splits log t into `steps` equal subintervals with a fixed
    Gauss-Legendre rule on each; the default 4-point rule resolves the
    oscillatory band-limited profiles well below 1e-6 at 64 steps.  Returns
    max |lhs - rhs| / max |lhs| over the sample points.
    """
    xs = np.asarray(xs, dtype=np.float64)
    t_lo, t_hi = 2.0 ** (k - 1), 2.0**k

    def dilated(t):
        return np.asarray(profile.func(xs / t), dtype=np.float64) / t

    def integrand(t):
        u = xs / t
        return (np.asarray(profile.func(u)) + u * np.asarray(profile.derivative(u))) / t

    lhs = dilated(t_lo) - dilated(t_hi)
    gl_nodes, gl_weights = np.polynomial.legendre.leggauss(nodes_per_step)
    edges = np.linspace(math.log(t_lo), math.log(t_hi), steps + 1)
    half = 0.5 * (edges[1] - edges[0])
    rhs = np.zeros_like(xs)
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        for z, w in zip(gl_nodes, gl_weights):
            rhs += w * half * integrand(math.exp(mid + half * z))
    denom = max(float(np.max(np.abs(lhs))), 1e-300)
    return float(np.max(np.abs(lhs - rhs))) / denom
