"""Entangled quadrilinear singular forms: dyadic machinery and verification suites."""

__version__ = "0.1.0"
