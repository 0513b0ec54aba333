"""Conformal-metric quantities on annuli: Carathéodory/Kobayashi/Teichmüller densities, spin-map modulus bounds, and verification suites."""

__version__ = "0.1.0"
