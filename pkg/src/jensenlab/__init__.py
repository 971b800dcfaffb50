"""Certified computation of Jensen and Taylor polynomials of even entire
functions, their hyperbolicity, and normalization toward Hermite polynomials."""

__version__ = "0.1.0"
