"""Exact formal symplectic groupoid engine over polynomial Poisson structures."""

__version__ = "0.1.0"
