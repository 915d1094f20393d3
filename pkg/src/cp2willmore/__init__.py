"""Numerical Willmore-type functionals for surfaces in the complex projective plane."""

__version__ = "0.1.0"
