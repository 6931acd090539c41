"""Numerical toolkit for total geodesic curvature bounds, the
Brown-York-Shi-Tam quasi-local mass in two dimensions, and BTZ ellipse
mass limits."""

__version__ = "0.1.0"
