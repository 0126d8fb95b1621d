"""Biharmonic Steklov eigenvalues on box cylinders and rectangles."""

__version__ = "0.1.0"
