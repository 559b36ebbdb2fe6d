"""Monotonicity rules for ratios of Laplace transforms, with special-function applications."""

__version__ = "0.1.0"
