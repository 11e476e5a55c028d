"""Numerical laboratory for absolute-parallelism geometry on the tangent bundle."""

__version__ = "0.1.0"
