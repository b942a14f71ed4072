"""Numerical laboratory for complex geometrical optics solutions of the
time-harmonic Maxwell system in a slab."""

__version__ = "0.1.0"
