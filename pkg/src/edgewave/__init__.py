"""Boundary-integral solver for interface-guided waves of the 2D Klein-Gordon equation."""

__version__ = "0.1.0"
