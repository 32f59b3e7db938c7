"""Headless figure emitter for the edgewave solver's published CSV schemas."""

__version__ = "0.1.0"
