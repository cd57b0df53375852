"""Deconvolution on uniform grids with tail-profile driven regularization."""

__version__ = "0.1.0"
