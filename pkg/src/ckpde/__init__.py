"""Exact power-series tools for overdetermined first-order analytic PDE systems."""

__version__ = "0.1.0"
