"""Exact verification toolkit for three two-parameter families of K3 surfaces."""

__version__ = "0.1.0"
