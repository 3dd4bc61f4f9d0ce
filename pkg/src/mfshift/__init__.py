"""Experimental toolkit for shifted-value relations of multiplicative functions."""

__version__ = "0.1.0"
