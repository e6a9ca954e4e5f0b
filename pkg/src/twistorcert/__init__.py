"""Exact and numerical certification of balanced metrics on twistor spaces."""

__version__ = "0.1.0"
