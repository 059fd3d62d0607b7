"""Bag-of-words representation for biomedical time-series classification."""

__version__ = "0.1.0"
