"""Dyadic harmonic-analysis toolkit and estimate verification harness."""

__version__ = "0.1.0"
