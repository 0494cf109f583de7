"""Numerical tau-quantization of pseudo-differential operators."""

__version__ = "0.1.0"
