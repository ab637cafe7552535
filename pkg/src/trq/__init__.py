"""Exact topological recursion and quantum spectral curve engine."""

__version__ = "0.1.0"
