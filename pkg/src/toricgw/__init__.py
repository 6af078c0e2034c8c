"""Exact-arithmetic engine for equivariant Gromov-Witten structures of toric bundles."""

__version__ = "0.1.0"
