"""
Linear Loop ANT Analyzer package.

Computes the asymptotically non-terminating inputs of linear and affine while loops
with exact rational arithmetic and decides their termination.
"""

__version__ = "0.1.0"
