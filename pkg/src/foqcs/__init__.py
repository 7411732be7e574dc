"""Block-encoding circuit synthesis for Pauli sums and matrix polynomials."""

__version__ = "0.1.0"
