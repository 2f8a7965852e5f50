"""Birkhoff factorization of matrix loops, group actions in factorization
coordinates, and Wiener loop sampling on SU(2) and the two-sphere."""

__version__ = "0.1.0"
