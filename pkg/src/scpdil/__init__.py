"""Finite-dimensional dilations, covariance checks and classical system combinatorics."""

__version__ = "0.1.0"
