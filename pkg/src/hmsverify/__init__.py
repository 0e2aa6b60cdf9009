"""Finite-slice verifier for mirror symmetry of a blown-up abelian surface times C."""

__version__ = "0.1.0"
