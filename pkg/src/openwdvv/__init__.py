"""Landau-Ginzburg models, residue-based Frobenius data, and numerical
verification of open WDVV identities."""

__version__ = "0.1.0"
