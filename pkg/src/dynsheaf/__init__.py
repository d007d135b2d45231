"""Dynamical invariants of rational maps of the Riemann sphere and their Ext bookkeeping."""

__version__ = "0.1.0"
