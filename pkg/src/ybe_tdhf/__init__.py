"""Hybrid time-dependent Hartree-Fock on swap-network circuits."""

__version__ = "0.1.0"
