"""Lattice points on quaternary quadrics, exact exponential sums, local densities,
p-adic height balls and discrepancy-based spectral bounds."""

__version__ = "0.1.0"
