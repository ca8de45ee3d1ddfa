"""Linear-system formulation of a quantum lattice Boltzmann solver: classical
reference, Carleman operators, global time system, spectral analysis,
Chebyshev inverse polynomial and block-encoding circuits."""

__version__ = "0.1.0"
