"""Finite-dipole water waves: potentials, surface operators, steady branch,
Hamiltonian dynamics and instability diagnostics."""

__version__ = "0.1.0"
