"""Simulation engine for the tripartite qubit-photon-phonon cavity-QED model."""

__version__ = "0.1.0"
