"""Simulation and analysis of platforms riding a shared driven cable set."""

__version__ = "0.1.0"
