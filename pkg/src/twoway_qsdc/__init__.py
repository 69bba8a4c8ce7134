"""Simulation and security analysis of two-way quantum secure direct communication."""

__version__ = "0.1.0"
