"""Coarse payoff-assessment learning: trees, dynamics, equilibria, stability."""

__version__ = "0.1.0"
