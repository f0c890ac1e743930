"""Optimal alignment with a constrained number of gaps: scores, random-walk and
Brownian representations, and Monte Carlo fluctuation experiments."""

__version__ = "0.1.0"
