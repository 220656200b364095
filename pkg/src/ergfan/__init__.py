"""Exact discrete exponential families over exhaustively enumerated graph
statistics: induced measures, polyhedral convex supports and normal fans,
ordinary and extended maximum likelihood, and entropy landscapes."""

__version__ = "0.1.0"
