"""Solvers and instance tools for the minimum spanning tree of segments problem."""

__version__ = "0.1.0"
