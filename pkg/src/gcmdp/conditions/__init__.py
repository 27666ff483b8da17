"""Checkers for the (partial) convergence of value iteration from zero."""
