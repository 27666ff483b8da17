"""Tests for the convergence condition checkers."""
