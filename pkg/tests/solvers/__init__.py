"""Tests for the solvers."""
