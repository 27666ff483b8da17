"""Tests for graph and chain analysis."""
