"""Tests for the gallery."""
