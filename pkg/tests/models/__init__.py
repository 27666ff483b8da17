"""Tests for the gcmdp models."""
