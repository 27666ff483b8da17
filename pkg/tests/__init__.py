"""Tests for the gcmdp package."""
