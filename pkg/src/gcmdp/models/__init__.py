"""
Models for the gcmdp library.

This package contains the data models for MDPs, lazily generated MDPs, value
functions and policies, together with validation and the JSON file format.
"""
