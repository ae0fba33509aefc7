"""Generators for stationary observable processes."""
