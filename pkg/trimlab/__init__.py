"""trimlab package root."""
