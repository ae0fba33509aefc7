"""Streaming Birkhoff, trimmed and truncated sums."""
