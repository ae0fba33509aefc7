"""Calculus of regularly varying tails."""
