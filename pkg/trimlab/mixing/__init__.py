"""Empirical dependence coefficients of observable processes."""
