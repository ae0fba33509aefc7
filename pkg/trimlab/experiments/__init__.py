"""Monte Carlo experiments on trimmed sums."""
