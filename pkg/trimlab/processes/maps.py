"""Piecewise affine interval maps: constructors and float orbits."""

import logging

import numpy as np

from trimlab.exceptions import DomainError
from trimlab.processes.models import Cell, PiecewiseMapSpec, StepObservable

logger = logging.getLogger(__name__)

DEFAULT_PREFIX = 64


def doubling_map() -> PiecewiseMapSpec:
    """Return the doubling map `x -> 2x mod 1`."""
    return PiecewiseMapSpec(
        cells=[
            Cell(left=0.0, right=0.5, slope=2.0, label=0),
            Cell(left=0.5, right=1.0, slope=2.0, label=1),
        ],
        expansion_floor=2.0,
    )


def canonical_luroth_map(prefix: int = DEFAULT_PREFIX) -> PiecewiseMapSpec:
    """Return the full-branch map on `I_n = [1/(n+1), 1/n)`.

    The branch on `I_n` has slope `n (n + 1)`, so Lebesgue measure is
    invariant and the digits are i.i.d. with `P(d = n) = 1 / (n (n + 1))`.

    Args:
        prefix: Number of cells stored explicitly; cells with labels above
            `prefix` follow the harmonic tail rule.

    Returns:
        Interval map with harmonic tail.
    """
    if prefix < 1:
        raise DomainError("prefix must be at least 1")
    cells = [
        Cell(left=1 / (n + 1), right=1 / n, slope=float(n * (n + 1)), label=n)
        for n in range(prefix, 0, -1)
    ]
    return PiecewiseMapSpec(cells=cells, harmonic_tail=True, expansion_floor=2.0)


def canonical_observable(map_spec: PiecewiseMapSpec, alpha: float) -> StepObservable:
    """Return `chi = sum_n n^(1/alpha) 1_{I_n}` on the cells of `map_spec`.

    Args:
        map_spec: Interval map whose cell labels are the digits.
        alpha: Tail index in (0, 1).

    Returns:
        Step observable with value `label ** (1/alpha)` on every cell.
    """
    if not 0 < alpha < 1:
        raise DomainError("alpha must be in (0,1)")
    power = 1 / alpha
    return StepObservable(
        values=[float(cell.label) ** power for cell in map_spec.cells],
        tail_power=power if map_spec.harmonic_tail else None,
    )


def orbit_float(map_spec: PiecewiseMapSpec, x0: float, n: int) -> np.ndarray:
    """Iterate a map in double precision.

    Diagnostic only: rounding errors grow like `m ** k` along the orbit, and
    binary maps such as the doubling map collapse to 0 within ~53 steps.

    Args:
        map_spec: Interval map.
        x0: Starting point in [0, 1).
        n: Orbit length.

    Returns:
        Array `(x0, T x0, ..., T^(n-1) x0)`.

    Raises:
        trimlab.exceptions.DomainError: `x0` lies outside [0, 1) or `n < 1`.
    """
    if not 0 <= x0 < 1:
        raise DomainError(f"x0={x0} lies outside [0,1)")
    if n < 1:
        raise DomainError("orbit length must be at least 1")
    orbit = np.empty(n, dtype=float)
    point = np.array([x0], dtype=float)
    for step in range(n):
        orbit[step] = point[0]
        point = map_spec.apply(point)
    return orbit


def orbits_float(
    map_spec: PiecewiseMapSpec,
    starts: np.ndarray,
    n: int,
) -> np.ndarray:
    """Iterate many starting points at once; rows are orbits."""
    starts = np.asarray(starts, dtype=float)
    orbits = np.empty((starts.shape[0], n), dtype=float)
    point = starts
    for step in range(n):
        orbits[:, step] = point
        point = map_spec.apply(point)
    return orbits
