"""Static checks of interval maps and marginal-law diagnostics of paths."""

import logging
import math
from typing import Iterable, List, Union

import numpy as np

from trimlab.exceptions import DomainError, InsufficientDataError
from trimlab.processes.models import (
    CheckStatus,
    ConditionCheck,
    ConditionReport,
    PiecewiseMapSpec,
    SamplePath,
    StepObservable,
    TailCheckReport,
    TailCheckRow,
)
from trimlab.regvar.calculus import TailLaw, tail

logger = logging.getLogger(__name__)

LEVEL_MAX = 1e6
MAX_LEVELS = 512
MIN_PATH_LENGTH = 1000


def _positional_values(
    map_spec: PiecewiseMapSpec,
    observable: StepObservable,
    level_max: float,
) -> np.ndarray:
    """Observable values on the cells in positional order, left to right.

    With a harmonic tail, tail cells whose value exceeds `level_max` are
    collapsed into a single leading `inf` entry.
    """
    prefix = np.asarray(observable.values, dtype=float)
    if not map_spec.harmonic_tail:
        return prefix
    power = observable.tail_power or 1.0
    start = map_spec.tail_start
    top = max(start - 1, math.floor(level_max ** (1 / power)))
    labels = np.arange(top, start - 1, -1, dtype=float)
    return np.concatenate([[math.inf], labels**power, prefix])


def _levels(values: np.ndarray, level_max: float) -> np.ndarray:
    """Levels at which the truncation variation ratio is maximal.

    Between consecutive distinct values the variation is constant, so the
    ratio to the level peaks at the values themselves.
    """
    finite = np.unique(values[np.isfinite(values) & (values <= level_max)])
    if finite.size > MAX_LEVELS:
        picks = np.unique(
            np.round(np.geomspace(1, finite.size, MAX_LEVELS)).astype(int) - 1
        )
        finite = finite[picks]
    return np.concatenate([[0.0], finite])


def _variation(step_values: np.ndarray) -> float:
    """Total variation of a step function vanishing outside [0, 1)."""
    padded = np.concatenate([[0.0], step_values, [0.0]])
    return float(np.sum(np.abs(np.diff(padded))))


def validate_example_conditions(
    map_spec: PiecewiseMapSpec,
    observable: StepObservable,
    k_bound: float,
    level_max: float = LEVEL_MAX,
) -> ConditionReport:
    """Check the finite conditions an expanding interval map must satisfy.

    Evaluates Adler's condition, the finite image condition, uniform
    expansion, the variation bounds `V(chi 1{chi <= l}) <= k l` and
    `V(1{chi > l}) <= k` on a level grid, and records whether topological
    mixing follows from the full-branch property.

    Args:
        map_spec: Interval map with at least two cells.
        observable: Step observable on the cells of `map_spec`.
        k_bound: Constant `k` of the variation bounds.
        level_max: Largest level `l` checked.

    Returns:
        Report with one entry per condition; failures are entries, not errors.

    Raises:
        trimlab.exceptions.DomainError: The map has fewer than two cells or
            the observable does not match its cells.
    """
    if map_spec.count_cells() < 2:
        raise DomainError("map needs at least two cells")
    if len(observable.values) != len(map_spec.cells):
        raise DomainError("observable needs one value per cell")
    if map_spec.harmonic_tail and observable.tail_power is None:
        raise DomainError("observable needs tail_power for a harmonic tail")
    checks: List[ConditionCheck] = [
        ConditionCheck(
            name="adler",
            status=CheckStatus.PASS,
            witness="all branches are affine, T'' = 0",
        ),
        _finite_image(map_spec),
        _uniform_expansion(map_spec),
    ]
    checks.extend(_variation_checks(map_spec, observable, k_bound, level_max))
    full = all(cell.is_full_branch() for cell in map_spec.cells)
    checks.append(
        ConditionCheck(
            name="topological_mixing",
            status=CheckStatus.PASS if full else CheckStatus.NOT_VERIFIED,
            witness=(
                "full-branch sufficiency"
                if full
                else "map is not full-branch; mixing not machine-checkable"
            ),
        )
    )
    report = ConditionReport(checks=checks)
    logger.info(
        f"Map checks: {', '.join(f'{c.name}={c.status.value}' for c in checks)}."
    )
    return report


def _finite_image(map_spec: PiecewiseMapSpec) -> ConditionCheck:
    # A finite cell list, plus full branches on the tail, has finitely many images.
    tail = " and full-branch tail cells" if map_spec.harmonic_tail else ""
    return ConditionCheck(
        name="finite_image",
        status=CheckStatus.PASS,
        witness=f"holds by construction: {len(map_spec.cells)} listed cells{tail}",
    )


def _uniform_expansion(map_spec: PiecewiseMapSpec) -> ConditionCheck:
    floor = map_spec.expansion_floor
    weakest = min(map_spec.cells, key=lambda cell: abs(cell.slope))
    slope = abs(weakest.slope)
    if map_spec.harmonic_tail:
        # tail slopes n (n + 1) grow with n
        start = map_spec.tail_start
        slope = min(slope, float(start * (start + 1)))
    ok = floor > 1 and slope >= floor
    return ConditionCheck(
        name="uniform_expansion",
        status=CheckStatus.PASS if ok else CheckStatus.FAIL,
        witness=f"min |slope| = {slope:g} (cell {weakest.label}), m = {floor:g}",
    )


def _variation_checks(
    map_spec: PiecewiseMapSpec,
    observable: StepObservable,
    k_bound: float,
    level_max: float,
) -> List[ConditionCheck]:
    values = _positional_values(map_spec, observable, level_max)
    worst_ratio, worst_level = 0.0, 0.0
    worst_indicator, indicator_level = 0.0, 0.0
    truncation_ok = indicator_ok = True
    for level in _levels(values, level_max):
        truncated = _variation(np.where(values <= level, values, 0.0))
        indicator = _variation((values > level).astype(float))
        if truncated > k_bound * level:
            truncation_ok = False
        if level > 0 and truncated / level > worst_ratio:
            worst_ratio, worst_level = truncated / level, level
        if indicator > worst_indicator:
            worst_indicator, indicator_level = indicator, level
        if indicator > k_bound:
            indicator_ok = False
    return [
        ConditionCheck(
            name="variation_truncated",
            status=CheckStatus.PASS if truncation_ok else CheckStatus.FAIL,
            witness=(
                f"max V/l = {worst_ratio:g} at l = {worst_level:g}, "
                f"k = {k_bound:g}"
            ),
        ),
        ConditionCheck(
            name="variation_indicator",
            status=CheckStatus.PASS if indicator_ok else CheckStatus.FAIL,
            witness=(
                f"max V = {worst_indicator:g} at l = {indicator_level:g}, "
                f"k = {k_bound:g}"
            ),
        ),
    ]


def empirical_tail_check(
    path: Union[SamplePath, np.ndarray],
    law: TailLaw,
    grid: Iterable[float],
) -> TailCheckReport:
    """Compare empirical exceedance frequencies with an exact tail.

    Args:
        path: Sample path or array of values.
        law: Exact marginal law.
        grid: Levels at which to compare.

    Returns:
        Per-level comparison and the largest absolute deviation.

    Raises:
        trimlab.exceptions.InsufficientDataError: Fewer than 1000 values.
    """
    values = path.values if isinstance(path, SamplePath) else np.asarray(path)
    size = int(values.shape[0])
    if size < MIN_PATH_LENGTH:
        raise InsufficientDataError(
            f"tail check needs at least {MIN_PATH_LENGTH} values, got {size}"
        )
    ordered = np.sort(values)
    rows: List[TailCheckRow] = []
    for x in grid:
        exact = tail(law, x)
        empirical = (size - int(np.searchsorted(ordered, x, side="right"))) / size
        standard_error = math.sqrt(exact * (1 - exact) / size)
        if standard_error > 0:
            z = (empirical - exact) / standard_error
        else:
            z = 0.0 if empirical == exact else math.inf
        rows.append(
            TailCheckRow(
                x=x,
                exact=exact,
                empirical=empirical,
                standard_error=standard_error,
                z=z,
            )
        )
    max_deviation = max((abs(r.empirical - r.exact) for r in rows), default=0.0)
    return TailCheckReport(rows=rows, max_deviation=max_deviation, sample_size=size)
