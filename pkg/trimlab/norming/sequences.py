"""Deterministic norming, threshold and truncation sequences."""

import logging
import math
from typing import List, Sequence

import numpy as np

from trimlab.exceptions import DomainError, NumericFailure, ScheduleError, TrimlabError
from trimlab.norming.models import NormingRow, NormingTable, TrimmingSchedule
from trimlab.regvar.calculus import (
    QUANTILE_REL_TOL,
    TailLaw,
    TruncatedMoment,
    tail_quantile,
    truncated_first_moment,
)
from trimlab.regvar.conjugates import MAX_ITER, TOL, X_MIN, debruijn_conjugate_log
from trimlab.regvar.models import LatticeDigitTail, PowerOfL, RegVaryingTail

logger = logging.getLogger(__name__)

_LOG_MAX_FLOAT = math.log(np.finfo(float).max)


def _regular_part(law: TailLaw) -> RegVaryingTail:
    """Regularly varying tail carrying the `(alpha, L)` of `law`."""
    if isinstance(law, LatticeDigitTail):
        return RegVaryingTail(alpha=law.alpha)
    return law


def zeta(b: int) -> float:
    """Return `b ** (2/3)`.

    Raises:
        trimlab.exceptions.DomainError: `b < 1`.
    """
    if b < 1:
        raise DomainError(f"b={b} must be at least 1")
    return float(np.cbrt(b) ** 2)


def g_threshold(
    law: TailLaw,
    n: int,
    b: int,
    rel_tol: float = QUANTILE_REL_TOL,
) -> float:
    """Return the quantile threshold `F^<-(1 - (b - b^(2/3)) / n)`.

    Args:
        law: Marginal tail law.
        n: Checkpoint.
        b: Trimming count at `n`.
        rel_tol: Relative tolerance of the quantile.

    Returns:
        Threshold `g_n`.

    Raises:
        trimlab.exceptions.ScheduleError: `b - b^(2/3)` is not positive or
            not below `n`.
    """
    if b < 1:
        raise ScheduleError(f"b={b} at n={n} must be at least 1", n=n)
    excess = b - zeta(b)
    if not excess > 0:
        raise ScheduleError(f"b - b^(2/3) is not positive for b={b} at n={n}", n=n)
    level = excess / n
    if not level < 1:
        raise ScheduleError(f"(b - b^(2/3))/n={level:g} at n={n} is not below 1", n=n)
    return tail_quantile(law, level, rel_tol)


def d_norming(
    law: TailLaw,
    n: int,
    b: int,
    x_min: float = X_MIN,
    max_iter: int = MAX_ITER,
    tol: float = TOL,
) -> float:
    """Return the norming constant of trimmed sums.

    `d_n = alpha / (1 - alpha) n^(1/alpha) b^(1 - 1/alpha) M#((n/b)^(1/alpha))`
    where `M#` is the de Bruijn conjugate of `M = L^(-1/alpha)`. The conjugate
    argument is handled in log coordinates, so it may exceed double range.

    Args:
        law: Marginal tail law; the lattice digit law has `L = 1`.
        n: Checkpoint.
        b: Trimming count, `1 <= b < n`.
        x_min: Smallest conjugate argument for non-constant `L`.
        max_iter: Iteration cap of the conjugate solver.
        tol: Relative tolerance of the conjugate solver.

    Returns:
        Norming constant `d_n`.

    Raises:
        trimlab.exceptions.ScheduleError: `b` is not in `[1, n)`.
        trimlab.exceptions.DomainError: The conjugate argument is below
            `x_min`.
        trimlab.exceptions.ConvergenceError: The conjugate did not converge.
        trimlab.exceptions.NumericFailure: `d_n` exceeds double range.
    """
    if not 1 <= b < n:
        raise ScheduleError(f"b={b} at n={n} must satisfy 1 <= b < n", n=n)
    regular = _regular_part(law)
    alpha = regular.alpha
    factor = alpha / (1 - alpha)
    log_argument = math.log(n / b) / alpha
    slowly = PowerOfL(base=regular.L, exponent=-1 / alpha)
    if not regular.L.is_constant() and log_argument < math.log(x_min):
        raise DomainError(
            f"conjugate argument (n/b)^(1/alpha)={math.exp(log_argument):g} "
            f"at n={n} is below x_min={x_min}"
        )
    log_conjugate, iterations = debruijn_conjugate_log(
        slowly, log_argument, max_iter=max_iter, tol=tol
    )
    logger.debug(f"Conjugate at n={n} took {iterations} iterations.")
    try:
        direct = (
            factor
            * float(n) ** (1 / alpha)
            * float(b) ** (1 - 1 / alpha)
            * math.exp(log_conjugate)
        )
    except OverflowError:
        direct = math.inf
    if math.isfinite(direct) and direct > 0:
        return direct
    log_d = (
        math.log(factor)
        + math.log(n) / alpha
        + (1 - 1 / alpha) * math.log(b)
        + log_conjugate
    )
    if log_d >= _LOG_MAX_FLOAT:
        raise NumericFailure(f"d_n at n={n} exceeds double range (log d_n={log_d:g})")
    return math.exp(log_d)


def expected_truncated_sum(law: TailLaw, n: int, f: float) -> TruncatedMoment:
    """Return `n E[X 1{X <= f}]` and its asymptotic.

    The asymptotic is `n alpha / (1 - alpha) L(f) f^(1 - alpha)`.

    Raises:
        trimlab.exceptions.DomainError: `n < 1` or `f` lies left of the
            support.
    """
    if n < 1:
        raise DomainError(f"n={n} must be at least 1")
    moment = truncated_first_moment(law, f)
    return TruncatedMoment(
        f=f, exact=n * moment.exact, asymptotic=n * moment.asymptotic
    )


def truncation_asymptotic(law: TailLaw, n: int, f: float) -> float:
    """Return `n alpha / (1 - alpha) L(f) f^(1 - alpha)`."""
    regular = _regular_part(law)
    alpha = regular.alpha
    return n * alpha / (1 - alpha) * regular.L.evaluate(f) * f ** (1 - alpha)


def norming_row(law: TailLaw, n: int, b: int, **solver) -> NormingRow:
    """Return all deterministic sequences at one checkpoint.

    Args:
        law: Marginal tail law.
        n: Checkpoint.
        b: Trimming count at `n`.
        **solver: Keyword arguments passed on to `d_norming()`.

    Returns:
        Norming row with the ratio `(d/g) / (alpha/(1-alpha) b)`.
    """
    g = g_threshold(law, n, b)
    d = d_norming(law, n, b, **solver)
    alpha = law.alpha
    return NormingRow(
        n=n,
        b=b,
        zeta=zeta(b),
        g=g,
        d=d,
        ratio_dg_over_ab=(d / g) / (alpha / (1 - alpha) * b),
        truncation_asymptotic=truncation_asymptotic(law, n, g),
    )


def norming_table(
    law: TailLaw,
    schedule: TrimmingSchedule,
    checkpoints: Sequence[int],
    **solver,
) -> NormingTable:
    """Tabulate the deterministic sequences along a checkpoint grid.

    Every row is attempted; failures are collected and reported together.

    Args:
        law: Marginal tail law.
        schedule: Trimming schedule.
        checkpoints: Checkpoints, in the order the rows are emitted.
        **solver: Keyword arguments passed on to `d_norming()`.

    Returns:
        Norming table with one row per checkpoint.

    Raises:
        trimlab.exceptions.ScheduleError: At least one row failed; `n` is the
            first offending checkpoint.
    """
    rows: List[NormingRow] = []
    failures: List[str] = []
    first_failure = None
    for n in checkpoints:
        try:
            rows.append(norming_row(law, n, schedule.b(n), **solver))
        except TrimlabError as exc:
            failures.append(f"n={n}: {exc}")
            if first_failure is None:
                first_failure = n
    if failures:
        for failure in failures:
            logger.error(f"Norming row failed: {failure}")
        raise ScheduleError(
            f"{len(failures)} of {len(checkpoints)} norming rows failed: "
            + "; ".join(failures),
            n=first_failure,
        )
    return NormingTable(rows=rows)
