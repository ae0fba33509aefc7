"""De Bruijn conjugates of slowly varying functions.

A de Bruijn conjugate `L#` of `L` satisfies `L(x) L#(x L(x)) -> 1` and
`L#(x) L(x L#(x)) -> 1`. It is unique only up to asymptotic equivalence; the
value returned here is the fixed point of `t = 1 / L(x t)` at the given `x`,
which satisfies the second identity exactly and the first one
asymptotically. Both residuals are reported.
"""

import logging
import math
from typing import Tuple

from pydantic import BaseModel  # pylint: disable=no-name-in-module

from trimlab.exceptions import ConvergenceError, DomainError
from trimlab.regvar.models import SlowlyVaryingSpec

logger = logging.getLogger(__name__)

X_MIN = 10.0
MAX_ITER = 200
TOL = 1e-12


class ConjugateResult(BaseModel):
    """Value of a de Bruijn conjugate at one point.

    Args:
        x: Evaluation point.
        value: `L#(x)`.
        log_value: `log L#(x)`.
        residual: `|L(x) L#(x L(x)) - 1|`.
        dual_residual: `|L#(x) L(x L#(x)) - 1|`.
        iterations: Fixed-point iterations used at `x`; 0 for constant `L`.
    """

    x: float
    value: float
    log_value: float
    residual: float
    dual_residual: float
    iterations: int


def debruijn_conjugate_log(
    slowly: SlowlyVaryingSpec,
    log_x: float,
    max_iter: int = MAX_ITER,
    tol: float = TOL,
) -> Tuple[float, int]:
    """Solve `log t = -log L(x t)` by fixed-point iteration from `t = 1`.

    Works in `log x` so that arguments far beyond the floating-point range are
    admissible.

    Args:
        slowly: Slowly varying function `L`.
        log_x: Logarithm of the evaluation point.
        max_iter: Iteration cap.
        tol: Stop once `|t_{k+1} - t_k| <= tol * t_k`.

    Returns:
        Tuple of `log L#(x)` and the number of iterations used.

    Raises:
        trimlab.exceptions.ConvergenceError: `max_iter` was exceeded.
    """
    if slowly.is_constant():
        return -slowly.log_evaluate(log_x), 0
    log_t = 0.0
    for iteration in range(1, max_iter + 1):
        log_t_new = -slowly.log_evaluate(log_x + log_t)
        if abs(math.expm1(log_t_new - log_t)) <= tol:
            return log_t_new, iteration
        log_t = log_t_new
    residual = abs(math.expm1(log_t + slowly.log_evaluate(log_x + log_t)))
    raise ConvergenceError(
        f"de Bruijn conjugate did not converge within {max_iter} iterations "
        f"at log x={log_x}",
        last_iterate=math.exp(log_t),
        residual=residual,
    )


def debruijn_conjugate(
    slowly: SlowlyVaryingSpec,
    x: float,
    max_iter: int = MAX_ITER,
    tol: float = TOL,
    x_min: float = X_MIN,
) -> ConjugateResult:
    """Evaluate a de Bruijn conjugate and report both defining residuals.

    Constant functions `L = c` have the exact conjugate `1 / c`.

    Args:
        slowly: Slowly varying function `L`.
        x: Evaluation point, at least `x_min`.
        max_iter: Iteration cap.
        tol: Relative step tolerance, positive.
        x_min: Smallest admissible evaluation point.

    Returns:
        Conjugate value with residuals.

    Raises:
        trimlab.exceptions.DomainError: `x < x_min` or `tol <= 0`.
        trimlab.exceptions.ConvergenceError: `max_iter` was exceeded.
    """
    if not x >= x_min:
        raise DomainError(f"x={x} is below x_min={x_min}")
    if not tol > 0:
        raise DomainError(f"tol={tol} must be positive")
    log_x = math.log(x)
    if slowly.is_constant():
        value = 1.0 / slowly.evaluate(x)
        return ConjugateResult(
            x=x,
            value=value,
            log_value=-math.log(slowly.evaluate(x)),
            residual=abs(slowly.evaluate(x) * value - 1.0),
            dual_residual=abs(value * slowly.evaluate(x) - 1.0),
            iterations=0,
        )
    log_value, iterations = debruijn_conjugate_log(
        slowly, log_x, max_iter=max_iter, tol=tol
    )
    log_l = slowly.log_evaluate(log_x)
    log_value_at_image, _ = debruijn_conjugate_log(
        slowly, log_x + log_l, max_iter=max_iter, tol=tol
    )
    residual = abs(math.expm1(log_l + log_value_at_image))
    dual_residual = abs(
        math.expm1(log_value + slowly.log_evaluate(log_x + log_value))
    )
    if residual > 1e-3:
        logger.warning(f"Conjugate residual {residual:.3g} at x={x:.6g}.")
    return ConjugateResult(
        x=x,
        value=math.exp(log_value),
        log_value=log_value,
        residual=residual,
        dual_residual=dual_residual,
        iterations=iterations,
    )
