"""Process, interval-map and sample-path models."""

import math
from enum import Enum
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import (  # pylint: disable=no-name-in-module
    BaseModel,
    root_validator,
    validator,
)

from trimlab.exceptions import DomainError
from trimlab.regvar.models import (
    ConstantL,
    LatticeDigitTail,
    RegVaryingTail,
)
from trimlab.utils.seeds import SeedKey

# pragma pylint: disable=too-few-public-methods

# highest admissible symbolic window for the doubling map
WINDOW_LIMIT = 1024

# images of full branches are [0, 1) up to this tolerance
FULL_BRANCH_TOL = 1e-12


class Cell(BaseModel):
    """Interval `[left, right)` with affine branch `x -> slope * (x - left)`.

    Args:
        left: Left end point.
        right: Right end point.
        slope: Non-zero slope of the branch.
        label: Integer label of the cell, e.g. `n` for `[1/(n+1), 1/n)`.
    """

    left: float
    right: float
    slope: float
    label: int

    @root_validator(skip_on_failure=True)
    def proper_interval(cls, values):  # pylint: disable=no-self-argument
        """Ensure a non-empty interval and a non-zero slope."""
        if not 0 <= values["left"] < values["right"] <= 1:
            raise ValueError("cell must be a non-empty sub-interval of [0,1)")
        if values["slope"] == 0:
            raise ValueError("slope must be non-zero")
        return values

    def image(self) -> Tuple[float, float]:
        """Return the image interval of the branch."""
        end = self.slope * (self.right - self.left)
        return (min(0.0, end), max(0.0, end))

    def is_full_branch(self) -> bool:
        """Whether the branch maps the cell onto [0, 1)."""
        low, high = self.image()
        return low == 0 and abs(high - 1) <= FULL_BRANCH_TOL


class PiecewiseMapSpec(BaseModel):
    """Piecewise affine interval map on a (possibly countable) partition.

    The finite prefix `cells` is ordered by position. With `harmonic_tail`
    the partition continues below the first cell with `[1/(n+1), 1/n)` and
    full branches of slope `n (n + 1)`; the first cell must then start at
    `1/(N+1)` for an integer `N`.

    Args:
        cells: Ordered finite prefix of the partition.
        harmonic_tail: Continue the partition harmonically towards 0.
        expansion_floor: Claimed expansion constant `m`.
    """

    cells: List[Cell]
    harmonic_tail: bool = False
    expansion_floor: float = 2.0

    @root_validator(skip_on_failure=True)
    def partition(cls, values):  # pylint: disable=no-self-argument
        """Ensure that the cells tile [0, 1)."""
        cells: List[Cell] = values["cells"]
        if not cells:
            raise ValueError("at least one cell is required")
        for current, following in zip(cells, cells[1:]):
            if abs(current.right - following.left) > 1e-15:
                raise ValueError("cells must be contiguous and ordered")
        if abs(cells[-1].right - 1) > 1e-15:
            raise ValueError("cells must reach 1")
        if values["harmonic_tail"]:
            first = 1 / cells[0].left if cells[0].left > 0 else math.inf
            if not math.isfinite(first) or abs(first - round(first)) > 1e-9:
                raise ValueError("harmonic tail needs a first cell at 1/(N+1)")
        elif cells[0].left != 0:
            raise ValueError("cells must start at 0")
        return values

    @property
    def tail_start(self) -> int:
        """Label of the first harmonic tail cell (0 without a tail)."""
        if not self.harmonic_tail:
            return 0
        return int(round(1 / self.cells[0].left))

    def count_cells(self) -> float:
        """Number of cells; infinite with a harmonic tail."""
        return math.inf if self.harmonic_tail else float(len(self.cells))

    def locate(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Return `(prefix index, label)` of the cells containing `x`.

        Prefix index is -1 for harmonic tail cells.
        """
        x = np.asarray(x, dtype=float)
        lefts = np.array([cell.left for cell in self.cells])
        labels = np.array([cell.label for cell in self.cells])
        index = np.clip(np.searchsorted(lefts, x, side="right") - 1, 0, None)
        label = labels[index]
        if self.harmonic_tail:
            in_tail = x < lefts[0]
            with np.errstate(divide="ignore"):
                tail_label = np.floor(1 / np.where(x > 0, x, 1.0))
            tail_label = np.where(tail_label * x >= 1, tail_label - 1, tail_label)
            tail_label = np.maximum(tail_label, self.tail_start)
            index = np.where(in_tail, -1, index)
            label = np.where(in_tail, tail_label.astype(np.int64), label)
        return index, label

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Apply the map once, elementwise."""
        x = np.asarray(x, dtype=float)
        index, label = self.locate(x)
        lefts = np.array([cell.left for cell in self.cells])
        slopes = np.array([cell.slope for cell in self.cells])
        safe = np.clip(index, 0, None)
        left = np.where(index >= 0, lefts[safe], 1 / (label + 1.0))
        slope = np.where(index >= 0, slopes[safe], label * (label + 1.0))
        image = slope * (x - left)
        if self.harmonic_tail:
            image = np.where(x > 0, image, 0.0)
        return np.clip(image, 0.0, np.nextafter(1.0, 0.0))


class StepObservable(BaseModel):
    """Observable constant on each cell of a `PiecewiseMapSpec`.

    Args:
        values: Values on the prefix cells, in cell order.
        tail_power: Value `n ** tail_power` on harmonic tail cell `n`.
    """

    values: List[float]
    tail_power: Optional[float] = None

    @validator("values", each_item=True)
    def non_negative(cls, value: float) -> float:  # pylint: disable=no-self-argument
        """Ensure non-negative, finite values."""
        if not 0 <= value < math.inf:
            raise ValueError("observable values must be non-negative and finite")
        return value

    @validator("tail_power")
    def tail_power_positive(  # pylint: disable=no-self-argument
        cls,
        value: Optional[float],
    ) -> Optional[float]:
        """Ensure that tail values increase with the label."""
        if value is not None and not value > 0:
            raise ValueError("tail_power must be positive")
        return value

    def evaluate(self, index: np.ndarray, label: np.ndarray) -> np.ndarray:
        """Evaluate on cells given by `PiecewiseMapSpec.locate()`."""
        values = np.asarray(self.values, dtype=float)
        safe = np.clip(index, 0, None)
        if self.tail_power is None:
            if np.any(index < 0):
                raise DomainError("observable undefined on harmonic tail cells")
            return values[safe]
        tail = np.asarray(label, dtype=float) ** self.tail_power
        return np.where(index >= 0, values[safe], tail)


class _Process(BaseModel):
    """Base class of process variants."""

    class Config:
        """Model configuration."""

        allow_mutation = False

    def marginal_law(self) -> Union[RegVaryingTail, LatticeDigitTail]:
        """Exact marginal law of one value."""
        raise NotImplementedError

    def norming_law(self) -> RegVaryingTail:
        """Regularly varying tail whose `(alpha, L)` enter the norming."""
        raise NotImplementedError

    def canonical_json(self) -> str:
        """Canonical JSON representation."""
        return self.json(sort_keys=True, separators=(",", ":"))


class IidRegVarying(_Process):
    """I.i.d. values with a regularly varying tail.

    Args:
        tail: Marginal tail law.
    """

    kind: Literal["iid"] = "iid"
    tail: RegVaryingTail

    def marginal_law(self) -> RegVaryingTail:
        return self.tail

    def norming_law(self) -> RegVaryingTail:
        return self.tail


class LurothStep(_Process):
    """Step observable `d ** (1/alpha)` of the digits of a Lueroth-type map.

    Args:
        alpha: Tail index in (0, 1).
    """

    kind: Literal["luroth"] = "luroth"
    alpha: float

    @validator("alpha")
    def alpha_in_unit_interval(  # pylint: disable=no-self-argument
        cls,
        value: float,
    ) -> float:
        """Ensure that `alpha` lies in (0, 1)."""
        if not 0 < value < 1:
            raise ValueError("alpha must be in (0,1)")
        return value

    def marginal_law(self) -> LatticeDigitTail:
        return LatticeDigitTail(alpha=self.alpha)

    def norming_law(self) -> RegVaryingTail:
        return RegVaryingTail(alpha=self.alpha, L=ConstantL(c=1.0))


class DoublingPareto(_Process):
    """Observable `x ** -gamma` along doubling-map orbits.

    Args:
        gamma: Exponent, greater than 1.
        window_bits: Bits read after the first 1-bit of a point.
        max_window_bits: Leading zeros tolerated before a precision overflow.
    """

    kind: Literal["doubling_pareto"] = "doubling_pareto"
    gamma: float
    window_bits: int = 64
    max_window_bits: int = 512

    @validator("gamma")
    def gamma_above_one(cls, value: float) -> float:  # pylint: disable=no-self-argument
        """Ensure `gamma > 1`."""
        if not value > 1:
            raise ValueError("gamma must be greater than 1")
        return value

    @root_validator(skip_on_failure=True)
    def window_bounds(cls, values):  # pylint: disable=no-self-argument
        """Ensure `1 <= window_bits <= max_window_bits <= 1024`."""
        if not 1 <= values["window_bits"] <= values["max_window_bits"] <= WINDOW_LIMIT:
            raise ValueError(
                f"need 1 <= window_bits <= max_window_bits <= {WINDOW_LIMIT}"
            )
        return values

    def marginal_law(self) -> RegVaryingTail:
        return RegVaryingTail(alpha=1 / self.gamma, L=ConstantL(c=1.0))

    def norming_law(self) -> RegVaryingTail:
        return self.marginal_law()


class FloatOrbit(_Process):
    """Step observable along a floating-point orbit (diagnostic only).

    Args:
        map: Interval map.
        observable: Step observable on the cells of `map`.
        burn_in: Steps discarded before the first observed value.
    """

    kind: Literal["float_orbit"] = "float_orbit"
    map: PiecewiseMapSpec
    observable: StepObservable
    burn_in: int = 1000

    @root_validator(skip_on_failure=True)
    def observable_matches(cls, values):  # pylint: disable=no-self-argument
        """Ensure one observable value per prefix cell."""
        if len(values["observable"].values) != len(values["map"].cells):
            raise ValueError("observable needs one value per cell")
        if values["map"].harmonic_tail and values["observable"].tail_power is None:
            raise ValueError("observable needs tail_power for a harmonic tail")
        return values

    def marginal_law(self) -> RegVaryingTail:
        raise DomainError("float orbits have no known marginal law")

    def norming_law(self) -> RegVaryingTail:
        raise DomainError("float orbits have no known marginal law")


ProcessSpec = Union[IidRegVarying, LurothStep, DoublingPareto, FloatOrbit]


class SamplePath(BaseModel):
    """Generated values of a process.

    Args:
        values: Non-negative values, in time order.
        seed: Master seed of the stream.
        stream: Stream key below the master seed.
        spec: Generating process.
    """

    values: np.ndarray
    seed: int
    stream: SeedKey = ()
    spec: ProcessSpec

    class Config:
        """Model configuration."""

        arbitrary_types_allowed = True

    def __len__(self) -> int:
        return int(self.values.shape[0])


class CheckStatus(str, Enum):
    """Outcome of a single condition check."""

    PASS = "pass"
    FAIL = "fail"
    NOT_VERIFIED = "not_verified"


class ConditionCheck(BaseModel):
    """Outcome of one checkable condition on an interval map.

    Args:
        name: Condition name.
        status: Outcome.
        witness: Human-readable evidence for the outcome.
    """

    name: str
    status: CheckStatus
    witness: str


class ConditionReport(BaseModel):
    """Outcomes of all condition checks on a map and observable.

    Args:
        checks: Individual outcomes, in evaluation order.
    """

    checks: List[ConditionCheck]

    @property
    def passed(self) -> bool:
        """Whether no check failed; unverified checks do not count as failures."""
        return all(check.status != CheckStatus.FAIL for check in self.checks)

    def failed(self) -> List[str]:
        """Names of failed checks."""
        return [c.name for c in self.checks if c.status == CheckStatus.FAIL]

    def status_of(self, name: str) -> CheckStatus:
        """Status of the check called `name`."""
        for check in self.checks:
            if check.name == name:
                return check.status
        raise KeyError(name)


class TailCheckRow(BaseModel):
    """Empirical against exact exceedance probability at one level.

    Args:
        x: Level.
        exact: Exact tail probability.
        empirical: Relative frequency of values above `x`.
        standard_error: Binomial standard error under the exact law.
        z: Standardised deviation; 0 when both probabilities vanish.
    """

    x: float
    exact: float
    empirical: float
    standard_error: float
    z: float


class TailCheckReport(BaseModel):
    """Marginal law diagnostic of a sample path.

    Args:
        rows: One row per level.
        max_deviation: Largest absolute deviation `|empirical - exact|`.
        sample_size: Number of values checked.
    """

    rows: List[TailCheckRow]
    max_deviation: float
    sample_size: int


def marginal_tail(spec: ProcessSpec) -> Union[RegVaryingTail, LatticeDigitTail]:
    """Return the exact marginal law of a process.

    Raises:
        trimlab.exceptions.DomainError: The law is unknown (float orbits).
    """
    return spec.marginal_law()
