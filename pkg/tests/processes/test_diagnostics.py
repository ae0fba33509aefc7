"""Unit tests for map condition checks and marginal-law diagnostics."""

import numpy as np
import pytest

from trimlab.exceptions import DomainError, InsufficientDataError
from trimlab.processes.diagnostics import (
    empirical_tail_check,
    validate_example_conditions,
)
from trimlab.processes.generators import sample_path
from trimlab.processes.maps import canonical_luroth_map, canonical_observable
from trimlab.processes.models import (
    Cell,
    CheckStatus,
    IidRegVarying,
    LurothStep,
    PiecewiseMapSpec,
    StepObservable,
)
from trimlab.regvar.models import LatticeDigitTail, RegVaryingTail

SEED = 11
ALPHA = 0.5
PARETO = RegVaryingTail(alpha=ALPHA)
LUROTH_MAP = canonical_luroth_map(prefix=16)
LUROTH_CHI = canonical_observable(LUROTH_MAP, ALPHA)
CHECK_NAMES = [
    "adler",
    "finite_image",
    "uniform_expansion",
    "variation_truncated",
    "variation_indicator",
    "topological_mixing",
]


def _quarter_map() -> PiecewiseMapSpec:
    return PiecewiseMapSpec(
        cells=[
            Cell(left=i / 4, right=(i + 1) / 4, slope=4.0, label=i)
            for i in range(4)
        ],
        expansion_floor=4.0,
    )


def test_canonical_map_passes():
    """Test that the canonical map and observable pass every check."""
    report = validate_example_conditions(LUROTH_MAP, LUROTH_CHI, k_bound=4.0)
    assert [check.name for check in report.checks] == CHECK_NAMES
    assert all(check.status == CheckStatus.PASS for check in report.checks)
    assert report.passed
    assert "full-branch" in report.checks[-1].witness


def test_finite_image_by_construction():
    """Test that the image check names the cells it rests on."""
    observable = StepObservable(values=[1.0, 2.0, 3.0, 4.0])
    check = validate_example_conditions(_quarter_map(), observable, 2.0).checks[1]
    assert check.name == "finite_image"
    assert check.status == CheckStatus.PASS
    assert check.witness == "holds by construction: 4 listed cells"
    tail = validate_example_conditions(LUROTH_MAP, LUROTH_CHI, 4.0).checks[1].witness
    assert tail.endswith("listed cells and full-branch tail cells")


def test_canonical_map_variation_ratio():
    """Test that the truncation variation is `2 l` for the canonical case."""
    report = validate_example_conditions(LUROTH_MAP, LUROTH_CHI, k_bound=2.0)
    assert report.status_of("variation_truncated") == CheckStatus.PASS
    assert "max V/l = 2 " in report.checks[3].witness
    report = validate_example_conditions(LUROTH_MAP, LUROTH_CHI, k_bound=1.5)
    assert report.status_of("variation_truncated") == CheckStatus.FAIL


def test_slope_mutant_fails_expansion_only():
    """Test that a slope-0.5 mutant fails exactly the expansion check."""
    cells = list(LUROTH_MAP.cells)
    weak = cells[-1]
    cells[-1] = Cell(left=weak.left, right=weak.right, slope=0.5, label=weak.label)
    mutant = PiecewiseMapSpec(cells=cells, harmonic_tail=True)
    report = validate_example_conditions(
        mutant, canonical_observable(mutant, ALPHA), k_bound=4.0
    )
    assert report.failed() == ["uniform_expansion"]
    assert report.status_of("topological_mixing") == CheckStatus.NOT_VERIFIED
    assert not report.passed


def test_oscillating_observable_fails_variation():
    """Test that an oscillating observable breaks both variation bounds."""
    observable = StepObservable(values=[1.0, 100.0, 1.0, 100.0])
    report = validate_example_conditions(_quarter_map(), observable, k_bound=2.0)
    assert report.failed() == ["variation_truncated", "variation_indicator"]


def test_zero_level():
    """Test that a level below all values gives the zero function."""
    observable = StepObservable(values=[5.0, 6.0, 7.0, 8.0])
    report = validate_example_conditions(_quarter_map(), observable, k_bound=2.0)
    assert report.status_of("variation_truncated") == CheckStatus.PASS


def test_single_cell_rejected():
    """Test that maps need at least two cells."""
    single = PiecewiseMapSpec(cells=[Cell(left=0.0, right=1.0, slope=1.0, label=0)])
    with pytest.raises(DomainError):
        validate_example_conditions(single, StepObservable(values=[1.0]), 4.0)


def test_tail_check_constant_path():
    """Test that a constant path has no exceedances."""
    report = empirical_tail_check(np.ones(1000), PARETO, [2.0])
    assert report.rows[0].empirical == 0.0
    assert report.rows[0].exact == pytest.approx(2**-0.5)
    assert report.sample_size == 1000


def test_tail_check_short_path():
    """Test that short paths are rejected."""
    with pytest.raises(InsufficientDataError):
        empirical_tail_check(np.ones(999), PARETO, [2.0])


def test_tail_check_pareto():
    """Test the i.i.d. Pareto marginal at `x = 100`."""
    path = sample_path(IidRegVarying(tail=PARETO), 100_000, SEED)
    report = empirical_tail_check(path, PARETO, [2.0, 100.0])
    assert report.rows[1].exact == pytest.approx(0.1)
    assert all(abs(row.z) <= 4 for row in report.rows)


def test_tail_check_luroth():
    """Test the lattice marginal of the Lueroth steps at `x = 2`."""
    path = sample_path(LurothStep(alpha=ALPHA), 100_000, SEED)
    report = empirical_tail_check(path, LatticeDigitTail(alpha=ALPHA), [2.0, 10.0])
    assert report.rows[0].exact == 0.5
    assert all(abs(row.z) <= 4 for row in report.rows)
    assert report.max_deviation < 0.01
