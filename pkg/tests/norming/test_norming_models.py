"""Unit tests for trimming schedules and norming tables."""

import logging

from pydantic import ValidationError
import pytest

from trimlab.exceptions import ScheduleError
from trimlab.norming.models import (
    CSV_HEADER,
    ExplicitSchedule,
    NormingRow,
    NormingTable,
    PowerRule,
    parse_schedule,
)

ROW = NormingRow(
    n=10000,
    b=100,
    zeta=21.5,
    g=16245.6,
    d=1e6,
    ratio_dg_over_ab=0.6156,
    truncation_asymptotic=1.27e6,
)


def test_power_rule_counts():
    """Test ceiling of `n ** theta`, exact powers included."""
    rule = PowerRule(theta=0.5)
    assert rule.b(10000) == 100
    assert rule.b(10001) == 101
    assert PowerRule(theta=0.7).b(1000) == 126


def test_power_rule_theta_range():
    """Test that `theta` outside (0, 1) is rejected."""
    with pytest.raises(ValidationError):
        PowerRule(theta=1.0)
    with pytest.raises(ValidationError):
        PowerRule(theta=0.0)


def test_explicit_schedule_lookup():
    """Test table lookup and missing checkpoints."""
    schedule = ExplicitSchedule(table={1000: 8, 10000: 30})
    assert schedule.b(10000) == 30
    with pytest.raises(ScheduleError) as info:
        schedule.b(500)
    assert info.value.n == 500


def test_parse_schedule_power():
    """Test parsing of a power rule."""
    schedule = parse_schedule("pow:0.7")
    assert isinstance(schedule, PowerRule)
    assert schedule.theta == 0.7
    assert schedule.spec_string() == "pow:0.7"


def test_parse_schedule_explicit():
    """Test parsing of an explicit table, scientific notation included."""
    schedule = parse_schedule("explicit:1e4=30,1000=8")
    assert isinstance(schedule, ExplicitSchedule)
    assert schedule.table == {1000: 8, 10000: 30}
    assert schedule.spec_string() == "explicit:1000=8,10000=30"


@pytest.mark.parametrize(
    "text", ["pow:", "pow:1.5", "explicit:1000", "explicit:10.5=3", "log:2"]
)
def test_parse_schedule_invalid(text):
    """Test that malformed schedules are rejected."""
    with pytest.raises(ValueError):
        parse_schedule(text)


def test_check_grid_counts():
    """Test trimming counts returned along a grid."""
    assert PowerRule(theta=0.5).check_grid([100, 10000]) == [10, 100]


def test_check_grid_zero_count():
    """Test that a zero trimming count is rejected with its checkpoint."""
    schedule = ExplicitSchedule(table={100: 0, 1000: 5})
    with pytest.raises(ScheduleError) as info:
        schedule.check_grid([100, 1000])
    assert info.value.n == 100


def test_check_grid_count_not_below_n():
    """Test that `b_n >= n` is rejected."""
    schedule = ExplicitSchedule(table={10: 10})
    with pytest.raises(ScheduleError):
        schedule.check_grid([10])


def test_check_grid_warns_on_flat_counts(caplog):
    """Test warnings for a schedule that does not grow."""
    schedule = ExplicitSchedule(table={100: 5, 1000: 5})
    with caplog.at_level(logging.WARNING):
        schedule.check_grid([100, 1000])
    assert "do not grow" in caplog.text


def test_check_grid_warns_on_growing_fraction(caplog):
    """Test warnings for a trimmed fraction that does not decrease."""
    schedule = ExplicitSchedule(table={100: 2, 1000: 50})
    with caplog.at_level(logging.WARNING):
        schedule.check_grid([100, 1000])
    assert "does not decrease" in caplog.text


def test_norming_row_csv_cells():
    """Test that CSV cells follow the header."""
    assert len(ROW.csv_row()) == len(CSV_HEADER)
    assert ROW.csv_row()[:2] == (10000, 100)


def test_norming_table_row_lookup():
    """Test lookup of a row by checkpoint."""
    table = NormingTable(rows=[ROW])
    assert table.row(10000).d == 1e6
    with pytest.raises(KeyError):
        table.row(1)
