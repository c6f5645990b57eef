import math

import pytest
from hypothesis import given, settings, strategies as st

from seqaug.errors import ConfigError
from seqaug.schedule import CosineRestarts

SCHED = CosineRestarts(lr0=0.01, t0=1, t_mult=2)


def test_restart_value_is_exact():
    for cycle in range(8):
        assert SCHED.lr_at(0.0, cycle) == 0.01


def test_cycle_end_value_is_exact_zero():
    for cycle in range(8):
        assert SCHED.lr_at(1.0, cycle) == 0.0


def test_cycle_boundaries_over_128_epochs():
    assert SCHED.cycle_end_epochs(128) == [1, 3, 7, 15, 31, 63, 127]
    assert SCHED.restart_epochs(128) == [0, 1, 3, 7, 15, 31, 63, 127]


def test_cycle_lengths_are_geometric():
    for cycle in range(7):
        start = SCHED.restart_epochs(128)[cycle]
        assert SCHED.cycle_of(start) == (cycle, 0, 2**cycle)


def test_epoch_lr_at_restarts_is_lr0():
    for epoch in (0, 1, 3, 7, 15, 31, 63, 127):
        assert SCHED.epoch_lr(epoch) == 0.01


def test_midpoint_is_half():
    # fraction 0.5 -> eta_min + (lr0 - eta_min) * (1 + cos(pi/2)) / 2
    assert SCHED.lr_at(0.5, 0) == pytest.approx(0.005)


def test_halfway_formula_oracle():
    sched = CosineRestarts(lr0=0.2, t0=1, t_mult=2, eta_min=0.02)
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        want = 0.02 + 0.5 * (0.2 - 0.02) * (1 + math.cos(math.pi * frac))
        assert sched.lr_at(frac, 3) == pytest.approx(want, abs=0.0)


def test_monotone_within_cycle():
    lrs = [SCHED.lr_at(f / 100, 5) for f in range(101)]
    assert all(a >= b for a, b in zip(lrs, lrs[1:]))


def test_epoch_lr_trace_cycle_structure():
    # cycle 2 spans epochs 3..6; fractions 0/4, 1/4, 2/4, 3/4
    for offset in range(4):
        want = SCHED.lr_at(offset / 4, 2)
        assert SCHED.epoch_lr(3 + offset) == want


def test_t_mult_one_keeps_constant_cycles():
    sched = CosineRestarts(lr0=0.01, t0=3, t_mult=1)
    assert sched.cycle_end_epochs(12) == [3, 6, 9, 12]
    assert sched.cycle_of(7) == (2, 1, 3)


def test_cycle_of_consistency():
    for epoch in range(200):
        cycle, within, length = SCHED.cycle_of(epoch)
        assert 0 <= within < length
        assert length == 2**cycle
        start = sum(2**c for c in range(cycle))
        assert start + within == epoch


def test_validation():
    with pytest.raises(ConfigError):
        CosineRestarts(lr0=0.0)
    with pytest.raises(ConfigError):
        CosineRestarts(lr0=0.01, t0=0)
    with pytest.raises(ConfigError):
        CosineRestarts(lr0=0.01, t_mult=0)
    with pytest.raises(ConfigError):
        CosineRestarts(lr0=0.01, eta_min=-0.1)
    with pytest.raises(ConfigError):
        CosineRestarts(lr0=0.01, eta_min=0.02)


@given(
    frac=st.floats(min_value=0.0, max_value=1.0),
    cycle=st.integers(min_value=0, max_value=10),
)
@settings(max_examples=200)
def test_lr_bounded(frac, cycle):
    lr = SCHED.lr_at(frac, cycle)
    assert 0.0 <= lr <= 0.01


def test_fraction_outside_unit_rejected():
    with pytest.raises(ConfigError):
        SCHED.lr_at(-0.01, 0)
    with pytest.raises(ConfigError):
        SCHED.lr_at(1.01, 0)
