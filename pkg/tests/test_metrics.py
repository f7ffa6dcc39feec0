import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustpi.errors import DimensionError
from robustpi.metrics import (
    MetricsReport,
    composite_norm,
    itae,
    metrics_report,
    peak_and_overshoot,
    settled_stats,
)

T = np.linspace(0.0, 20.0, 201)


def test_itae_constant():
    # (1/T) * int_0^T t c dt = c T / 2
    assert itae(np.full_like(T, 0.3), T) == pytest.approx(0.3 * 20.0 / 2)


def test_itae_exponential():
    # int_0^inf t e^{-t} dt = 1
    t = np.linspace(0.0, 40.0, 40001)
    assert itae(np.exp(-t), t) == pytest.approx(1.0 / 40.0, rel=1e-6)


@settings(max_examples=50, deadline=None)
@given(st.floats(-5, 5), st.floats(0.1, 3))
def test_itae_sign_invariant_and_homogeneous(c, k):
    e = np.sin(T) + c
    assert itae(-e, T) == pytest.approx(itae(e, T))
    assert itae(k * e, T) == pytest.approx(k * itae(e, T))


def test_overshoot_damped_oscillation():
    e = -np.exp(-0.5 * T) * np.cos(2.0 * T)
    pt, mo = peak_and_overshoot(e, T)
    k = np.argmax(e)
    assert pt == pytest.approx(T[k])
    assert mo == pytest.approx(e[k])


def test_no_overshoot_monotone():
    e = np.exp(-T)
    pt, mo = peak_and_overshoot(e, T)
    assert mo == 0.0
    assert pt == T[-1]


def test_settled_stats_window():
    y = np.where(T >= 15.0, 2.0 + np.cos(50 * T), 100.0)
    ms, st_ = settled_stats(y, T)
    w = y[T >= 15.0]
    assert ms == pytest.approx(w.mean())
    assert st_ == pytest.approx(w.std())


def test_composite():
    np.testing.assert_allclose(composite_norm([3.0, 0.0], [4.0, -2.0]), [5.0, 2.0])


def test_grid_mismatch():
    with pytest.raises(DimensionError):
        itae(np.zeros(3), np.zeros(4))


class _Trace:
    t = T
    e = np.column_stack([np.exp(-T), -np.exp(-T) * np.cos(T)])
    edot = np.column_stack([-np.exp(-T), np.exp(-T) * (np.cos(T) + np.sin(T))])
    state_names = ("a", "b")


def test_report_json_round_trip():
    rep = metrics_report(_Trace())
    assert rep["e_a"] is rep[0]
    d = json.loads(rep.to_json())
    assert set(d) >= {"e_a_itae", "e_b_max_overshoot", "e_b_composite_std_settled"}
    assert MetricsReport.from_dict(d, ["e_a", "e_b"]) == rep
