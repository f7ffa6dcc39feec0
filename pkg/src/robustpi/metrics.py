"""Response metrics over simulation traces.

All metrics treat the error as settling toward zero: the final value is 0,
overshoot means crossing past zero, and the settled window is the last
quarter of the horizon.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DimensionError

__all__ = [
    "itae",
    "peak_and_overshoot",
    "settled_stats",
    "composite_norm",
    "ChannelMetrics",
    "MetricsReport",
    "metrics_report",
]


def _grid(series, t) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(series, dtype=float)
    t = np.asarray(t, dtype=float)
    if y.shape != t.shape:
        raise DimensionError(f"series {y.shape} and grid {t.shape} differ")
    return y, t


def itae(error, t) -> float:
    """Time-averaged ITAE, ``(1/T) * integral of t |e(t)| dt`` by the trapezoid rule."""
    e, t = _grid(error, t)
    span = t[-1] - t[0]
    if span <= 0:
        raise DimensionError("grid must span a positive interval")
    return float(np.trapezoid(t * np.abs(e), t) / span)


def peak_and_overshoot(error, t) -> tuple[float, float]:
    """Peak time and maximum overshoot past zero.

    For an error starting at ``e(0)``, overshoot is the largest value of
    ``-e(t) * sign(e(0))``, floored at zero. When the error never crosses
    zero the overshoot is 0 and the peak time is where ``|e|`` is smallest.
    """
    e, t = _grid(error, t)
    if len(e) < 2:
        raise DimensionError("need at least two samples")
    sign = np.sign(e[0]) or 1.0
    past = -e * sign
    k = int(np.argmax(past))
    if past[k] > 0:
        return float(t[k]), float(past[k])
    return float(t[int(np.argmin(np.abs(e)))]), 0.0


def settled_stats(series, t) -> tuple[float, float]:
    """Mean and population standard deviation over ``t >= 0.75 * t_end``."""
    y, t = _grid(series, t)
    if len(y) < 4:
        raise DimensionError("need at least four samples")
    w = y[t >= 0.75 * t[-1]]
    return float(np.mean(w)), float(np.std(w))


def composite_norm(e, edot) -> np.ndarray:
    """Pointwise ``sqrt(e^2 + e'^2)``."""
    return np.hypot(np.asarray(e, dtype=float), np.asarray(edot, dtype=float))


@dataclass(frozen=True)
class ChannelMetrics:
    channel: str
    itae: float
    peak_time: float
    max_overshoot: float
    mean_settled: float
    std_settled: float
    composite_mean_settled: float
    composite_std_settled: float


@dataclass(frozen=True)
class MetricsReport:
    channels: tuple[ChannelMetrics, ...]

    def __getitem__(self, key) -> ChannelMetrics:
        if isinstance(key, int):
            return self.channels[key]
        for c in self.channels:
            if c.channel == key:
                return c
        raise KeyError(key)

    def to_dict(self) -> dict:
        """Flat mapping ``<channel>_<field>`` -> value."""
        out = {}
        for c in self.channels:
            for k, v in asdict(c).items():
                if k != "channel":
                    out[f"{c.channel}_{k}"] = v
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict, channels) -> "MetricsReport":
        fields = [f for f in ChannelMetrics.__dataclass_fields__ if f != "channel"]
        return cls(tuple(ChannelMetrics(ch, *(d[f"{ch}_{f}"] for f in fields)) for ch in channels))


def metrics_report(trace, names=None) -> MetricsReport:
    """Metrics for every error channel of a trace.

    The composite statistics use ``s = sqrt(e^2 + e'^2)`` with the exact error
    rate recorded by the simulator.
    """
    n = trace.e.shape[1]
    names = names or [f"e_{s}" for s in trace.state_names] or [f"e_{i + 1}" for i in range(n)]
    out = []
    for j in range(n):
        e = trace.e[:, j]
        pt, mo = peak_and_overshoot(e, trace.t)
        ms, st = settled_stats(e, trace.t)
        cms, cst = settled_stats(composite_norm(e, trace.edot[:, j]), trace.t)
        out.append(ChannelMetrics(names[j], itae(e, trace.t), pt, mo, ms, st, cms, cst))
    return MetricsReport(tuple(out))
