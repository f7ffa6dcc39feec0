"""MIMO-PI controller and fixed-step RK4 simulation of the closed loop.

The simulator integrates the augmented state ``(x, z)`` where ``z`` is the
running integral of the tracking error ``e = x_ref - x``::

    x' = f(x, u) + d(t)
    z' = e
    u  = K_P e + K_I z

Disturbances are evaluated at the RK4 stage times. Samples are recorded every
``stride`` integrator steps.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionError, DomainError, ParameterError
from .indicators import GainPair
from .plants import PlantModel, SinusoidDisturbance

__all__ = [
    "PIState",
    "pi_step",
    "SimConfig",
    "SimulationTrace",
    "simulate",
    "input_rate_series",
    "bumpless_integral",
    "closed_loop_field",
    "velocity_form_jacobian",
]


@dataclass(frozen=True)
class PIState:
    gains: GainPair
    integral: np.ndarray
    last_output: np.ndarray

    @classmethod
    def initial(cls, gains: GainPair, integral=None) -> "PIState":
        m, n = gains.shape
        z = np.zeros(n) if integral is None else np.asarray(integral, dtype=float)
        if z.shape != (n,):
            raise DimensionError(f"integral accumulator must have length {n}")
        return cls(gains, z, gains.kp @ np.zeros(n) + gains.ki @ z)


def pi_step(state: PIState, error, dt: float) -> tuple[PIState, np.ndarray]:
    """One discrete controller update with rectangle-rule integration."""
    if not dt > 0:
        raise ParameterError("dt must be positive")
    e = np.asarray(error, dtype=float)
    if e.shape != state.integral.shape:
        raise DimensionError(f"error must have length {state.integral.size}")
    z = state.integral + e * dt
    u = state.gains.kp @ e + state.gains.ki @ z
    return PIState(state.gains, z, u), u


@dataclass(frozen=True)
class SimConfig:
    t_end: float = 20.0
    step: float = 0.01
    stride: int = 10
    clip_inputs: bool = False

    def __post_init__(self):
        if not 0 < self.step <= 0.1:
            raise ParameterError("integrator step must lie in (0, 0.1]")
        if not self.t_end > 0:
            raise ParameterError("t_end must be positive")
        if int(self.stride) != self.stride or self.stride < 1:
            raise ParameterError("stride must be a positive integer")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.step))

    @property
    def dt_out(self) -> float:
        return self.step * self.stride


@dataclass
class SimulationTrace:
    t: np.ndarray
    x: np.ndarray
    e: np.ndarray
    u: np.ndarray
    udot: np.ndarray
    d: np.ndarray
    edot: np.ndarray
    state_names: tuple[str, ...] = ()
    input_names: tuple[str, ...] = ()
    violations: list[tuple[float, str, str]] = field(default_factory=list)
    error: str | None = None
    truncated_at: float | None = None

    def __len__(self) -> int:
        return len(self.t)

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    def columns(self) -> list[str]:
        n, m = self.x.shape[1], self.u.shape[1]
        return (["t"] + [f"x_{i + 1}" for i in range(n)] + [f"e_{i + 1}" for i in range(n)]
                + [f"u_{i + 1}" for i in range(m)] + [f"udot_{i + 1}" for i in range(m)]
                + [f"d_{i + 1}" for i in range(n)])

    def table(self) -> np.ndarray:
        return np.column_stack([self.t, self.x, self.e, self.u, self.udot, self.d])

    def to_csv(self, path=None) -> str:
        """Write ``t, x_*, e_*, u_*, udot_*, d_*`` with one header row."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns())
        for row in self.table():
            w.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def input_rate_series(u, dt: float) -> np.ndarray:
    """First differences of ``u`` on a uniform grid, first sample copied from the second."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if len(u) < 2:
        raise DimensionError("need at least two samples for a rate series")
    r = np.empty_like(u)
    r[1:] = np.diff(u, axis=0) / dt
    r[0] = r[1]
    return r


def bumpless_integral(gains: GainPair, e0, u0) -> np.ndarray:
    """Integrator state that makes ``K_P e0 + K_I z = u0`` (least squares if singular)."""
    rhs = np.asarray(u0, dtype=float) - gains.kp @ np.asarray(e0, dtype=float)
    return np.linalg.lstsq(gains.ki, rhs, rcond=None)[0]


def _control(gains: GainPair, e, z, box, clip: bool):
    u = gains.kp @ e + gains.ki @ z
    if clip and box is not None:
        u = np.clip(u, box[0], box[1])
    return u


def _check_dims(plant: PlantModel, gains: GainPair, disturbance: SinusoidDisturbance, *vecs):
    if gains.shape != (plant.m, plant.n):
        raise DimensionError(f"gains must be {(plant.m, plant.n)} for plant {plant.name}")
    if disturbance.n != plant.n:
        raise DimensionError(f"disturbance needs {plant.n} channels")
    for v in vecs:
        if v is not None and np.shape(v) != (plant.n,):
            raise DimensionError(f"vector of length {plant.n} expected, got shape {np.shape(v)}")


def simulate(plant: PlantModel, gains: GainPair, disturbance: SinusoidDisturbance,
             reference, x0, cfg: SimConfig | None = None, u0=None) -> SimulationTrace:
    """Integrate the PI closed loop with classic RK4.

    Parameters
    ----------
    reference, x0 : (n,) array_like
        Constant setpoint and initial plant state.
    u0 : (m,) array_like, optional
        Initial input. When given, the integrator state starts at
        :func:`bumpless_integral` so the first command equals `u0`;
        otherwise it starts at zero.

    A :class:`DomainError` raised by the plant ends the run early; the trace
    then holds the samples recorded so far with ``error`` and
    ``truncated_at`` set.
    """
    cfg = cfg or SimConfig()
    ref = np.asarray(reference, dtype=float)
    x = np.asarray(x0, dtype=float).copy()
    _check_dims(plant, gains, disturbance, ref, x)
    e0 = ref - x
    if u0 is not None and plant.m:
        z = bumpless_integral(gains, e0, u0)
    else:
        z = np.zeros(plant.n)
    box = plant.input_box
    h = cfg.step
    n = plant.n

    def field_(t, s):
        xs, zs = s[:n], s[n:]
        e = ref - xs
        u = _control(gains, e, zs, box, cfg.clip_inputs)
        return np.concatenate([plant.dynamics(xs, u) + disturbance(t), e])

    def sample(t, s):
        xs, zs = s[:n], s[n:]
        e = ref - xs
        u = _control(gains, e, zs, box, cfg.clip_inputs)
        d = disturbance(t)
        return xs.copy(), e, u, d, -(plant.dynamics(xs, u) + d)

    rows = []
    s = np.concatenate([x, z])
    error = None
    truncated_at = None
    t = 0.0
    try:
        rows.append((0.0,) + sample(0.0, s))
        for k in range(cfg.n_steps):
            t = k * h
            k1 = field_(t, s)
            k2 = field_(t + h / 2, s + (h / 2) * k1)
            k3 = field_(t + h / 2, s + (h / 2) * k2)
            k4 = field_(t + h, s + h * k3)
            s = s + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(s)):
                raise DomainError(f"state became non-finite at t={t + h:.4f}")
            if (k + 1) % cfg.stride == 0:
                tk = (k + 1) * h
                rows.append((tk,) + sample(tk, s))
    except DomainError as exc:
        error = str(exc)
        truncated_at = float(t)

    t_arr = np.array([r[0] for r in rows])
    stack = lambda i, width: np.array([r[i] for r in rows]).reshape(len(rows), width)
    u_arr = stack(3, plant.m)
    trace = SimulationTrace(
        t=t_arr,
        x=stack(1, n),
        e=stack(2, n),
        u=u_arr,
        udot=input_rate_series(u_arr, cfg.dt_out) if len(rows) >= 2 else np.zeros_like(u_arr),
        d=stack(4, n),
        edot=stack(5, n),
        state_names=plant.state_names,
        input_names=plant.input_names,
        error=error,
        truncated_at=truncated_at,
    )
    trace.violations = _log_violations(trace, plant)
    return trace


def _log_violations(trace: SimulationTrace, plant: PlantModel, tol: float = 1e-12):
    log = []
    names = plant.input_names or tuple(f"u{i + 1}" for i in range(plant.m))
    for kind, series, box in (("magnitude", trace.u, plant.input_box),
                              ("rate", trace.udot, plant.rate_box)):
        if box is None:
            continue
        lo, hi = box
        bad = (series < lo - tol) | (series > hi + tol)
        for k, j in zip(*np.nonzero(bad)):
            log.append((float(trace.t[k]), names[j], kind))
    log.sort()
    return log


def closed_loop_field(plant: PlantModel, gains: GainPair, reference=None):
    """Undisturbed vector field of the loop in error coordinates ``(e, z)``.

    ``e' = -f(x_ref - e, K_P e + K_I z)``, ``z' = e``; the same field the
    simulator integrates, rewritten in terms of the error.
    """
    ref = plant.equilibrium_state if reference is None else np.asarray(reference, dtype=float)
    n = plant.n

    def field_(s):
        e, z = s[:n], s[n:]
        u = gains.kp @ e + gains.ki @ z
        return np.concatenate([-plant.dynamics(ref - e, u), e])

    return field_


def velocity_form_jacobian(plant: PlantModel, gains: GainPair, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of the closed loop at its equilibrium.

    The equilibrium is ``e = 0`` with the integrator holding the trim input.
    Because ``(e', e) = J (e, z)`` for the linearization ``J``, this matrix is
    also the Jacobian of the velocity-form system on ``(e', e)`` and should
    equal ``A_K(0)`` built from :meth:`PlantModel.error_linearization`.
    """
    _check_dims(plant, gains, SinusoidDisturbance.zero(plant.n))
    n = plant.n
    z_eq = bumpless_integral(gains, np.zeros(n), plant.equilibrium_input) if plant.m else np.zeros(n)
    s0 = np.concatenate([np.zeros(n), z_eq])
    f = closed_loop_field(plant, gains)
    jac = np.zeros((2 * n, 2 * n))
    for j in range(2 * n):
        ds = np.zeros(2 * n)
        ds[j] = h
        jac[:, j] = (f(s0 + ds) - f(s0 - ds)) / (2 * h)
    return jac

