"""Plant models: Duffing oscillator, fixed-wing guidance kinematics, toys.

A :class:`PlantModel` bundles ``dynamics(x, u)`` with analytic Jacobians and
an equilibrium. Models are immutable and their callables are pure, so a
single instance can be shared freely.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, DomainError, ParameterError
from .indicators import LinearizationPoint

Vector = np.ndarray
Dynamics = Callable[[np.ndarray, np.ndarray], np.ndarray]
JacobianFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

# roll angles at or beyond this make tan/sec blow up
_ROLL_LIMIT = math.pi / 2


@dataclass(frozen=True)
class PlantModel:
    name: str
    n: int
    m: int
    dynamics: Dynamics
    jac_x: JacobianFn
    jac_u: JacobianFn
    equilibrium_state: np.ndarray
    equilibrium_input: np.ndarray
    state_names: tuple[str, ...] = ()
    input_names: tuple[str, ...] = ()
    input_box: tuple[np.ndarray, np.ndarray] | None = None
    rate_box: tuple[np.ndarray, np.ndarray] | None = None
    params: dict = field(default_factory=dict)

    def __call__(self, x, u=None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        u = np.zeros(self.m) if u is None else np.asarray(u, dtype=float)
        if x.shape != (self.n,) or u.shape != (self.m,):
            raise DimensionError(
                f"{self.name}: expected x{(self.n,)}, u{(self.m,)}; got {x.shape}, {u.shape}")
        return self.dynamics(x, u)

    def jacobians(self, x=None, u=None) -> tuple[np.ndarray, np.ndarray]:
        x = self.equilibrium_state if x is None else np.asarray(x, dtype=float)
        u = self.equilibrium_input if u is None else np.asarray(u, dtype=float)
        return self.jac_x(x, u), self.jac_u(x, u)

    def linearization(self) -> LinearizationPoint:
        """Jacobians at the equilibrium, for a controller acting on the state itself."""
        jx, ju = self.jacobians()
        return LinearizationPoint(jx, ju)

    def error_linearization(self) -> LinearizationPoint:
        """Jacobians of the tracking error ``e = x_ref - x`` at the equilibrium.

        Since ``de/dt = -f(x_ref - e, u)``, the state block is unchanged and
        the input block flips sign.
        """
        jx, ju = self.jacobians()
        return LinearizationPoint(jx, -ju)


def fd_jacobians(plant: PlantModel, x, u=None, h: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference Jacobians of ``plant.dynamics`` at ``(x, u)``."""
    if h <= 0:
        raise ParameterError("step h must be positive")
    x = np.asarray(x, dtype=float)
    u = np.zeros(plant.m) if u is None else np.asarray(u, dtype=float)
    jx = np.zeros((plant.n, plant.n))
    ju = np.zeros((plant.n, plant.m))
    for j in range(plant.n):
        dx = np.zeros(plant.n)
        dx[j] = h
        jx[:, j] = (plant(x + dx, u) - plant(x - dx, u)) / (2 * h)
    for j in range(plant.m):
        du = np.zeros(plant.m)
        du[j] = h
        ju[:, j] = (plant(x, u + du) - plant(x, u - du)) / (2 * h)
    return jx, ju


# --------------------------------------------------------------------------
# Duffing oscillator


def duffing(alpha: float, beta: float, delta: float) -> PlantModel:
    """Unforced damped Duffing oscillator, ``x1' = x2``, ``x2' = -d x2 - a x1 - b x1^3``.

    Autonomous (``m = 0``). A forcing term is injected by the simulator as an
    additive disturbance on the second channel.
    """
    for v in (alpha, beta, delta):
        if not math.isfinite(v):
            raise ParameterError("Duffing parameters must be finite")

    def dynamics(x, u):
        return np.array([x[1], -delta * x[1] - alpha * x[0] - beta * x[0] ** 3])

    def jac_x(x, u):
        return np.array([[0.0, 1.0], [-alpha - 3.0 * beta * x[0] ** 2, -delta]])

    def jac_u(x, u):
        return np.zeros((2, 0))

    return PlantModel(
        name="duffing", n=2, m=0,
        dynamics=dynamics, jac_x=jac_x, jac_u=jac_u,
        equilibrium_state=np.zeros(2), equilibrium_input=np.zeros(0),
        state_names=("x1", "x2"),
        params={"alpha": alpha, "beta": beta, "delta": delta},
    )


# --------------------------------------------------------------------------
# Fixed-wing guidance kinematics


@dataclass(frozen=True)
class AircraftParams:
    """Guidance-model constants and the experiment's initial/reference values.

    Angles are in radians. Defaults are the guidance experiment's settings.
    """
    g: float = 9.81
    V: float = 25.0
    gamma_c: float = math.pi / 12
    chi_c: float = 0.0
    chi0: float = math.pi / 3
    gamma0: float = math.pi / 4
    phi0: float = math.pi / 3
    nz0: float = 1.0
    phi_box: tuple[float, float] = (-math.pi / 4, math.pi / 4)
    nz_box: tuple[float, float] = (-2.1, 2.1)
    phi_rate_box: tuple[float, float] = (-math.pi / 6, math.pi / 6)
    nz_rate_box: tuple[float, float] = (-1.0, 1.0)
    t_end: float = 20.0

    def __post_init__(self):
        if not self.V > 0:
            raise ParameterError("airspeed V must be positive")
        for lo, hi in (self.phi_box, self.nz_box, self.phi_rate_box, self.nz_rate_box):
            if not lo < hi:
                raise ParameterError(f"empty box [{lo}, {hi}]")

    @property
    def reference(self) -> np.ndarray:
        return np.array([self.chi_c, self.gamma_c])

    @property
    def initial_state(self) -> np.ndarray:
        return np.array([self.chi0, self.gamma0])

    @property
    def initial_input(self) -> np.ndarray:
        return np.array([self.phi0, self.nz0])

    @property
    def initial_error(self) -> np.ndarray:
        return self.reference - self.initial_state

    @property
    def input_box(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([self.phi_box[0], self.nz_box[0]]),
                np.array([self.phi_box[1], self.nz_box[1]]))

    @property
    def rate_box(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([self.phi_rate_box[0], self.nz_rate_box[0]]),
                np.array([self.phi_rate_box[1], self.nz_rate_box[1]]))


def _check_roll(phi: float) -> None:
    if not abs(phi) < _ROLL_LIMIT:
        raise DomainError(f"roll angle {phi:.4f} rad is outside (-pi/2, pi/2)")


def aircraft_plant(params: AircraftParams | None = None) -> PlantModel:
    """Kinematics of heading ``chi`` and climb angle ``gamma`` under roll/overload commands.

    State ``(chi, gamma)``, input ``(phi, n_z)``. The trim point is level
    roll at the reference climb angle, ``n_z = cos(gamma_c)``.
    """
    p = params or AircraftParams()
    k = p.g / p.V

    def dynamics(x, u):
        phi, nz = u
        _check_roll(phi)
        return np.array([k * math.tan(phi), k * (nz * math.cos(phi) - math.cos(x[1]))])

    def jac_x(x, u):
        return np.array([[0.0, 0.0], [0.0, k * math.sin(x[1])]])

    def jac_u(x, u):
        phi, nz = u
        _check_roll(phi)
        return np.array([[k / math.cos(phi) ** 2, 0.0],
                         [-k * nz * math.sin(phi), k * math.cos(phi)]])

    return PlantModel(
        name="aircraft", n=2, m=2,
        dynamics=dynamics, jac_x=jac_x, jac_u=jac_u,
        equilibrium_state=np.array([p.chi_c, p.gamma_c]),
        equilibrium_input=np.array([0.0, math.cos(p.gamma_c)]),
        state_names=("chi", "gamma"), input_names=("phi", "n_z"),
        input_box=p.input_box, rate_box=p.rate_box,
        params={"aircraft": p},
    )


def aircraft_error_plant(params: AircraftParams | None = None) -> PlantModel:
    """Tracking-error form ``e' = f_e(e, u)`` with ``e = x_c - x`` and constant reference.

    Its Jacobians at ``e = 0`` are ``diag(0, (g/V) sin gamma_c)`` and
    ``-(g/V) I``; this is the linearization the indicators are built on.
    """
    p = params or AircraftParams()
    k = p.g / p.V

    def dynamics(e, u):
        phi, nz = u
        _check_roll(phi)
        return np.array([-k * math.tan(phi),
                         -k * (nz * math.cos(phi) - math.cos(p.gamma_c - e[1]))])

    def jac_x(e, u):
        return np.array([[0.0, 0.0], [0.0, k * math.sin(p.gamma_c - e[1])]])

    def jac_u(e, u):
        phi, nz = u
        _check_roll(phi)
        return np.array([[-k / math.cos(phi) ** 2, 0.0],
                         [k * nz * math.sin(phi), -k * math.cos(phi)]])

    return PlantModel(
        name="aircraft_error", n=2, m=2,
        dynamics=dynamics, jac_x=jac_x, jac_u=jac_u,
        equilibrium_state=np.zeros(2),
        equilibrium_input=np.array([0.0, math.cos(p.gamma_c)]),
        state_names=("e_chi", "e_gamma"), input_names=("phi", "n_z"),
        input_box=p.input_box, rate_box=p.rate_box,
        params={"aircraft": p},
    )


# --------------------------------------------------------------------------
# Linear test plants


def linear_plant(a, b, name: str = "linear") -> PlantModel:
    """``x' = A x + B u``; exact target for finite-difference checks."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float).reshape(a.shape[0], -1)
    if a.shape[0] != a.shape[1]:
        raise DimensionError("A must be square")
    n, m = b.shape
    return PlantModel(
        name=name, n=n, m=m,
        dynamics=lambda x, u: a @ x + b @ u,
        jac_x=lambda x, u: a.copy(),
        jac_u=lambda x, u: b.copy(),
        equilibrium_state=np.zeros(n), equilibrium_input=np.zeros(m),
        state_names=tuple(f"x{i + 1}" for i in range(n)),
        input_names=tuple(f"u{i + 1}" for i in range(m)),
        params={"A": a.tolist(), "B": b.tolist()},
    )


def integrator(gain: float = 1.0) -> PlantModel:
    """Scalar integrator ``x' = gain * u``."""
    return linear_plant([[0.0]], [[gain]], name="integrator")


# --------------------------------------------------------------------------
# Disturbances


@dataclass(frozen=True)
class SinusoidDisturbance:
    """Per-channel ``L * sin(w t)`` or ``L * cos(w t)``."""
    amplitude: tuple[float, ...]
    omega: tuple[float, ...]
    kind: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "amplitude", tuple(float(v) for v in self.amplitude))
        object.__setattr__(self, "omega", tuple(float(v) for v in self.omega))
        object.__setattr__(self, "kind", tuple(self.kind))
        if not len(self.amplitude) == len(self.omega) == len(self.kind):
            raise DimensionError("amplitude, omega and kind must have equal length")
        if any(a < 0 for a in self.amplitude) or any(w < 0 for w in self.omega):
            raise ParameterError("amplitudes and frequencies must be nonnegative")
        if any(k not in ("sin", "cos") for k in self.kind):
            raise ParameterError("kind entries must be 'sin' or 'cos'")

    @property
    def n(self) -> int:
        return len(self.amplitude)

    def __call__(self, t: float) -> np.ndarray:
        return disturbance_eval(self, t)

    @classmethod
    def zero(cls, n: int) -> "SinusoidDisturbance":
        return cls((0.0,) * n, (0.0,) * n, ("sin",) * n)

    @classmethod
    def uniform(cls, amplitude: float, omega: float, kinds: Sequence[str]) -> "SinusoidDisturbance":
        n = len(kinds)
        return cls((amplitude,) * n, (omega,) * n, tuple(kinds))


def disturbance_eval(d: SinusoidDisturbance, t: float) -> np.ndarray:
    out = np.empty(d.n)
    for i, (amp, w, kind) in enumerate(zip(d.amplitude, d.omega, d.kind)):
        out[i] = amp * (math.sin(w * t) if kind == "sin" else math.cos(w * t))
    return out


def aircraft_disturbance(amplitude: float = 0.1, omega: float = 0.15) -> SinusoidDisturbance:
    """Sine on the heading channel, cosine on the climb channel."""
    return SinusoidDisturbance((amplitude, amplitude), (omega, omega), ("sin", "cos"))


def duffing_forcing(amplitude: float, omega: float = 1.0) -> SinusoidDisturbance:
    """Forcing enters the velocity equation only."""
    return SinusoidDisturbance((0.0, amplitude), (0.0, omega), ("sin", "sin"))


PLANTS = {
    "duffing": duffing,
    "aircraft": aircraft_plant,
    "aircraft_error": aircraft_error_plant,
    "integrator": integrator,
}
