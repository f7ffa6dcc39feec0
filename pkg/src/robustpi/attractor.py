"""Exponential envelopes and attractor certificates for perturbed autonomous systems.

For ``x' = f(x) + d`` with ``|d| <= L_d`` and a stable Jacobian ``J0`` at the
origin, take ``P`` solving ``J0^T P + P J0 + I = 0``. With
``V(x) = f(x)^T P f(x)`` the square root ``sqrt(V)`` obeys the envelope::

    sqrt(V(t)) <= b/a + (sqrt(V(0)) - b/a) * exp(-a t / 2)

where ``a = 1/lambda_max(P)`` and ``b = 2 L_d L_f lambda_max(P) / sqrt(lambda_min(P))``,
and ``|f(x(t))|`` ends up inside the radius
``2 L_d L_f lambda_max(P)^2 / lambda_min(P)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import DimensionError, ParameterError, StabilityError

__all__ = [
    "EnvelopeParams",
    "envelope",
    "LyapunovCertificate",
    "lyapunov_certificate",
    "Verdict",
    "verify_trajectory",
    "duffing_check",
]


@dataclass(frozen=True)
class EnvelopeParams:
    alpha: float
    beta: float
    v0_sqrt: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError("alpha must be positive")
        if not (self.beta >= 0 and self.v0_sqrt >= 0):
            raise ParameterError("beta and v0_sqrt must be nonnegative")
        if not all(map(math.isfinite, (self.alpha, self.beta, self.v0_sqrt))):
            raise ParameterError("envelope parameters must be finite")

    @property
    def asymptote(self) -> float:
        return self.beta / self.alpha


def envelope(params: EnvelopeParams, t):
    """``b/a + (v0 - b/a) exp(-a t / 2)``; accepts a scalar or an array of times."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ParameterError("t must be nonnegative")
    c = params.asymptote
    out = c + (params.v0_sqrt - c) * np.exp(-params.alpha * t_arr / 2.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LyapunovCertificate:
    """Lyapunov certificate at the origin, in the normalization ``epsilon = 1``."""
    P: np.ndarray
    epsilon: float
    L_f: float
    L_d: float
    rate: float
    radius: float

    @property
    def lambda_max(self) -> float:
        return float(spectral.sym_eigvals(self.P)[-1])

    @property
    def lambda_min(self) -> float:
        return float(spectral.sym_eigvals(self.P)[0])

    @property
    def drive(self) -> float:
        """Forcing term ``2 L_d L_f lambda_max / sqrt(lambda_min)`` of the ``sqrt(V)`` inequality."""
        return 2.0 * self.L_d * self.L_f * self.lambda_max / math.sqrt(self.lambda_min)

    def envelope_params(self, v0_sqrt: float) -> EnvelopeParams:
        return EnvelopeParams(alpha=self.rate, beta=self.drive, v0_sqrt=v0_sqrt)

    def to_dict(self) -> dict:
        return {"P": self.P.tolist(), "epsilon": self.epsilon, "L_f": self.L_f,
                "L_d": self.L_d, "rate": self.rate, "radius": self.radius}


def lyapunov_certificate(j0, l_f: float, l_d: float) -> LyapunovCertificate:
    j0 = spectral.as_square(j0, "J0")
    if l_f < 0 or l_d < 0:
        raise ParameterError("L_f and L_d must be nonnegative")
    if not spectral.is_hurwitz(j0):
        raise StabilityError("Jacobian at the origin is not Hurwitz")
    p = spectral.solve_lyapunov(j0, np.eye(j0.shape[0]))
    w = spectral.sym_eigvals(p)
    lmin, lmax = float(w[0]), float(w[-1])
    return LyapunovCertificate(
        P=p, epsilon=1.0, L_f=float(l_f), L_d=float(l_d),
        rate=1.0 / lmax,
        radius=2.0 * l_d * l_f * lmax ** 2 / lmin,
    )


@dataclass(frozen=True)
class Verdict:
    dominated: bool
    first_violation_time: float | None
    final_quarter_max: float
    radius: float
    within_radius: bool

    def to_dict(self) -> dict:
        return {"dominated": self.dominated, "first_violation_time": self.first_violation_time,
                "final_quarter_max": self.final_quarter_max, "radius": self.radius,
                "within_radius": self.within_radius}


def verify_trajectory(trace, f_values, cert: LyapunovCertificate, slack: float = 0.05) -> Verdict:
    """Check ``|f(x(t))| sqrt(lambda_min(P))`` against the certificate envelope.

    Parameters
    ----------
    trace : SimulationTrace or (N,) array_like
        The trajectory, or just its sample times.
    f_values : (N, n) or (N,) array_like
        Either the vectors ``f(x(t_k))`` or just their 2-norms. With vectors,
        ``sqrt(V(x0))`` is ``sqrt(f0^T P f0)``; with norms only, the upper
        bound ``sqrt(lambda_max) |f0|`` is used instead.
    slack : float
        Relative tolerance on the envelope.
    """
    t = np.asarray(getattr(trace, "t", trace), dtype=float)
    f = np.asarray(f_values, dtype=float)
    if f.shape[0] != t.shape[0]:
        raise DimensionError(f"{f.shape[0]} f samples for a grid of {t.shape[0]}")
    if slack < 0:
        raise ParameterError("slack must be nonnegative")
    if f.ndim == 2:
        norms = np.linalg.norm(f, axis=1)
        v0 = math.sqrt(max(float(f[0] @ cert.P @ f[0]), 0.0))
    else:
        norms = np.abs(f)
        v0 = math.sqrt(cert.lambda_max) * norms[0]
    bound = envelope(cert.envelope_params(v0), t - t[0]) * (1.0 + slack)
    lhs = norms * math.sqrt(cert.lambda_min)
    bad = np.nonzero(lhs > bound)[0]
    tail = norms[t >= t[0] + 0.75 * (t[-1] - t[0])]
    fq_max = float(tail.max()) if tail.size else 0.0
    return Verdict(
        dominated=bad.size == 0,
        first_violation_time=float(t[bad[0]]) if bad.size else None,
        final_quarter_max=fq_max,
        radius=cert.radius,
        within_radius=fq_max <= cert.radius,
    )


def duffing_check(alpha: float = 0.5, beta: float = 0.25, delta: float = 1.5,
                  l_d: float = 2.5, omega: float = 1.0, x0=(1.0, 0.0),
                  cfg=None, slack: float = 0.05, l_f: float | None = None):
    """Simulate the forced Duffing oscillator and test it against its certificate.

    The forcing ``l_d * sin(omega t)`` acts on the velocity equation at full
    amplitude throughout. ``L_f`` defaults to the 2-norm of the Jacobian at
    the origin. Returns ``(trace, certificate, verdict, f_values)``.
    """
    from .closedloop import SimConfig, simulate
    from .indicators import GainPair
    from .plants import duffing, duffing_forcing

    plant = duffing(alpha, beta, delta)
    j0 = plant.jac_x(np.zeros(2), np.zeros(0))
    cert = lyapunov_certificate(j0, spectral.spectral_norm(j0) if l_f is None else l_f, l_d)
    trace = simulate(plant, GainPair.zeros(0, 2), duffing_forcing(l_d, omega),
                     np.zeros(2), np.asarray(x0, dtype=float), cfg or SimConfig(t_end=40.0))
    f_values = np.array([plant(x) for x in trace.x])
    return trace, cert, verify_trajectory(trace, f_values, cert, slack), f_values
