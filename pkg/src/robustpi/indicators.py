"""Robust-convergence indicators of a MIMO-PI loop.

For a plant linearized at its equilibrium (``jac_x``, ``jac_u``) and PI gains
``(K_P, K_I)``, the velocity-form closed loop on ``s = (x', x)`` has the
matrix::

    A_K(0) = [[jac_x + jac_u K_P, jac_u K_I],
              [I_n,               0        ]]

The rate indicator is ``R_K = 1 / lambda_max(Q*)`` where ``Q*`` solves the
eigenvalue problem::

    minimize gamma  s.t.  Q <= gamma I,  A^T Q + Q A + I <= 0.

For Hurwitz ``A`` every feasible ``Q`` dominates the solution of the
Lyapunov equality ``A^T Q + Q A + I = 0`` (write the feasible ``Q`` as that
solution plus the integral of ``e^{A^T t} W e^{A t}`` with ``W >= 0``), so the
equality solution is the minimizer and no SDP solver is needed.

The attractor-size indicator is
``I_K = tau(Q*) / (R_K * sigma_min(A_K(0)))`` with ``tau`` the condition
number.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .errors import DefinitenessError, DimensionError, NumericError, StabilityError

__all__ = [
    "GainPair",
    "LinearizationPoint",
    "IndicatorReport",
    "assemble_D1_D2",
    "assemble_AK0",
    "solve_evp",
    "compute_indicators",
    "attractor_radius",
    "MARGINAL_TOL",
]


@dataclass(frozen=True)
class GainPair:
    """Proportional and integral gain matrices, both ``m x n``."""
    kp: np.ndarray
    ki: np.ndarray

    def __post_init__(self):
        kp = np.asarray(self.kp, dtype=float)
        ki = np.asarray(self.ki, dtype=float)
        # m = 0 is allowed: autonomous plants carry an empty gain pair
        if kp.ndim != 2 or ki.ndim != 2:
            raise DimensionError("gain matrices must be 2-D")
        if not (np.all(np.isfinite(kp)) and np.all(np.isfinite(ki))):
            raise DimensionError("gain matrices have non-finite entries")
        if kp.shape != ki.shape:
            raise DimensionError(f"K_P is {kp.shape} but K_I is {ki.shape}")
        object.__setattr__(self, "kp", kp)
        object.__setattr__(self, "ki", ki)

    @property
    def shape(self) -> tuple[int, int]:
        return self.kp.shape

    @property
    def stacked(self) -> np.ndarray:
        """``K = (K_P | K_I)``, shape ``m x 2n``."""
        return np.hstack([self.kp, self.ki])

    @classmethod
    def from_stacked(cls, k, n: int) -> "GainPair":
        k = np.asarray(k, dtype=float)
        return cls(k[:, :n], k[:, n:])

    @classmethod
    def zeros(cls, m: int, n: int) -> "GainPair":
        return cls(np.zeros((m, n)), np.zeros((m, n)))

    def __add__(self, other: "GainPair") -> "GainPair":
        return GainPair(self.kp + other.kp, self.ki + other.ki)

    def scaled(self, c: float) -> "GainPair":
        return GainPair(c * self.kp, c * self.ki)

    def to_dict(self) -> dict:
        return {"kp": self.kp.tolist(), "ki": self.ki.tolist()}


@dataclass(frozen=True)
class LinearizationPoint:
    """Plant Jacobians at the equilibrium: ``jac_x`` (n x n), ``jac_u`` (n x m)."""
    jac_x: np.ndarray
    jac_u: np.ndarray

    def __post_init__(self):
        jx = spectral.as_square(self.jac_x, "jac_x")
        ju = np.asarray(self.jac_u, dtype=float)
        if ju.ndim == 1:
            ju = ju.reshape(-1, 1)
        if ju.ndim != 2 or ju.shape[0] != jx.shape[0]:
            raise DimensionError(f"jac_u must have {jx.shape[0]} rows, got shape {ju.shape}")
        if not np.all(np.isfinite(ju)):
            raise DimensionError("jac_u has non-finite entries")
        object.__setattr__(self, "jac_x", jx)
        object.__setattr__(self, "jac_u", ju)

    @property
    def n(self) -> int:
        return self.jac_x.shape[0]

    @property
    def m(self) -> int:
        return self.jac_u.shape[1]


@dataclass(frozen=True)
class IndicatorReport:
    a_k0: np.ndarray
    eig_real_parts: list[float]
    hurwitz: bool
    q_star: np.ndarray | None = None
    gamma_star: float | None = None
    r_k: float | None = None
    i_k: float | None = None
    sigma_min_ak: float | None = None
    tau_qstar: float | None = None
    eigenvalues: list[complex] = field(default_factory=list)
    # candidate Lipschitz constants for attractor_radius; the caller picks one
    norm_jac_x: float | None = None
    norm_ak0: float | None = None

    def to_dict(self) -> dict:
        return {
            "hurwitz": self.hurwitz,
            "r_k": self.r_k,
            "i_k": self.i_k,
            "gamma_star": self.gamma_star,
            "sigma_min_ak": self.sigma_min_ak,
            "tau_qstar": self.tau_qstar,
            "eig_real_parts": list(self.eig_real_parts),
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "a_k0": self.a_k0.tolist(),
            "q_star": None if self.q_star is None else self.q_star.tolist(),
            "norm_jac_x": self.norm_jac_x,
            "norm_ak0": self.norm_ak0,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IndicatorReport":
        return cls(
            a_k0=np.array(d["a_k0"], dtype=float),
            eig_real_parts=list(d["eig_real_parts"]),
            hurwitz=bool(d["hurwitz"]),
            q_star=None if d["q_star"] is None else np.array(d["q_star"], dtype=float),
            gamma_star=d["gamma_star"],
            r_k=d["r_k"],
            i_k=d["i_k"],
            sigma_min_ak=d["sigma_min_ak"],
            tau_qstar=d["tau_qstar"],
            eigenvalues=[complex(re, im) for re, im in d["eigenvalues"]],
            norm_jac_x=d["norm_jac_x"],
            norm_ak0=d["norm_ak0"],
        )


def assemble_D1_D2(lin: LinearizationPoint) -> tuple[np.ndarray, np.ndarray]:
    """Split ``A_K(0) = D1 + D2 @ K`` with ``K = (K_P | K_I)``."""
    n, m = lin.n, lin.m
    d1 = np.zeros((2 * n, 2 * n))
    d1[:n, :n] = lin.jac_x
    d1[n:, :n] = np.eye(n)
    d2 = np.zeros((2 * n, m))
    d2[:n, :] = lin.jac_u
    return d1, d2


def _check_gains(lin: LinearizationPoint, gains: GainPair) -> None:
    if gains.shape != (lin.m, lin.n):
        raise DimensionError(f"gains must be {(lin.m, lin.n)}, got {gains.shape}")


def assemble_AK0(lin: LinearizationPoint, gains: GainPair) -> np.ndarray:
    _check_gains(lin, gains)
    n = lin.n
    a = np.zeros((2 * n, 2 * n))
    a[:n, :n] = lin.jac_x + lin.jac_u @ gains.kp
    a[:n, n:] = lin.jac_u @ gains.ki
    a[n:, :n] = np.eye(n)
    return a


def solve_evp(a_k0) -> tuple[np.ndarray, float]:
    """Minimal-``lambda_max`` certificate ``Q*`` for ``A^T Q + Q A + I <= 0``.

    Raises :class:`StabilityError` when `a_k0` is not Hurwitz, in which case
    the problem is infeasible.
    """
    a = spectral.as_square(a_k0, "A_K(0)")
    if not spectral.is_hurwitz(a):
        raise StabilityError("EVP is infeasible: A_K(0) is not Hurwitz")
    q = spectral.solve_lyapunov(a, np.eye(a.shape[0]))
    return q, float(spectral.sym_eigvals(q)[-1])


# spectra this close to the imaginary axis give Q* too ill-conditioned to trust
MARGINAL_TOL = 1e-12


def compute_indicators(lin: LinearizationPoint, gains: GainPair) -> IndicatorReport:
    """Assemble ``A_K(0)``, solve the EVP and return ``R_K``, ``I_K`` and diagnostics.

    Non-stabilizing gains give a report with ``hurwitz=False`` and the
    indicator fields set to ``None``. So do numerically marginal ones, whose
    spectral abscissa lies above ``-MARGINAL_TOL * (1 + |A_K(0)|)``.
    """
    a = assemble_AK0(lin, gains)
    eigs = spectral.eigvals(a)
    eig_re = sorted((float(z.real) for z in eigs), reverse=True)
    common = dict(
        a_k0=a,
        eig_real_parts=eig_re,
        eigenvalues=[complex(z) for z in eigs],
        norm_jac_x=spectral.spectral_norm(lin.jac_x),
        norm_ak0=spectral.spectral_norm(a),
    )
    if not eig_re[0] < -MARGINAL_TOL * (1.0 + common["norm_ak0"]):
        return IndicatorReport(hurwitz=False, **common)
    try:
        q = spectral.solve_lyapunov(a, np.eye(a.shape[0]))
        tau = spectral.condition_number(q)
    except (StabilityError, NumericError, DefinitenessError):
        return IndicatorReport(hurwitz=False, **common)
    gamma = float(spectral.sym_eigvals(q)[-1])
    sig = spectral.min_singular_value(a)
    r_k = 1.0 / gamma
    return IndicatorReport(
        hurwitz=True,
        q_star=q,
        gamma_star=gamma,
        r_k=r_k,
        i_k=tau / (r_k * sig),
        sigma_min_ak=sig,
        tau_qstar=tau,
        **common,
    )


def attractor_radius(l_d: float, l_f: float, i_k: float) -> float:
    """Radius ``2 L_d L_f I_K`` of the terminal ball around the origin."""
    if min(l_d, l_f) < 0 or not i_k > 0:
        raise ValueError("need L_d, L_f >= 0 and I_K > 0")
    return 2.0 * l_d * l_f * i_k
