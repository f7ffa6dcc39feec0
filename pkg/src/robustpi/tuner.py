"""Gain synthesis: maximize R_K under attractor-size and input constraints.

The decision variable is ``K = (K_P | K_I)``. Constraints are checked at the
first controller sample, ``t0 + dt0``::

    I_K <= I*
    u_min <= K_P x0 + dt0 K_I x0 <= u_max
    du_min <= K_I x0 <= du_max

A real-coded genetic algorithm with a static penalty solves the problem.
Every random draw comes from a stream keyed by ``(seed, generation,
individual)``, so results do not depend on evaluation order.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .closedloop import SimConfig, simulate
from .indicators import GainPair, IndicatorReport, LinearizationPoint, compute_indicators
from .metrics import composite_norm, itae, peak_and_overshoot, settled_stats
from .errors import DimensionError, NumericError, ParameterError
from .plants import AircraftParams, PlantModel, SinusoidDisturbance, aircraft_error_plant, integrator

__all__ = [
    "TuningProblem",
    "GAConfig",
    "TuningResult",
    "Violation",
    "evaluate_feasibility",
    "fitness",
    "ga_optimize",
    "grid_search",
    "delta_k_gains",
    "delta_k_sweep",
    "disturbance_sweep",
    "SweepRow",
    "rows_to_csv",
    "AIRCRAFT_K_STAR",
    "DELTA_K_EPSILONS",
    "aircraft_problem",
    "toy_problem",
]

# reference optimum for the guidance problem
AIRCRAFT_K_STAR = GainPair(
    [[1.6968, 0.5906], [-0.5906, 1.9556]],
    [[3.4869, 0.1784], [-0.1784, 3.4869]],
)
DELTA_K_EPSILONS = (-4.0, -2.0, -1.0, 0.5, 0.8, 1.0)


@dataclass(frozen=True)
class TuningProblem:
    lin: LinearizationPoint
    x0: np.ndarray
    i_star: float
    u_box: tuple[np.ndarray, np.ndarray]
    rate_box: tuple[np.ndarray, np.ndarray]
    dt0: float = 0.1

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=float).reshape(-1)
        if x0.shape != (self.lin.n,):
            raise DimensionError(f"x0 must have length {self.lin.n}")
        boxes = []
        for name, box in (("u_box", self.u_box), ("rate_box", self.rate_box)):
            lo = np.broadcast_to(np.asarray(box[0], dtype=float), (self.lin.m,)).copy()
            hi = np.broadcast_to(np.asarray(box[1], dtype=float), (self.lin.m,)).copy()
            if not np.all(lo < hi):
                raise ParameterError(f"{name} is empty")
            boxes.append((lo, hi))
        if not self.i_star >= 0:
            raise ParameterError("I* must be nonnegative")
        if not self.dt0 > 0:
            raise ParameterError("dt0 must be positive")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "u_box", boxes[0])
        object.__setattr__(self, "rate_box", boxes[1])

    def initial_input(self, gains: GainPair) -> np.ndarray:
        return gains.kp @ self.x0 + self.dt0 * (gains.ki @ self.x0)

    def initial_rate(self, gains: GainPair) -> np.ndarray:
        return gains.ki @ self.x0


def aircraft_problem(params: AircraftParams | None = None, i_star: float = 5.0,
                     dt0: float = 0.1) -> TuningProblem:
    """Guidance tuning problem on the error linearization with the experiment boxes.

    ``x0`` is the initial state minus the reference, ``(pi/3, pi/6)`` by default.
    """
    p = params or AircraftParams()
    return TuningProblem(aircraft_error_plant(p).linearization(), p.initial_state - p.reference,
                         i_star, p.input_box, p.rate_box, dt0)


def toy_problem(i_star: float = 20.0, u_max: float = 10.0, rate_max: float = 1e6) -> TuningProblem:
    """Scalar ``x' = u`` with ``|u(t0)| <= u_max`` from ``x0 = 1``."""
    return TuningProblem(integrator().linearization(), [1.0], i_star,
                         (-u_max, u_max), (-rate_max, rate_max))


@dataclass(frozen=True)
class GAConfig:
    population: int = 60
    generations: int = 80
    crossover_rate: float = 0.9
    mutation_rate: float = 0.2
    mutation_scale: float = 0.1
    mutation_decay: float = 0.98
    elitism: int = 2
    tournament: int = 3
    blend_alpha: float = 0.5
    seed: int = 42
    gain_box: tuple[float, float] = (-20.0, 20.0)

    def __post_init__(self):
        if self.population < 2:
            raise ParameterError("population must be at least 2")
        if self.generations < 0:
            raise ParameterError("generations must be nonnegative")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1]")
        if not 1 <= self.elitism < self.population:
            raise ParameterError("elitism must be in [1, population)")
        if self.tournament < 1:
            raise ParameterError("tournament size must be positive")
        if not self.gain_box[0] < self.gain_box[1]:
            raise ParameterError("gain_box is empty")


@dataclass(frozen=True)
class Violation:
    constraint: str
    channel: int | None
    amount: float


@dataclass
class TuningResult:
    gains: GainPair
    report: IndicatorReport
    fitness: float
    feasible: bool
    history: list[float] = field(default_factory=list)
    violations: list[Violation] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "fitness": self.fitness,
            "gains": self.gains.to_dict(),
            "report": self.report.to_dict(),
            "violations": [v.__dict__ for v in self.violations],
            "history": list(self.history),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TuningResult":
        return cls(
            gains=GainPair(d["gains"]["kp"], d["gains"]["ki"]),
            report=IndicatorReport.from_dict(d["report"]),
            fitness=d["fitness"],
            feasible=d["feasible"],
            history=list(d["history"]),
            violations=[Violation(**v) for v in d["violations"]],
        )


def _box_violations(name: str, values, lo, hi) -> list[Violation]:
    out = []
    for j, v in enumerate(values):
        if v < lo[j]:
            out.append(Violation(name, j, float(lo[j] - v)))
        elif v > hi[j]:
            out.append(Violation(name, j, float(v - hi[j])))
    return out


# Instability costs more than any attractor-size excess short of I_K ~ I* e^10,
# so a stable individual outranks an unstable one.
_UNSTABLE_COST = 10.0


def _assess(problem: TuningProblem, gains: GainPair):
    report = compute_indicators(problem.lin, gains)
    viol = []
    if not report.hurwitz:
        viol.append(Violation("hurwitz", None, _UNSTABLE_COST + report.eig_real_parts[0]))
    elif report.i_k > problem.i_star:
        # log scale: I_K blows up near the stability boundary
        excess = math.log(report.i_k / problem.i_star) if problem.i_star > 0 else _UNSTABLE_COST
        viol.append(Violation("i_star", None, float(excess)))
    viol += _box_violations("input", problem.initial_input(gains), *problem.u_box)
    viol += _box_violations("rate", problem.initial_rate(gains), *problem.rate_box)
    return report, viol


def evaluate_feasibility(problem: TuningProblem, gains: GainPair) -> tuple[bool, list[Violation]]:
    """Check the three constraint groups; non-stabilizing gains are infeasible."""
    _, viol = _assess(problem, gains)
    return not viol, viol


def _penalized(report: IndicatorReport, viol: list[Violation]) -> float:
    if viol:
        return -(1.0 + sum(v.amount for v in viol))
    return float(report.r_k)


def fitness(problem: TuningProblem, gains: GainPair) -> float:
    """``R_K`` when feasible, otherwise ``-(1 + total violation)``.

    Box violations are measured in input units. An ``I_K`` excess counts as
    ``log(I_K / I*)`` and instability as ``10 + spectral abscissa``.
    """
    return _penalized(*_assess(problem, gains))


def _decode(genome: np.ndarray, m: int, n: int) -> GainPair:
    return GainPair.from_stacked(genome.reshape(m, 2 * n), n)


def _stream(seed: int, generation: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(generation, index)))


def ga_optimize(problem: TuningProblem, cfg: GAConfig | None = None) -> TuningResult:
    """Real-coded GA: tournament selection, blend crossover, Gaussian mutation, elitism.

    The mutation standard deviation is ``mutation_scale * (box width)``,
    shrinking by ``mutation_decay`` each generation. ``history[g]`` is the
    best fitness after generation ``g`` (index 0 is the initial population).
    """
    cfg = cfg or GAConfig()
    m, n = problem.lin.m, problem.lin.n
    dim = 2 * m * n
    lo, hi = cfg.gain_box
    width = hi - lo

    def evaluate(pop):
        out = []
        for g in pop:
            report, viol = _assess(problem, _decode(g, m, n))
            out.append((_penalized(report, viol), report, viol))
        return out

    pop = np.array([_stream(cfg.seed, 0, i).uniform(lo, hi, dim) for i in range(cfg.population)])
    evals = evaluate(pop)
    fit = np.array([e[0] for e in evals])
    history = [float(fit.max())]

    for gen in range(1, cfg.generations + 1):
        order = np.argsort(-fit, kind="stable")
        children = [pop[i].copy() for i in order[:cfg.elitism]]
        child_evals = [evals[i] for i in order[:cfg.elitism]]
        sigma = cfg.mutation_scale * width * cfg.mutation_decay ** gen
        new = []
        for idx in range(cfg.elitism, cfg.population):
            rng = _stream(cfg.seed, gen, idx)

            def pick():
                cand = rng.integers(0, cfg.population, cfg.tournament)
                return pop[cand[np.argmax(fit[cand])]]

            p1, p2 = pick(), pick()
            if rng.random() < cfg.crossover_rate:
                a = cfg.blend_alpha
                w = rng.uniform(-a, 1.0 + a, dim)
                child = p1 + w * (p2 - p1)
            else:
                child = p1.copy()
            mask = rng.random(dim) < cfg.mutation_rate
            child = child + mask * rng.normal(0.0, sigma, dim)
            new.append(np.clip(child, lo, hi))
        children += new
        child_evals += evaluate(new)
        pop = np.array(children)
        evals = child_evals
        fit = np.array([e[0] for e in evals])
        history.append(float(fit.max()))

    best = int(np.argmax(fit))
    gains = _decode(pop[best], m, n)
    feasible, viol = evaluate_feasibility(problem, gains)
    return TuningResult(gains, evals[best][1], float(fit[best]), feasible, history, viol)


def grid_search(problem: TuningProblem, kp_values: Sequence[float], ki_values: Sequence[float]):
    """Exhaustive search over scalar gains (``m = n = 1``); returns ``(best fitness, K_P, K_I)``."""
    if (problem.lin.m, problem.lin.n) != (1, 1):
        raise DimensionError("grid search is for scalar problems")
    best = (-np.inf, None, None)
    for kp in kp_values:
        for ki in ki_values:
            f = fitness(problem, GainPair([[kp]], [[ki]]))
            if f > best[0]:
                best = (f, kp, ki)
    return best


def delta_k_gains(base: GainPair, epsilon: float) -> GainPair:
    """``K = K_base - epsilon (I, I)``."""
    m, n = base.shape
    eye = np.eye(m, n)
    return GainPair(base.kp - epsilon * eye, base.ki - epsilon * eye)


def delta_k_sweep(base: GainPair, epsilons: Sequence[float], lin: LinearizationPoint):
    """Indicators along the family ``K_base - epsilon (I, I)``.

    Returns a list of ``(epsilon, R_K, I_K)``; both indicators are ``None``
    for non-stabilizing members.
    """
    rows = []
    for eps in epsilons:
        rep = compute_indicators(lin, delta_k_gains(base, eps))
        rows.append((float(eps), rep.r_k, rep.i_k))
    return rows


@dataclass(frozen=True)
class SweepRow:
    l_d: float
    omega: float
    channel: str
    itae: float
    pt: float
    mo: float
    ms: float
    st: float


def _channel_rows(trace, l_d, omega) -> list[SweepRow]:
    rows = []
    names = trace.state_names or tuple(str(i + 1) for i in range(trace.e.shape[1]))
    for j, name in enumerate(names):
        for prefix, y in (("e", trace.e[:, j]), ("s", composite_norm(trace.e[:, j], trace.edot[:, j]))):
            pt, mo = peak_and_overshoot(y, trace.t)
            ms, st = settled_stats(y, trace.t)
            rows.append(SweepRow(l_d, omega, f"{prefix}_{name}", itae(y, trace.t), pt, mo, ms, st))
    return rows


def disturbance_sweep(plant: PlantModel, gains: GainPair, amplitudes: Sequence[float],
                      omegas: Sequence[float], cfg: SimConfig, reference, x0, u0=None,
                      kinds: Sequence[str] | None = None) -> list[SweepRow]:
    """Simulate every ``(L_d, omega)`` pair and tabulate metrics per channel.

    Each state contributes two rows: ``e_<name>`` for the tracking error and
    ``s_<name>`` for the composite ``sqrt(e^2 + e'^2)``.
    """
    kinds = tuple(kinds or ("sin",) * plant.n)
    rows = []
    for l_d in amplitudes:
        for w in omegas:
            dist = SinusoidDisturbance.uniform(l_d, w, kinds)
            trace = simulate(plant, gains, dist, reference, x0, cfg, u0=u0)
            if trace.error:
                raise NumericError(f"simulation failed for L_d={l_d}, omega={w}: {trace.error}")
            rows += _channel_rows(trace, float(l_d), float(w))
    return rows


def rows_to_csv(rows, header: Sequence[str], path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        vals = r.__dict__.values() if hasattr(r, "__dict__") else r
        w.writerow(["" if v is None else v for v in vals])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
