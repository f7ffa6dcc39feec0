"""Command-line frontend driven by a single JSON run configuration.

Exit codes: 0 success, 1 configuration error, 2 analysis failure
(non-Hurwitz gains, infeasible tuning, failed verification), 3 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .attractor import duffing_check, envelope
from .closedloop import SimConfig, simulate
from .errors import ConfigError, NumericError, RobustPIError, StabilityError
from .indicators import GainPair, LinearizationPoint, compute_indicators
from .metrics import metrics_report
from .plants import AircraftParams, PlantModel, SinusoidDisturbance, aircraft_plant, duffing, integrator, linear_plant
from .tuner import (
    GAConfig,
    TuningProblem,
    delta_k_sweep,
    disturbance_sweep,
    ga_optimize,
    rows_to_csv,
)

EXIT_OK, EXIT_CONFIG, EXIT_ANALYSIS, EXIT_NUMERIC = 0, 1, 2, 3

SECTIONS = {
    "plant": {"name", "params", "linearization"},
    "gains": {"kp", "ki", "optimize"},
    "disturbance": {"amplitude", "omega", "kind"},
    "sim": {"t_end", "step", "stride", "clip_inputs", "reference", "x0", "u0"},
    "tuning": {"i_star", "dt0", "x0", "u_box", "rate_box", "ga"},
    "sweep": {"kind", "epsilons", "amplitudes", "omegas"},
    "verify": {"slack", "l_f", "x0"},
    "output": {"dir", "plots"},
}
GA_KEYS = {f for f in GAConfig.__dataclass_fields__}


# --------------------------------------------------------------------------
# Configuration parsing


def parse_matrix(obj, name: str) -> np.ndarray:
    """``{"rows": r, "cols": c, "data": [[...], ...]}`` -> ``(r, c)`` array."""
    if not isinstance(obj, dict) or set(obj) != {"rows", "cols", "data"}:
        raise ConfigError(f"{name}: matrix must be an object with rows, cols and data")
    try:
        a = np.array(obj["data"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: data is not a numeric nested array") from exc
    if a.shape != (obj["rows"], obj["cols"]):
        raise ConfigError(f"{name}: data has shape {a.shape}, declared ({obj['rows']}, {obj['cols']})")
    return a


def _vector(v, name: str, n: int | None = None) -> np.ndarray:
    try:
        a = np.array(v, dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: expected a list of numbers") from exc
    if n is not None and a.shape != (n,):
        raise ConfigError(f"{name}: expected length {n}, got {a.size}")
    return a


def _box(v, name: str, m: int) -> tuple[np.ndarray, np.ndarray]:
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ConfigError(f"{name}: expected [lower, upper]")
    return (np.broadcast_to(_vector(v[0], name), (m,)).copy(),
            np.broadcast_to(_vector(v[1], name), (m,)).copy())


def _build_plant(sec: dict) -> tuple[PlantModel, AircraftParams | None]:
    name = sec.get("name")
    params = sec.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("plant.params must be an object")
    try:
        if name == "aircraft":
            p = AircraftParams(**params)
            return aircraft_plant(p), p
        if name == "duffing":
            return duffing(**{"alpha": 0.5, "beta": 0.25, "delta": 1.5, **params}), None
        if name == "integrator":
            return integrator(**params), None
        if name == "linear":
            return linear_plant(parse_matrix(params.get("a"), "plant.params.a"),
                                parse_matrix(params.get("b"), "plant.params.b")), None
    except TypeError as exc:
        raise ConfigError(f"plant.params: {exc}") from exc
    raise ConfigError(f"unknown plant {name!r}; expected aircraft, duffing, integrator or linear")


@dataclass
class RunConfig:
    plant: PlantModel
    lin: LinearizationPoint | None
    aircraft: AircraftParams | None
    gains: GainPair | None
    optimize: bool
    disturbance: SinusoidDisturbance
    sim: SimConfig
    reference: np.ndarray
    x0: np.ndarray | None
    u0: np.ndarray | None
    tuning: dict
    ga: GAConfig
    sweep: dict
    verify: dict
    out_dir: Path
    plots: bool = False
    raw: dict = field(default_factory=dict)

    def problem(self) -> TuningProblem:
        """Tuning problem; aircraft runs default to the experiment boxes and initial offset."""
        if self.lin is None:
            raise ConfigError("plant has no inputs to tune")
        t = self.tuning
        if self.aircraft is not None:
            x0 = self.aircraft.initial_state - self.aircraft.reference
        elif self.x0 is not None:
            x0 = self.x0 - self.reference
        else:
            x0 = None
        x0 = _vector(t["x0"], "tuning.x0", self.plant.n) if "x0" in t else x0
        if x0 is None:
            raise ConfigError("tuning.x0 is required for this plant")
        u_box = _box(t["u_box"], "tuning.u_box", self.plant.m) if "u_box" in t else self.plant.input_box
        rate_box = _box(t["rate_box"], "tuning.rate_box", self.plant.m) if "rate_box" in t else self.plant.rate_box
        if u_box is None or rate_box is None:
            raise ConfigError("tuning.u_box and tuning.rate_box are required for this plant")
        try:
            return TuningProblem(self.lin, x0, float(t.get("i_star", 5.0)), u_box, rate_box,
                                 float(t.get("dt0", 0.1)))
        except RobustPIError as exc:
            raise ConfigError(f"tuning: {exc}") from exc


def _shipped(name: str) -> Path | None:
    stem = name[:-5] if name.endswith(".json") else name
    cand = resources.files("robustpi") / "configs" / f"{stem}.json"
    return Path(str(cand)) if cand.is_file() else None


def shipped_configs() -> list[str]:
    return sorted(p.name[:-5] for p in (resources.files("robustpi") / "configs").iterdir()
                  if p.name.endswith(".json"))


def read_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        alt = _shipped(str(path))
        if alt is None:
            raise ConfigError(f"config {path} not found (shipped: {', '.join(shipped_configs())})")
        path = alt
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return raw


def parse_config(raw: dict, out: str | None = None, seed: int | None = None) -> RunConfig:
    unknown = set(raw) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    for sec, keys in SECTIONS.items():
        body = raw.get(sec, {})
        if not isinstance(body, dict):
            raise ConfigError(f"section {sec} must be an object")
        extra = set(body) - keys
        if extra:
            raise ConfigError(f"section {sec}: unknown keys {sorted(extra)}")
    if not raw.get("plant"):
        raise ConfigError("plant section is empty")

    psec = raw["plant"]
    try:
        plant, air = _build_plant(psec)
    except RobustPIError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"plant: {exc}") from exc
    lin = None
    if plant.m:
        mode = psec.get("linearization", "error")
        if mode == "error":
            lin = plant.error_linearization()
        elif mode == "direct":
            lin = plant.linearization()
        else:
            raise ConfigError("plant.linearization must be 'error' or 'direct'")

    gsec = raw.get("gains", {})
    optimize = bool(gsec.get("optimize", False))
    gains = None
    if "kp" in gsec or "ki" in gsec:
        if optimize:
            raise ConfigError("gains: give either kp/ki or optimize, not both")
        try:
            gains = GainPair(parse_matrix(gsec.get("kp"), "gains.kp"), parse_matrix(gsec.get("ki"), "gains.ki"))
        except RobustPIError as exc:
            raise ConfigError(f"gains: {exc}") from exc
        if gains.shape != (plant.m, plant.n):
            raise ConfigError(f"gains must be {plant.m}x{plant.n} for plant {plant.name}")
    elif plant.m == 0:
        gains = GainPair.zeros(0, plant.n)

    ssec = raw.get("sim", {})
    try:
        sim = SimConfig(t_end=float(ssec.get("t_end", air.t_end if air else 20.0)),
                        step=float(ssec.get("step", 0.01)), stride=int(ssec.get("stride", 10)),
                        clip_inputs=bool(ssec.get("clip_inputs", False)))
    except RobustPIError as exc:
        raise ConfigError(f"sim: {exc}") from exc
    n = plant.n
    reference = _vector(ssec["reference"], "sim.reference", n) if "reference" in ssec else (
        air.reference if air else plant.equilibrium_state.copy())
    x0 = _vector(ssec["x0"], "sim.x0", n) if "x0" in ssec else (air.initial_state if air else None)
    u0 = _vector(ssec["u0"], "sim.u0", plant.m) if "u0" in ssec else (air.initial_input if air else None)

    dsec = raw.get("disturbance", {})
    default_kind = ["sin", "cos"] if air else ["sin"] * n
    amp = dsec.get("amplitude", 0.1 if air else 0.0)
    omg = dsec.get("omega", 0.15 if air else 0.0)
    kind = dsec.get("kind", default_kind)
    try:
        dist = SinusoidDisturbance(np.broadcast_to(_vector(amp, "disturbance.amplitude"), (n,)),
                                   np.broadcast_to(_vector(omg, "disturbance.omega"), (n,)),
                                   [kind] * n if isinstance(kind, str) else list(kind))
        if dist.n != n:
            raise ConfigError(f"disturbance needs {n} channels")
    except (RobustPIError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"disturbance: {exc}") from exc

    tsec = dict(raw.get("tuning", {}))
    gasec = dict(tsec.get("ga", {}))
    bad = set(gasec) - GA_KEYS
    if bad:
        raise ConfigError(f"tuning.ga: unknown keys {sorted(bad)}")
    if seed is not None:
        gasec["seed"] = seed
    if "gain_box" in gasec:
        gasec["gain_box"] = tuple(gasec["gain_box"])
    try:
        ga = GAConfig(**gasec)
    except (RobustPIError, TypeError) as exc:
        raise ConfigError(f"tuning.ga: {exc}") from exc

    osec = raw.get("output", {})
    out_dir = Path(out or osec.get("dir", "out"))
    return RunConfig(plant, lin, air, gains, optimize, dist, sim, reference, x0, u0, tsec, ga,
                     dict(raw.get("sweep", {})), dict(raw.get("verify", {})), out_dir,
                     bool(osec.get("plots", False)), raw)


# --------------------------------------------------------------------------
# Output helpers


def write_json(obj, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


class _Run:
    def __init__(self, cfg: RunConfig, quiet: bool):
        self.cfg = cfg
        self.quiet = quiet
        cfg.out_dir.mkdir(parents=True, exist_ok=True)

    def say(self, msg: str) -> None:
        if not self.quiet:
            print(msg)

    def wrote(self, path: Path) -> None:
        self.say(f"wrote {path}")

    def gains(self) -> GainPair:
        cfg = self.cfg
        if cfg.gains is not None:
            return cfg.gains
        if not cfg.optimize:
            raise ConfigError("gains section must give kp/ki or set optimize")
        res = ga_optimize(cfg.problem(), cfg.ga)
        self.say(f"optimized gains: fitness {res.fitness:.6g}, feasible {res.feasible}")
        return res.gains


def cmd_indicators(run: _Run) -> int:
    cfg = run.cfg
    if cfg.lin is None:
        raise ConfigError("indicators need a plant with inputs")
    rep = compute_indicators(cfg.lin, run.gains())
    run.wrote(write_json(rep.to_dict(), cfg.out_dir / "indicators.json"))
    if cfg.plots:
        from .plotting import plot_eigenvalues
        run.wrote(plot_eigenvalues(rep, cfg.out_dir / "eigenvalues.png"))
    if not rep.hurwitz:
        run.say("gains are not stabilizing: A_K(0) has eigenvalues with nonnegative real part")
        return EXIT_ANALYSIS
    run.say(f"R_K = {rep.r_k:.6g}  I_K = {rep.i_k:.6g}")
    return EXIT_OK


def cmd_optimize(run: _Run) -> int:
    cfg = run.cfg
    res = ga_optimize(cfg.problem(), cfg.ga)
    run.wrote(write_json(res.to_dict(), cfg.out_dir / "tuning.json"))
    path = cfg.out_dir / "fitness_history.csv"
    rows_to_csv(enumerate(res.history), ("generation", "best_fitness"), path)
    run.wrote(path)
    if cfg.plots:
        from .plotting import plot_fitness_history
        run.wrote(plot_fitness_history(res.history, cfg.out_dir / "fitness_history.png"))
    run.say(f"best fitness {res.fitness:.6g}, feasible {res.feasible}")
    return EXIT_OK if res.feasible else EXIT_ANALYSIS


def cmd_simulate(run: _Run) -> int:
    cfg = run.cfg
    if cfg.x0 is None:
        raise ConfigError("sim.x0 is required for this plant")
    trace = simulate(cfg.plant, run.gains(), cfg.disturbance, cfg.reference, cfg.x0, cfg.sim, u0=cfg.u0)
    path = cfg.out_dir / "trace.csv"
    trace.to_csv(path)
    run.wrote(path)
    path = cfg.out_dir / "violations.csv"
    rows_to_csv(trace.violations, ("t", "channel", "kind"), path)
    run.wrote(path)
    if trace.error:
        run.say(f"simulation stopped early: {trace.error}")
        return EXIT_NUMERIC
    rep = metrics_report(trace)
    run.wrote(write_json(rep.to_dict(), cfg.out_dir / "metrics.json"))
    if cfg.plots:
        from .plotting import plot_trace
        run.wrote(plot_trace(trace, cfg.out_dir / "trace.png"))
    if trace.violations:
        run.say(f"{len(trace.violations)} input-box violations logged")
    return EXIT_OK


def cmd_sweep(run: _Run, kind: str | None) -> int:
    cfg = run.cfg
    kind = kind or cfg.sweep.get("kind", "delta_k")
    if kind == "delta_k":
        if cfg.lin is None:
            raise ConfigError("delta_k sweep needs a plant with inputs")
        eps = cfg.sweep.get("epsilons", [-4.0, -2.0, -1.0, 0.0, 0.5, 0.8, 1.0])
        rows = delta_k_sweep(run.gains(), [float(e) for e in eps], cfg.lin)
        path = cfg.out_dir / "delta_k.csv"
        rows_to_csv(rows, ("epsilon", "R_K", "I_K"), path)
        if cfg.plots:
            from .plotting import plot_delta_k
            run.wrote(plot_delta_k(rows, cfg.out_dir / "delta_k.png"))
    elif kind == "disturbance":
        if cfg.x0 is None:
            raise ConfigError("sim.x0 is required for this plant")
        rows = disturbance_sweep(cfg.plant, run.gains(), cfg.sweep.get("amplitudes", [0.1, 0.2, 0.3]),
                                 cfg.sweep.get("omegas", [0.1, 0.15, 0.2]), cfg.sim, cfg.reference,
                                 cfg.x0, cfg.u0, cfg.disturbance.kind)
        path = cfg.out_dir / "disturbance.csv"
        rows_to_csv(rows, ("L_d", "omega", "channel", "itae", "pt", "mo", "ms", "st"), path)
        if cfg.plots:
            from .plotting import plot_disturbance_sweep
            run.wrote(plot_disturbance_sweep(rows, cfg.out_dir / "disturbance.png"))
    else:
        raise ConfigError(f"unknown sweep kind {kind!r}")
    run.wrote(path)
    return EXIT_OK


def cmd_verify_duffing(run: _Run) -> int:
    cfg = run.cfg
    if cfg.plant.name != "duffing":
        raise ConfigError("verify-duffing needs the duffing plant")
    p = cfg.raw["plant"].get("params", {})
    v = cfg.verify
    amp = float(cfg.disturbance.amplitude[1])
    trace, cert, verdict, f = duffing_check(
        alpha=p.get("alpha", 0.5), beta=p.get("beta", 0.25), delta=p.get("delta", 1.5),
        l_d=amp, omega=float(cfg.disturbance.omega[1]), x0=v.get("x0", (1.0, 0.0)),
        cfg=cfg.sim, slack=float(v.get("slack", 0.05)), l_f=v.get("l_f"))
    out = {"verdict": verdict.to_dict(), "certificate": cert.to_dict()}
    run.wrote(write_json(out, cfg.out_dir / "duffing_verdict.json"))
    path = cfg.out_dir / "duffing_trace.csv"
    trace.to_csv(path)
    run.wrote(path)
    if cfg.plots:
        from .plotting import plot_envelope
        norms = np.linalg.norm(f, axis=1)
        v0 = float(np.sqrt(f[0] @ cert.P @ f[0]))
        bound = envelope(cert.envelope_params(v0), trace.t) / np.sqrt(cert.lambda_min)
        run.wrote(plot_envelope(trace.t, norms, bound, cert.radius, cfg.out_dir / "duffing_envelope.png"))
    run.say(f"dominated {verdict.dominated}, final-quarter max {verdict.final_quarter_max:.4g}, "
            f"radius {verdict.radius:.4g}")
    return EXIT_OK if verdict.dominated and verdict.within_radius else EXIT_ANALYSIS


# --------------------------------------------------------------------------
# Entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run config, or the name of a shipped config")
    common.add_argument("--out", help="output directory (overrides output.dir)")
    common.add_argument("--seed", type=int, help="GA master seed (overrides tuning.ga.seed)")
    common.add_argument("--quiet", action="store_true", help="suppress progress messages")
    common.add_argument("--plots", action="store_true", help="also render PNG figures")

    parser = argparse.ArgumentParser(prog="robustpi", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("indicators", parents=[common], help="compute R_K and I_K for the configured gains")
    sub.add_parser("optimize", parents=[common], help="run the genetic gain search")
    sub.add_parser("simulate", parents=[common], help="simulate the closed loop, write trace and metrics")
    sp = sub.add_parser("sweep", parents=[common], help="gain-perturbation or disturbance sweep")
    sp.add_argument("--kind", choices=("delta_k", "disturbance"))
    sub.add_parser("verify-duffing", parents=[common], help="check the Duffing run against its envelope")
    sub.add_parser("list-configs", help="print the names of shipped configs")
    return parser


def _fail(kind: str, exc: Exception) -> None:
    print(f"robustpi: {kind}: {exc}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-configs":
        print("\n".join(shipped_configs()))
        return EXIT_OK
    try:
        cfg = parse_config(read_config(args.config), args.out, args.seed)
        if args.plots:
            cfg.plots = True
        run = _Run(cfg, args.quiet)
        if args.command == "indicators":
            return cmd_indicators(run)
        if args.command == "optimize":
            return cmd_optimize(run)
        if args.command == "simulate":
            return cmd_simulate(run)
        if args.command == "sweep":
            return cmd_sweep(run, args.kind)
        return cmd_verify_duffing(run)
    except ConfigError as exc:
        _fail("config error", exc)
        return EXIT_CONFIG
    except StabilityError as exc:
        _fail("analysis failure", exc)
        return EXIT_ANALYSIS
    except (NumericError, np.linalg.LinAlgError, FloatingPointError) as exc:
        _fail("numeric failure", exc)
        return EXIT_NUMERIC
    except RobustPIError as exc:
        _fail("error", exc)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
