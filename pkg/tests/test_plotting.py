import numpy as np

from robustpi import plotting
from robustpi.attractor import duffing_check
from robustpi.closedloop import SimConfig, simulate
from robustpi.indicators import compute_indicators
from robustpi.plants import aircraft_disturbance
from robustpi.tuner import DELTA_K_EPSILONS, SweepRow, delta_k_sweep

PNG = b"\x89PNG"


def is_png(path):
    return path.read_bytes()[:4] == PNG


def test_trace_and_eigenvalues(tmp_path, air_plant, air_params, air_lin, k_star):
    tr = simulate(air_plant, k_star, aircraft_disturbance(), air_params.reference,
                  air_params.initial_state, SimConfig(t_end=2.0), u0=air_params.initial_input)
    assert is_png(plotting.plot_trace(tr, tmp_path / "a" / "trace.png"))
    assert is_png(plotting.plot_eigenvalues(compute_indicators(air_lin, k_star), tmp_path / "eig.png"))


def test_history_and_sweeps(tmp_path, air_lin, k_star):
    assert is_png(plotting.plot_fitness_history([0.1, 0.2, 0.2], tmp_path / "h.png"))
    rows = delta_k_sweep(k_star, DELTA_K_EPSILONS + (10.0,), air_lin)
    assert is_png(plotting.plot_delta_k(rows, tmp_path / "dk.png"))
    srows = [SweepRow(l, w, c, 0, 0, 0, l * w, 0) for l in (0.1, 0.2) for w in (0.1, 0.2)
             for c in ("e_a", "e_b")]
    assert is_png(plotting.plot_disturbance_sweep(srows, tmp_path / "ds.png"))


def test_envelope(tmp_path):
    trace, cert, _, f = duffing_check()
    norms = np.linalg.norm(f, axis=1)
    assert is_png(plotting.plot_envelope(trace.t, norms, norms * 2, cert.radius, tmp_path / "env.png"))
