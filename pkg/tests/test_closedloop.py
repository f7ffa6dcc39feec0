import math

import numpy as np
import pytest
from scipy.linalg import expm

from robustpi.closedloop import (
    PIState,
    SimConfig,
    bumpless_integral,
    input_rate_series,
    pi_step,
    simulate,
    velocity_form_jacobian,
)
from robustpi.errors import DimensionError, ParameterError
from robustpi.indicators import GainPair, assemble_AK0
from robustpi.plants import SinusoidDisturbance, aircraft_disturbance, integrator, linear_plant


def test_simconfig_validation():
    with pytest.raises(ParameterError):
        SimConfig(step=0.2)
    with pytest.raises(ParameterError):
        SimConfig(t_end=-1.0)
    with pytest.raises(ParameterError):
        SimConfig(stride=0)
    cfg = SimConfig()
    assert cfg.n_steps == 2000 and cfg.dt_out == pytest.approx(0.1)


def test_pi_step_rectangle_rule():
    st = PIState.initial(GainPair([[2.0]], [[3.0]]))
    st, u = pi_step(st, [1.0], 0.1)
    assert st.integral[0] == pytest.approx(0.1)
    assert u[0] == pytest.approx(2.0 + 0.3)
    with pytest.raises(ParameterError):
        pi_step(st, [1.0], 0.0)


def test_matches_matrix_exponential():
    # x' = u with e = -x: augmented (x, z) is linear, compare against expm
    plant = integrator()
    g = GainPair([[2.0]], [[1.0]])
    cfg = SimConfig(t_end=5.0, step=0.01, stride=10)
    tr = simulate(plant, g, SinusoidDisturbance.zero(1), [0.0], [1.0], cfg)
    m = np.array([[-2.0, 1.0], [-1.0, 0.0]])
    for k in (10, 25, 50):
        s = expm(m * tr.t[k]) @ np.array([1.0, 0.0])
        assert tr.x[k, 0] == pytest.approx(s[0], abs=1e-9)


def test_rk4_fourth_order():
    plant = linear_plant([[0.0, 1.0], [-4.0, -0.4]], np.zeros((2, 1)))
    g = GainPair.zeros(1, 2)
    exact = expm(np.array([[0.0, 1.0], [-4.0, -0.4]]) * 2.0) @ np.array([1.0, 0.0])
    errs = []
    for h in (0.05, 0.025):
        tr = simulate(plant, g, SinusoidDisturbance.zero(2), np.zeros(2), [1.0, 0.0],
                      SimConfig(t_end=2.0, step=h, stride=1))
        errs.append(np.abs(tr.x[-1] - exact).max())
    assert errs[0] / errs[1] == pytest.approx(16.0, rel=0.15)


def test_bumpless_start_reproduces_u0(air_plant, air_params, k_star):
    tr = simulate(air_plant, k_star, aircraft_disturbance(), air_params.reference,
                  air_params.initial_state, SimConfig(t_end=1.0), u0=air_params.initial_input)
    np.testing.assert_allclose(tr.u[0], air_params.initial_input, atol=1e-12)
    z = bumpless_integral(k_star, air_params.initial_error, air_params.initial_input)
    np.testing.assert_allclose(k_star.kp @ air_params.initial_error + k_star.ki @ z, air_params.initial_input)


def test_trace_columns_and_csv(air_plant, air_params, k_star):
    tr = simulate(air_plant, k_star, aircraft_disturbance(), air_params.reference,
                  air_params.initial_state, SimConfig(t_end=1.0), u0=air_params.initial_input)
    assert tr.columns() == ["t", "x_1", "x_2", "e_1", "e_2", "u_1", "u_2", "udot_1", "udot_2", "d_1", "d_2"]
    text = tr.to_csv()
    lines = text.splitlines()
    assert len(lines) == 1 + len(tr)
    back = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    np.testing.assert_array_equal(back, tr.table())
    np.testing.assert_allclose(tr.t, np.arange(11) * 0.1)


def test_error_sign_convention(air_plant, air_params, k_star):
    tr = simulate(air_plant, k_star, aircraft_disturbance(), air_params.reference,
                  air_params.initial_state, SimConfig(t_end=1.0), u0=air_params.initial_input)
    np.testing.assert_allclose(tr.e, air_params.reference - tr.x)


def test_violations_logged(air_plant, air_params, k_star):
    tr = simulate(air_plant, k_star, aircraft_disturbance(), air_params.reference,
                  air_params.initial_state, SimConfig(t_end=2.0), u0=air_params.initial_input)
    assert (0.0, "phi", "magnitude") in tr.violations


def test_clipping_keeps_inputs_in_box(air_plant, air_params, k_star):
    tr = simulate(air_plant, k_star, aircraft_disturbance(), air_params.reference,
                  air_params.initial_state, SimConfig(t_end=5.0, clip_inputs=True),
                  u0=air_params.initial_input)
    lo, hi = air_params.input_box
    assert np.all(tr.u >= lo - 1e-12) and np.all(tr.u <= hi + 1e-12)
    assert not any(kind == "magnitude" for _, _, kind in tr.violations)


def test_domain_error_truncates(air_plant, air_params, k_star):
    # without a bumpless start the first roll command is about -2.09 rad
    tr = simulate(air_plant, k_star, SinusoidDisturbance.zero(2), air_params.reference,
                  air_params.initial_state, SimConfig(t_end=1.0))
    assert tr.error is not None and tr.truncated_at == 0.0
    assert len(tr) == 0


def test_domain_error_mid_run(air_plant, air_params):
    # a destabilizing roll gain drives phi past pi/2 after a few samples
    g = GainPair([[-5.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]])
    tr = simulate(air_plant, g, SinusoidDisturbance.zero(2), air_params.reference,
                  air_params.initial_state, SimConfig(t_end=10.0), u0=air_params.initial_input)
    assert tr.error is not None
    assert 0.0 < tr.truncated_at < 10.0
    assert len(tr) >= 1


def test_dimension_errors(air_plant, k_star):
    with pytest.raises(DimensionError):
        simulate(air_plant, GainPair.zeros(1, 2), SinusoidDisturbance.zero(2), np.zeros(2), np.zeros(2))
    with pytest.raises(DimensionError):
        simulate(air_plant, k_star, SinusoidDisturbance.zero(3), np.zeros(2), np.zeros(2))


def test_rate_series():
    r = input_rate_series(np.array([0.0, 1.0, 3.0]), 0.5)
    np.testing.assert_allclose(r[:, 0], [2.0, 2.0, 4.0])


def test_velocity_form_linear_plant_exact():
    a = np.array([[0.0, 1.0], [-1.0, -1.0]])
    b = np.array([[0.0], [1.0]])
    p = linear_plant(a, b)
    g = GainPair([[-1.0, 0.5]], [[0.2, -0.3]])
    jac = velocity_form_jacobian(p, g)
    np.testing.assert_allclose(jac, assemble_AK0(p.error_linearization(), g), atol=1e-8)


def test_determinism(air_plant, air_params, k_star):
    args = (air_plant, k_star, aircraft_disturbance(), air_params.reference, air_params.initial_state,
            SimConfig(t_end=2.0), air_params.initial_input)
    assert simulate(*args).to_csv() == simulate(*args).to_csv()


def test_disturbance_recorded(air_plant, air_params, k_star):
    tr = simulate(air_plant, k_star, aircraft_disturbance(0.1, 0.15), air_params.reference,
                  air_params.initial_state, SimConfig(t_end=1.0), u0=air_params.initial_input)
    np.testing.assert_allclose(tr.d[-1], [0.1 * math.sin(0.15), 0.1 * math.cos(0.15)])
