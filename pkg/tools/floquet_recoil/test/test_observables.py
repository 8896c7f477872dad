import math

import numpy as np
import pytest

from tools.floquet_recoil.core_model import ElectronState, FieldConfig, Verdict, derive_params
from tools.floquet_recoil.errors import DomainError, RelativisticInputError
from tools.floquet_recoil.observables import (
    Method,
    acceleration_estimate,
    anomalous_recoil,
    classical_recoil,
    force_report,
    lad_force,
    lad_time_average,
    larmor_power,
    lifetime,
    photon_drag,
    radiation_strength,
    relative_residual,
)

DIRECTIONS = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0), (1.0, -2.0, 0.7)]


def test_relative_residual():
    assert relative_residual([1.0, 1.0], [1.0, 1.0]) == 0.0
    assert relative_residual(1.1, 1.0) == pytest.approx(0.1)
    assert relative_residual([0.0, 3.0e-5], [0.0, 0.0]) == pytest.approx(3.0e-5)


def test_larmor_power(field, params, constants, rule):
    power = larmor_power(field, params, constants=constants)
    assert power == pytest.approx(2.0 / 3.0 * constants.e**4 * field.E0**2 / (constants.m_e**2 * constants.c**3), rel=1e-15)
    assert larmor_power(field, params, Method.QUADRATURE, rule, constants) == pytest.approx(power, rel=1e-10)

    # (2e^2/3c^3) |dv/dt|^2 with |dv/dt| = v0 w
    assert power == pytest.approx(2.0 * constants.e**2 / (3.0 * constants.c**3) * (params.v0 * field.omega) ** 2, rel=1e-12)

    doubled = FieldConfig(E0=2.0 * field.E0, omega=field.omega)
    assert larmor_power(doubled, derive_params(doubled, constants), constants=constants) == pytest.approx(4.0 * power, rel=1e-14)


def test_lifetime(field, params, constants, rule):
    assert lifetime(field, params) == params.tau
    assert lifetime(field, params, Method.QUADRATURE, rule, constants) == pytest.approx(params.tau, rel=1e-10)
    assert params.tau * larmor_power(field, params, constants=constants) == pytest.approx(constants.hbar * field.omega, rel=1e-12)


@pytest.mark.parametrize("beta", [1.0e-4, 1.0e-3, 1.0e-2])
@pytest.mark.parametrize("direction", DIRECTIONS)
def test_classical_recoil_paths_agree(beta, direction, field, params, rule, drifting):
    state = drifting(beta, direction)
    closed = classical_recoil(state, field, params)
    quadrature = classical_recoil(state, field, params, Method.QUADRATURE, rule)
    assert relative_residual(quadrature, closed) < 1e-8
    assert closed @ state.velocity < 0


def test_classical_recoil_defines_damping_rate(field, params, constants, drifting):
    state = drifting(1.0e-3)
    magnitude = np.linalg.norm(classical_recoil(state, field, params))
    assert magnitude == pytest.approx(constants.m_e * state.speed / params.t_damp, rel=1e-12)
    np.testing.assert_array_equal(classical_recoil(ElectronState.at_rest(constants), field, params), np.zeros(3))


def test_anomalous_recoil_direction(field, counter_field, params, constants):
    state = ElectronState((1.0e-3 * constants.c, 0.0, 0.0), constants)
    force = anomalous_recoil(state, field, params)
    expected = radiation_strength(field, constants) / (9.0 * constants.c**5) * params.eta**2 * constants.alpha * state.speed
    np.testing.assert_allclose(force, [0.0, expected, 0.0], rtol=1e-14, atol=0)
    np.testing.assert_array_equal(anomalous_recoil(state, counter_field, params), -force)


@pytest.mark.parametrize("direction", DIRECTIONS)
def test_anomalous_recoil_paths_agree(direction, field, params, rule, drifting):
    state = drifting(1.0e-3, direction)
    closed = anomalous_recoil(state, field, params)
    quadrature = anomalous_recoil(state, field, params, Method.QUADRATURE, rule)
    if np.linalg.norm(closed) == 0:
        assert np.linalg.norm(quadrature) < 1e-30
    else:
        assert relative_residual(quadrature, closed) < 1e-8
        assert abs(closed @ state.velocity) <= 1e-12 * np.linalg.norm(closed) * state.speed


@pytest.mark.parametrize("direction", [(1.0, 0.0, 0.0), (0.3, 0.9, 0.0), (1.0, 1.0, 0.5)])
@pytest.mark.parametrize("beta", [1.0e-4, 1.0e-2])
def test_force_ratio(direction, beta, field, params, constants, drifting):
    state = drifting(beta, direction)
    ratio = np.linalg.norm(anomalous_recoil(state, field, params)) / np.linalg.norm(classical_recoil(state, field, params))
    transverse = np.linalg.norm(state.velocity[:2]) / state.speed
    assert ratio == pytest.approx(constants.alpha / 6.0 * params.eta**2 * transverse, rel=1e-10)


def test_forces_rotate_with_drift(field, params, drifting):
    chi = 0.7
    rotation = np.array([[math.cos(chi), -math.sin(chi), 0.0], [math.sin(chi), math.cos(chi), 0.0], [0.0, 0.0, 1.0]])
    state = drifting(1.0e-3, (1.0, 0.2, 0.3))
    rotated = ElectronState(tuple(rotation @ state.velocity), state.constants)
    for force in (classical_recoil, anomalous_recoil):
        np.testing.assert_allclose(force(rotated, field, params), rotation @ force(state, field, params), rtol=1e-10, atol=0)


def test_handedness_leaves_classical_observables(field, counter_field, constants, drifting):
    state = drifting(1.0e-3, (1.0, 0.5, 0.0))
    params = derive_params(field, constants)
    counter_params = derive_params(counter_field, constants)
    assert counter_params.tau == params.tau
    np.testing.assert_array_equal(classical_recoil(state, counter_field, counter_params), classical_recoil(state, field, params))
    np.testing.assert_array_equal(
        anomalous_recoil(state, counter_field, counter_params), -anomalous_recoil(state, field, params)
    )


def test_photon_drag(wave_field, field, constants):
    params = derive_params(wave_field, constants)
    drag = photon_drag(wave_field, params, constants)
    assert drag[0] == 0.0 and drag[1] == 0.0
    np.testing.assert_allclose(drag, constants.hbar * wave_field.q0(constants) / params.tau, rtol=1e-12)
    assert drag[2] * constants.c == pytest.approx(larmor_power(wave_field, params, constants=constants), rel=1e-12)
    np.testing.assert_array_equal(photon_drag(field, derive_params(field, constants), constants), np.zeros(3))


def test_lad_force_at_rest(constants):
    force = lad_force(np.zeros(3), [1.0, 0.0, 0.0], [0.0, 2.0, 0.0], constants)
    np.testing.assert_allclose(force, 2.0 * constants.e**2 / (3.0 * constants.c**3) * np.array([0.0, 2.0, 0.0]))
    with pytest.raises(RelativisticInputError):
        lad_force([constants.c, 0.0, 0.0], np.zeros(3), np.zeros(3), constants)


def test_lad_average_vanishes_at_rest(field, params, constants):
    average = lad_time_average(ElectronState.at_rest(constants), field, params)
    scale = 2.0 / 3.0 * radiation_strength(field, constants) / constants.c**5 * params.v0
    assert np.linalg.norm(average) < 1e-6 * scale


def test_lad_average_matches_closed_form(constants):
    omega = 2.0 * math.pi * constants.c / 1.0e-4
    E0 = 1.0e-3 * constants.c * constants.m_e * omega / constants.e
    cfg = FieldConfig(E0=E0, omega=omega)
    params = derive_params(cfg, constants)
    assert params.eta == pytest.approx(1.0e-3)
    state = ElectronState((1.0e-3 * constants.c, 0.0, 0.0), constants)
    assert relative_residual(lad_time_average(state, cfg, params), classical_recoil(state, cfg, params)) < 1e-4


@pytest.mark.parametrize("direction", DIRECTIONS)
def test_lad_average_relativistic_correction(direction, field, params, drifting):
    state = drifting(1.0e-4, direction)
    residual = relative_residual(lad_time_average(state, field, params), classical_recoil(state, field, params))
    assert residual < 5.0 * params.eta**2


def test_lad_average_errors(field, params, constants):
    with pytest.raises(DomainError):
        lad_time_average(ElectronState.at_rest(constants), field, params, samples=1)
    fast = derive_params(FieldConfig.from_si(2.5e12, wavelength_m=1.0e-6), constants)
    state = ElectronState((0.5 * constants.c, 0.0, 0.0), constants)
    with pytest.raises(RelativisticInputError):
        lad_time_average(state, FieldConfig.from_si(2.5e12, wavelength_m=1.0e-6), fast)


def test_acceleration_estimate(field, params, constants, drifting):
    estimate = acceleration_estimate(drifting(1.0e-3), field, params)
    assert 1.0e3 / 3.0 < estimate.a_perp_per_beta_m_s2 < 3.0e3
    assert estimate.a_perp_m_s2 == pytest.approx(estimate.a_perp_per_beta_m_s2 * 1.0e-3, rel=1e-12)
    assert estimate.a_perp_cm_s2 == pytest.approx(100.0 * estimate.a_perp_m_s2)
    assert acceleration_estimate(ElectronState.at_rest(constants), field, params).a_perp_m_s2 == 0.0

    doubled = FieldConfig(E0=2.0 * field.E0, omega=field.omega)
    stronger = acceleration_estimate(drifting(1.0e-3), doubled, derive_params(doubled, constants))
    assert stronger.a_perp_m_s2 == pytest.approx(16.0 * estimate.a_perp_m_s2, rel=1e-12)


def test_force_report(field, params, rule, drifting):
    report = force_report(drifting(1.0e-3, (1.0, 1.0, 0.0)), field, params, rule)
    assert report.regime.verdict is Verdict.VALID
    assert report.residual_parallel < 1e-8
    assert report.residual_perp < 1e-8
    assert report.residual_power < 1e-10
    assert report.residual_lifetime < 1e-10
    assert report.notes

    record = report.to_record()
    for key in ("P_W", "tau_s", "F_parallel_N", "F_perp_N", "F_drag_N", "residual_parallel", "residual_perp", "regime_verdict"):
        assert key in record
    assert record["F_drag_N"] == [0.0, 0.0, 0.0]
    assert record["regime_verdict"] == "Valid"
    assert record["P_W"] == pytest.approx(report.P / 1.0e7)
    assert record["F_perp_N"][0] == pytest.approx(report.F_perp[0] / 1.0e5)
    assert record["methods"]["reported"] == "ClosedForm"
