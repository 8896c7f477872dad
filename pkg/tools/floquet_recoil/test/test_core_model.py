import math

import numpy as np
import pytest
from scipy import constants as codata
import yaml

from tools.floquet_recoil.core_model import (
    Constants,
    ElectronState,
    FieldConfig,
    FieldMode,
    Polarization,
    Verdict,
    derive_params,
    floquet_velocity,
    gaussian_to_si,
    positive_number,
    pulse_duration_ok,
    si_to_gaussian,
    validate_regime,
)
from tools.floquet_recoil.errors import ConfigError, DomainError, RelativisticInputError


def test_gaussian_constants_match_codata(constants):
    assert constants.c == pytest.approx(2.99792458e10, rel=1e-15)
    assert constants.e == pytest.approx(4.80320471e-10, rel=1e-8)
    assert constants.m_e == pytest.approx(9.1093837e-28, rel=1e-7)
    assert constants.alpha == pytest.approx(codata.fine_structure, rel=1e-8)


def test_constants_must_be_positive():
    with pytest.raises(DomainError):
        Constants(e=0.0, m_e=1.0, c=1.0, hbar=1.0)


def test_field_unit_conversion():
    assert si_to_gaussian(2.99792458e4) == pytest.approx(1.0, rel=1e-15)
    assert gaussian_to_si(si_to_gaussian(1.0e10)) == pytest.approx(1.0e10, rel=1e-15)
    with pytest.raises(DomainError):
        si_to_gaussian(0.0)
    with pytest.raises(DomainError):
        gaussian_to_si(-1.0)


def test_field_from_wavelength(field, constants):
    assert field.omega == pytest.approx(2.0 * math.pi * codata.c / 1.0e-6, rel=1e-14)
    assert field.polarization is Polarization.CLOCKWISE
    assert field.mode is FieldMode.HOMOGENEOUS
    np.testing.assert_array_equal(field.L, [0.0, 0.0, 1.0])
    np.testing.assert_array_equal(field.q0(constants), np.zeros(3))
    assert field.wavelength_cm(constants) == pytest.approx(1.0e-4, rel=1e-14)


def test_plane_wave_vectors(wave_field, constants):
    np.testing.assert_allclose(wave_field.q0(constants), [0.0, 0.0, wave_field.omega / constants.c])
    np.testing.assert_array_equal(wave_field.n0, [0.0, 0.0, 1.0])


def test_field_requires_one_frequency():
    with pytest.raises(DomainError):
        FieldConfig.from_si(1.0e10)
    with pytest.raises(DomainError):
        FieldConfig.from_si(1.0e10, omega_rad_per_s=1.0e15, wavelength_m=1.0e-6)


def test_field_rejects_non_positive_values():
    with pytest.raises(DomainError):
        FieldConfig(E0=-1.0, omega=1.0e15)
    with pytest.raises(DomainError):
        FieldConfig(E0=1.0, omega=0.0)


@pytest.mark.parametrize(
    "values, key",
    [
        ({"omega_rad_per_s": 1.0e15}, "E0_V_per_m"),
        ({"E0_V_per_m": 1.0e10}, "omega_rad_per_s"),
        ({"E0_V_per_m": 1.0e10, "omega_rad_per_s": 1.0e15, "wavelength_m": 1.0e-6}, "omega_rad_per_s"),
        ({"E0_V_per_m": 1.0e10, "omega_rad_per_s": 1.0e15, "E0": 1.0}, "E0"),
        ({"E0_V_per_m": "strong", "omega_rad_per_s": 1.0e15}, "E0_V_per_m"),
        ({"E0_V_per_m": 1.0e10, "wavelength_m": -1.0e-6}, "wavelength_m"),
        ({"E0_V_per_m": 1.0e10, "omega_rad_per_s": 1.0e15, "polarization": "linear"}, "polarization"),
        ({"E0_V_per_m": 1.0e10, "omega_rad_per_s": 1.0e15, "mode": "standing"}, "mode"),
        ({"E0_V_per_m": 1.0e10, "omega_rad_per_s": 1.0e15, "field_scale_m": 0}, "field_scale_m"),
    ],
)
def test_field_mapping_errors_name_the_key(values, key):
    with pytest.raises(ConfigError) as error:
        FieldConfig.from_mapping(values)
    assert error.value.key == key


def test_field_mapping_reads_yaml_exponents(field):
    # YAML 1.1 loads unsigned exponents as strings
    document = yaml.safe_load("E0_V_per_m: 1.0e10\nwavelength_m: 1e-6\nfield_scale_m: 1e-3\n")
    assert isinstance(document["E0_V_per_m"], str)
    cfg = FieldConfig.from_mapping(document)
    assert cfg.E0 == pytest.approx(field.E0, rel=1e-15)
    assert cfg.omega == pytest.approx(field.omega, rel=1e-15)


@pytest.mark.parametrize("value", ["strong", "nan", "-1e3", "0", True, None, [1.0]])
def test_positive_number_rejects(value):
    with pytest.raises(ConfigError) as error:
        positive_number("wavelength_m", value)
    assert error.value.key == "wavelength_m"


def test_positive_number_accepts():
    assert positive_number("E0_V_per_m", "1.0e10") == 1.0e10
    assert positive_number("E0_V_per_m", 3) == 3.0
    assert isinstance(positive_number("E0_V_per_m", 3), float)


def test_field_mapping_defaults():
    cfg = FieldConfig.from_mapping({"E0_V_per_m": 1.0e10, "wavelength_m": 1.0e-6})
    assert cfg.handedness == 1
    assert cfg.mode is FieldMode.HOMOGENEOUS


def test_derived_params_against_si(field, params):
    omega = field.omega
    v0_si = codata.e * 1.0e10 / (codata.m_e * omega)
    assert params.v0 / 100.0 == pytest.approx(v0_si, rel=1e-12)
    assert params.eta == pytest.approx(v0_si / codata.c, rel=1e-12)
    assert params.r0 == pytest.approx(params.v0 / omega, rel=1e-15)
    assert params.eps0 / 1.0e7 == pytest.approx(0.5 * codata.m_e * v0_si**2, rel=1e-12)

    acceleration = codata.e * 1.0e10 / codata.m_e
    larmor = codata.e**2 * acceleration**2 / (6.0 * math.pi * codata.epsilon_0 * codata.c**3)
    assert params.tau == pytest.approx(codata.hbar * omega / larmor, rel=1e-8)
    assert params.omega_tau == pytest.approx(omega * params.tau, rel=1e-15)
    assert params.lambda0 / 100.0 == pytest.approx(codata.hbar / (codata.m_e * codata.c), rel=1e-12)
    assert params.period == pytest.approx(2.0 * math.pi / omega, rel=1e-15)


def test_reference_drive_magnitudes(params):
    assert params.eta == pytest.approx(3.11e-3, rel=1e-2)
    assert params.tau == pytest.approx(1.1e-8, rel=0.1)
    assert params.omega_tau > 1.0e7
    assert params.photon_energy_ratio == pytest.approx(2.4e-6, rel=0.05)
    assert params.t_damp == pytest.approx(4.6e-3, rel=0.05)


def test_lifetime_scales_with_field(field, params, constants):
    quadrupled = derive_params(FieldConfig(E0=2.0 * field.E0, omega=field.omega), constants)
    assert quadrupled.tau == pytest.approx(params.tau / 4.0, rel=1e-12)
    assert quadrupled.v0 == pytest.approx(2.0 * params.v0, rel=1e-15)

    # tau = 3 hbar w m^2 c^3 / (2 e^4 E0^2) falls as 1/s when E0 and w scale together
    scaled = derive_params(FieldConfig(E0=3.0 * field.E0, omega=3.0 * field.omega), constants)
    assert scaled.tau == pytest.approx(params.tau / 3.0, rel=1e-12)
    assert scaled.eta == pytest.approx(params.eta, rel=1e-15)


def test_relativistic_drive_is_rejected(constants):
    with pytest.raises(RelativisticInputError):
        derive_params(FieldConfig.from_si(5.0e12, wavelength_m=1.0e-6), constants)


def test_tiny_field_has_infinite_lifetime(constants):
    params = derive_params(FieldConfig(E0=1.0e-200, omega=1.0e15), constants)
    assert math.isinf(params.tau)
    assert math.isinf(params.t_damp)


def test_electron_state(constants):
    state = ElectronState.from_si((3.0e5, 0.0, 0.0), constants)
    assert state.v_k == (3.0e7, 0.0, 0.0)
    assert state.speed == pytest.approx(3.0e7)
    np.testing.assert_allclose(state.beta, [3.0e7 / constants.c, 0.0, 0.0])
    assert state.eps_k == pytest.approx(0.5 * constants.m_e * 9.0e14, rel=1e-12)
    np.testing.assert_array_equal(ElectronState.at_rest(constants).velocity, np.zeros(3))


def test_electron_state_validation(constants):
    with pytest.raises(RelativisticInputError):
        ElectronState((constants.c, 0.0, 0.0), constants)
    with pytest.raises(DomainError):
        ElectronState((1.0, 2.0), constants)
    with pytest.raises(DomainError):
        ElectronState((math.nan, 0.0, 0.0), constants)


def test_floquet_velocity(field, counter_field, params, constants, drifting):
    state = drifting(1.0e-3)
    np.testing.assert_allclose(floquet_velocity(state, field, params, 0.0), state.velocity + [-params.v0, 0.0, 0.0])

    quarter = params.period / 4.0
    clockwise = floquet_velocity(ElectronState.at_rest(constants), field, params, quarter)
    counter = floquet_velocity(ElectronState.at_rest(constants), counter_field, params, quarter)
    assert clockwise[1] == pytest.approx(-params.v0, rel=1e-12)
    assert counter[1] == pytest.approx(params.v0, rel=1e-12)

    samples = floquet_velocity(state, field, params, np.linspace(0.0, params.period, 5))
    assert samples.shape == (3, 5)
    np.testing.assert_allclose(np.linalg.norm(samples - state.velocity[:, None], axis=0), params.v0, rtol=1e-12)


def test_regime_valid_at_reference(params, drifting):
    report = validate_regime(params, drifting(1.0e-3))
    assert report.verdict is Verdict.VALID
    assert report.valid
    assert all(report.flags.values())


@pytest.mark.parametrize(
    "E0, beta, verdict",
    [
        (6.4e11, 0.0, Verdict.MARGINAL),  # eta about 0.2
        (1.6e12, 0.0, Verdict.INVALID),  # eta about 0.5
        (1.0e10, 0.2, Verdict.MARGINAL),
        (1.0e10, 0.5, Verdict.INVALID),
    ],
)
def test_regime_thresholds(E0, beta, verdict, constants, drifting):
    params = derive_params(FieldConfig.from_si(E0, wavelength_m=1.0e-6), constants)
    report = validate_regime(params, drifting(beta))
    assert report.verdict is verdict


def test_regime_field_scale(params, drifting):
    state = drifting(1.0e-3)
    assert validate_regime(params, state, field_scale_cm=1.0).verdict is Verdict.VALID
    narrow = validate_regime(params, state, field_scale_cm=params.r0)
    assert narrow.verdict is Verdict.MARGINAL
    assert not narrow.warnings["r0_below_field_scale"]


def test_pulse_duration(params):
    assert pulse_duration_ok(params, 10.0 * params.tau)
    assert not pulse_duration_ok(params, params.tau)
    with pytest.raises(DomainError):
        pulse_duration_ok(params, 0.0)
