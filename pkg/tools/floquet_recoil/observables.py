"""
Integral observables of the dressed electron: radiated power, lifetime and
the three recoil forces. Each has a closed form and an independent
quadrature path over the emission densities.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np

from tools.floquet_recoil.core_model import (
    DYN_PER_N,
    ERG_PER_J,
    CM_PER_M,
    Constants,
    DerivedParams,
    ElectronState,
    FieldConfig,
    FieldMode,
    RegimeReport,
    floquet_velocity,
    validate_regime,
)
from tools.floquet_recoil.emission import (
    classical_density_grid,
    intensity_grid,
    loop_density_grid,
    rest_density_grid,
)
from tools.floquet_recoil.errors import DomainError, RelativisticInputError
from tools.floquet_recoil.numerics import QuadratureRule, sphere_integrate
from tools.floquet_recoil.photon_geometry import unit_vectors

logger = logging.getLogger(__name__)

DEFAULT_QUAD_ORDER = 64
DEFAULT_LAD_SAMPLES = 10000


class Method(Enum):
    CLOSED_FORM = "ClosedForm"
    QUADRATURE = "Quadrature"


def _rule(rule: Optional[QuadratureRule]) -> QuadratureRule:
    return rule or QuadratureRule.gauss_legendre(DEFAULT_QUAD_ORDER)


def radiation_strength(cfg: FieldConfig, constants: Constants) -> float:
    """e^4 E0^2 / m_e^2, the combination every observable is built from."""
    return constants.e**4 * cfg.E0**2 / constants.m_e**2


def relative_residual(value, reference) -> float:
    """
    |value - reference| / |reference| with vector norms; absolute difference
    when the reference vanishes.
    """
    value = np.asarray(value, dtype=float)
    reference = np.asarray(reference, dtype=float)
    scale = float(np.linalg.norm(reference))
    difference = float(np.linalg.norm(value - reference))
    return difference / scale if scale > 0 else difference


def larmor_power(
    cfg: FieldConfig,
    params: DerivedParams,
    method: Method = Method.CLOSED_FORM,
    rule: Optional[QuadratureRule] = None,
    constants: Optional[Constants] = None,
) -> float:
    """
    Total radiated power at rest, P0 = (2/3) e^4 E0^2 / (m_e^2 c^3) in erg/s.
    """
    k = constants or Constants.gaussian()
    if method is Method.CLOSED_FORM:
        return 2.0 / 3.0 * radiation_strength(cfg, k) / k.c**3

    at_rest = np.zeros(3)

    def pattern(theta, phi):
        classical, loop = intensity_grid(at_rest, theta, phi, cfg, params, k)
        return classical + loop

    return float(sphere_integrate(pattern, _rule(rule)))


def lifetime(
    cfg: FieldConfig,
    params: DerivedParams,
    method: Method = Method.CLOSED_FORM,
    rule: Optional[QuadratureRule] = None,
    constants: Optional[Constants] = None,
) -> float:
    """
    Radiative lifetime of the Floquet state in seconds.
    """
    k = constants or Constants.gaussian()
    if method is Method.CLOSED_FORM:
        return params.tau
    total_rate = sphere_integrate(lambda theta, phi: rest_density_grid(theta, phi, params, k), _rule(rule))
    return 1.0 / float(total_rate)


def _momentum_loss(density, state: ElectronState, params: DerivedParams, rule: QuadratureRule) -> np.ndarray:
    """
    -hbar (w/c) times the integral of n * density over the sphere.
    """
    k = state.constants
    photon_momentum = k.hbar * params.omega / k.c

    def integrand(theta, phi):
        return unit_vectors(theta, phi) * density(theta, phi)

    return -photon_momentum * np.asarray(sphere_integrate(integrand, rule))


def classical_recoil(
    state: ElectronState,
    cfg: FieldConfig,
    params: DerivedParams,
    method: Method = Method.CLOSED_FORM,
    rule: Optional[QuadratureRule] = None,
) -> np.ndarray:
    """
    Radiation-reaction force antiparallel to the drift, in dyn.

    The quadrature path contracts the photon momentum hbar q1 n with the
    one-vertex density. The symmetric rest density is subtracted first; it
    carries no net momentum and would only cost significance.
    """
    k = state.constants
    if method is Method.CLOSED_FORM:
        return -2.0 / 3.0 * radiation_strength(cfg, k) / k.c**5 * state.velocity

    beta = state.beta

    def asymmetric(theta, phi):
        rest = rest_density_grid(theta, phi, params, k)
        doppler = np.tensordot(beta, unit_vectors(theta, phi), axes=1)
        return classical_density_grid(beta, theta, phi, params, k) - rest + doppler * rest

    return _momentum_loss(asymmetric, state, params, _rule(rule))


def anomalous_recoil(
    state: ElectronState,
    cfg: FieldConfig,
    params: DerivedParams,
    method: Method = Method.CLOSED_FORM,
    rule: Optional[QuadratureRule] = None,
) -> np.ndarray:
    """
    One-loop recoil perpendicular to the drift,
    F = (1/9)(e^4 E0^2/m_e^2 c^5)(v0/c)^2 alpha [L x v_k], in dyn.
    """
    k = state.constants
    if method is Method.CLOSED_FORM:
        coefficient = radiation_strength(cfg, k) / (9.0 * k.c**5) * params.eta**2 * k.alpha
        return coefficient * np.cross(cfg.L, state.velocity)

    beta = state.beta
    return _momentum_loss(
        lambda theta, phi: loop_density_grid(beta, theta, phi, cfg, params, k), state, params, _rule(rule)
    )


def photon_drag(cfg: FieldConfig, params: DerivedParams, constants: Optional[Constants] = None) -> np.ndarray:
    """
    Momentum handed over by the wave per emitted photon, F0 = hbar q0 / tau.
    Zero for the homogeneous field.
    """
    k = constants or Constants.gaussian()
    if cfg.mode is FieldMode.HOMOGENEOUS:
        logger.info("Homogeneous field mode carries no wave momentum, photon drag is zero")
        return np.zeros(3)
    return 2.0 / 3.0 * radiation_strength(cfg, k) / k.c**4 * cfg.n0


def lad_force(v, v_dot, v_ddot, constants: Optional[Constants] = None) -> np.ndarray:
    """
    Instantaneous radiation-reaction force of a point charge,

        (2e^2/3c^3) [g^2 a' + g^4 v (v.a')/c^2 + 3 g^4 a (v.a)/c^2]

    with a = dv/dt, a' = d^2v/dt^2. Accepts (3,) or (3, N) arrays.
    """
    k = constants or Constants.gaussian()
    v = np.asarray(v, dtype=float)
    v_dot = np.asarray(v_dot, dtype=float)
    v_ddot = np.asarray(v_ddot, dtype=float)
    speed_sq = np.sum(v * v, axis=0)
    if np.any(speed_sq >= k.c**2):
        raise RelativisticInputError("velocity reaches the speed of light")
    gamma_sq = 1.0 / (1.0 - speed_sq / k.c**2)
    return (
        2.0
        * k.e**2
        / (3.0 * k.c**3)
        * (
            gamma_sq * v_ddot
            + gamma_sq**2 * v * np.sum(v * v_ddot, axis=0) / k.c**2
            + 3.0 * gamma_sq**2 * v_dot * np.sum(v * v_dot, axis=0) / k.c**2
        )
    )


def lad_time_average(
    state: ElectronState,
    cfg: FieldConfig,
    params: DerivedParams,
    samples: int = DEFAULT_LAD_SAMPLES,
) -> np.ndarray:
    """
    Radiation-reaction force averaged over one field period along the
    dressed-electron velocity. Uniform samples of a periodic integrand, so
    the plain mean is the trapezoid rule.
    """
    if samples < 2:
        raise DomainError(f"at least two samples per period are required, got {samples}")
    k = state.constants
    t = params.period * np.arange(samples) / samples
    v = floquet_velocity(state, cfg, params, t)
    phase = cfg.omega * t
    handedness = cfg.handedness
    zeros = np.zeros_like(phase)
    v_dot = params.v0 * cfg.omega * np.array([np.sin(phase), -handedness * np.cos(phase), zeros])
    v_ddot = params.v0 * cfg.omega**2 * np.array([np.cos(phase), handedness * np.sin(phase), zeros])
    return lad_force(v, v_dot, v_ddot, k).mean(axis=1)


@dataclass(frozen=True)
class AccelerationEstimate:
    a_perp_cm_s2: float
    a_perp_m_s2: float
    beta_k: float
    a_perp_per_beta_m_s2: float


def acceleration_estimate(state: ElectronState, cfg: FieldConfig, params: DerivedParams) -> AccelerationEstimate:
    """
    Magnitude of the transverse acceleration and its value per unit v_k/c.
    """
    k = state.constants
    a_perp = float(np.linalg.norm(anomalous_recoil(state, cfg, params))) / k.m_e
    per_beta = radiation_strength(cfg, k) / (9.0 * k.m_e * k.c**4) * params.eta**2 * k.alpha
    return AccelerationEstimate(
        a_perp_cm_s2=a_perp,
        a_perp_m_s2=a_perp / CM_PER_M,
        beta_k=state.speed / k.c,
        a_perp_per_beta_m_s2=per_beta / CM_PER_M,
    )


@dataclass(frozen=True)
class ForceReport:
    P: float  # erg/s
    tau: float  # s
    F_parallel: np.ndarray  # dyn
    F_perp: np.ndarray
    F_drag: np.ndarray
    P_quadrature: float
    tau_quadrature: float
    residual_parallel: float
    residual_perp: float
    residual_power: float
    residual_lifetime: float
    regime: RegimeReport
    methods: dict = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def to_record(self) -> dict:
        """
        Flat SI document.
        """
        return {
            "P_W": self.P / ERG_PER_J,
            "tau_s": self.tau,
            "F_parallel_N": [float(x) / DYN_PER_N for x in self.F_parallel],
            "F_perp_N": [float(x) / DYN_PER_N for x in self.F_perp],
            "F_drag_N": [float(x) / DYN_PER_N for x in self.F_drag],
            "residual_parallel": self.residual_parallel,
            "residual_perp": self.residual_perp,
            "regime_verdict": self.regime.verdict.value,
            "P_W_quadrature": self.P_quadrature / ERG_PER_J,
            "tau_s_quadrature": self.tau_quadrature,
            "residual_power": self.residual_power,
            "residual_lifetime": self.residual_lifetime,
            "methods": dict(self.methods),
            "notes": list(self.notes),
        }


def force_report(
    state: ElectronState,
    cfg: FieldConfig,
    params: DerivedParams,
    rule: Optional[QuadratureRule] = None,
    field_scale_cm: Optional[float] = None,
) -> ForceReport:
    """
    Every observable by both paths. Closed forms are reported, quadrature
    values enter through the residuals.
    """
    rule = _rule(rule)
    k = state.constants
    regime = validate_regime(params, state, field_scale_cm)

    power = larmor_power(cfg, params, constants=k)
    power_quadrature = larmor_power(cfg, params, Method.QUADRATURE, rule, k)
    tau_quadrature = lifetime(cfg, params, Method.QUADRATURE, rule, k)
    parallel = classical_recoil(state, cfg, params)
    perpendicular = anomalous_recoil(state, cfg, params)
    residual_parallel = relative_residual(classical_recoil(state, cfg, params, Method.QUADRATURE, rule), parallel)
    residual_perp = relative_residual(anomalous_recoil(state, cfg, params, Method.QUADRATURE, rule), perpendicular)

    notes = []
    if cfg.mode is FieldMode.HOMOGENEOUS:
        notes.append("homogeneous mode: photon drag is zero")
    logger.info(f"Force report at quadrature order {rule.order}: residuals {residual_parallel:.3g}, {residual_perp:.3g}")

    return ForceReport(
        P=power,
        tau=params.tau,
        F_parallel=parallel,
        F_perp=perpendicular,
        F_drag=photon_drag(cfg, params, k),
        P_quadrature=power_quadrature,
        tau_quadrature=tau_quadrature,
        residual_parallel=residual_parallel,
        residual_perp=residual_perp,
        residual_power=relative_residual(power_quadrature, power),
        residual_lifetime=relative_residual(tau_quadrature, params.tau),
        regime=regime,
        methods={
            "reported": Method.CLOSED_FORM.value,
            "cross_check": Method.QUADRATURE.value,
            "quad_order": rule.order,
        },
        notes=notes,
    )
