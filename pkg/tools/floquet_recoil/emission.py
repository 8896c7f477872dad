"""
Photon emission at the main radiation harmonic by the field-dressed electron.

Rates are per unit time and per solid angle with the delta function in the
photon wave number collapsed analytically, so no normalization volume ever
appears. Every density splits into

    rest part      D0 = C (1 + cos^2 t)
    velocity part  D1, linear in beta = v_k/c
    loop part      DL, the one-loop correction, linear in beta

with C = e^2 v0^2 w / (8 pi hbar c^3). Velocity corrections are kept to first
order in 1/c.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd

from tools.floquet_recoil.core_model import Constants, DerivedParams, ElectronState, FieldConfig
from tools.floquet_recoil.errors import DomainError, UnsupportedOrderError
from tools.floquet_recoil.numerics import QuadratureRule, bessel_j, sphere_integrate
from tools.floquet_recoil.photon_geometry import (
    PhotonDirection,
    PolarizationSumTensor,
    exact_wave_number,
    polarization_sum_grid,
    unit_vectors,
)

logger = logging.getLogger(__name__)

MAX_HARMONIC = 8
MIN_PATTERN_GRID = (16, 32)
PATTERN_COLUMNS = ["theta_rad", "phi_rad", "intensity_erg_per_s_sr", "classical_part", "loop_part"]


def rate_prefactor(params: DerivedParams, constants: Constants) -> float:
    """C = e^2 v0^2 w / (8 pi hbar c^3), in 1/(s sr)."""
    return constants.e**2 * params.v0**2 * params.omega / (8.0 * np.pi * constants.hbar * constants.c**3)


def intensity_prefactor(params: DerivedParams, constants: Constants) -> float:
    """e^2 w^2 v0^2 / (8 pi c^3), in erg/(s sr)."""
    return constants.e**2 * params.omega**2 * params.v0**2 / (8.0 * np.pi * constants.c**3)


def _beta_dot_n(beta, n: np.ndarray) -> np.ndarray:
    return np.tensordot(np.asarray(beta, dtype=float), n, axes=1)


def one_vertex_bracket(beta, theta, phi) -> np.ndarray:
    """
    Polarization-summed square bracket of the one-vertex amplitude:
    1 + cos^2 t + 2 cos^2 t sin t (beta_x cos p + beta_y sin p) - 2 beta_z cos t sin^2 t.
    """
    beta = np.asarray(beta, dtype=float)
    n = unit_vectors(theta, phi)
    cos_theta = n[2]
    transverse = beta[0] * n[0] + beta[1] * n[1]
    return 1.0 + cos_theta**2 + 2.0 * cos_theta**2 * transverse - 2.0 * beta[2] * cos_theta * (1.0 - cos_theta**2)


def doppler_wave_number(beta, n: np.ndarray, omega: float, c: float) -> np.ndarray:
    """First-order photon wave number (w/c)(1 + beta.n)."""
    return omega / c * (1.0 + _beta_dot_n(beta, n))


def rest_density_grid(theta, phi, params: DerivedParams, constants: Constants) -> np.ndarray:
    cos_theta = unit_vectors(theta, phi)[2]
    return rate_prefactor(params, constants) * (1.0 + cos_theta**2)


def classical_density_grid(beta, theta, phi, params: DerivedParams, constants: Constants) -> np.ndarray:
    """
    One-vertex rate density. The bracket is multiplied by the delta-function
    Jacobian q1^2/|dE/dq| which is 1 + 2 beta.n at first order.
    """
    n = unit_vectors(theta, phi)
    rest = 1.0 + n[2] ** 2
    first_order = one_vertex_bracket(beta, theta, phi) + 2.0 * _beta_dot_n(beta, n) * rest
    return rate_prefactor(params, constants) * first_order


def loop_bracket(beta, handedness: int, eta: float, alpha: float, theta, phi) -> np.ndarray:
    """
    L (2/3)(v0/c)^2 alpha (beta_y sin t cos p - beta_x sin t sin p).
    """
    beta = np.asarray(beta, dtype=float)
    n = unit_vectors(theta, phi)
    return handedness * (2.0 / 3.0) * eta**2 * alpha * (beta[1] * n[0] - beta[0] * n[1])


def loop_density_grid(beta, theta, phi, cfg: FieldConfig, params: DerivedParams, constants: Constants) -> np.ndarray:
    return rate_prefactor(params, constants) * loop_bracket(beta, cfg.handedness, params.eta, constants.alpha, theta, phi)


def energy_flux_grid(beta, theta, phi, cfg: FieldConfig, params: DerivedParams, constants: Constants):
    """
    hbar c q1 times the rate densities, expanded to first order in beta.
    Returns (classical, loop) in erg/(s sr).
    """
    n = unit_vectors(theta, phi)
    photon_energy = constants.hbar * params.omega
    classical = photon_energy * (
        classical_density_grid(beta, theta, phi, params, constants)
        + _beta_dot_n(beta, n) * rest_density_grid(theta, phi, params, constants)
    )
    loop = photon_energy * loop_density_grid(beta, theta, phi, cfg, params, constants)
    return classical, loop


def intensity_grid(beta, theta, phi, cfg: FieldConfig, params: DerivedParams, constants: Constants):
    """
    Closed-form radiation pattern, returns (classical, loop) in erg/(s sr).
    """
    beta = np.asarray(beta, dtype=float)
    n = unit_vectors(theta, phi)
    cos_theta = n[2]
    classical = (
        1.0
        + cos_theta**2
        + (5.0 * cos_theta**2 + 3.0) * (beta[0] * n[0] + beta[1] * n[1])
        + beta[2] * (5.0 * cos_theta**2 + 1.0) * cos_theta
    )
    loop = loop_bracket(beta, cfg.handedness, params.eta, constants.alpha, theta, phi)
    prefactor = intensity_prefactor(params, constants)
    return prefactor * classical, prefactor * loop


@dataclass(frozen=True)
class AngularDensity:
    direction: PhotonDirection
    rate_density: float  # 1/(s sr)
    classical_part: float
    loop_part: float


def classical_density(
    state: ElectronState, direction: PhotonDirection, cfg: FieldConfig, params: DerivedParams
) -> float:
    """
    Photon emission rate per solid angle of the one-vertex process.
    """
    return float(classical_density_grid(state.beta, direction.theta_q, direction.phi_q, params, state.constants))


def loop_density(
    state: ElectronState, direction: PhotonDirection, cfg: FieldConfig, params: DerivedParams
) -> float:
    """
    One-loop correction to the emission rate per solid angle; changes sign
    with the field handedness.
    """
    return float(loop_density_grid(state.beta, direction.theta_q, direction.phi_q, cfg, params, state.constants))


def angular_density(
    state: ElectronState, direction: PhotonDirection, cfg: FieldConfig, params: DerivedParams
) -> AngularDensity:
    classical = classical_density(state, direction, cfg, params)
    loop = loop_density(state, direction, cfg, params)
    return AngularDensity(direction=direction, rate_density=classical + loop, classical_part=classical, loop_part=loop)


def energy_flux_density(
    state: ElectronState, direction: PhotonDirection, cfg: FieldConfig, params: DerivedParams
) -> float:
    """
    Radiated power per solid angle, hbar c q1 times the total rate density.
    """
    classical, loop = energy_flux_grid(state.beta, direction.theta_q, direction.phi_q, cfg, params, state.constants)
    return float(classical + loop)


@dataclass(frozen=True)
class ReducedBracket:
    """
    Square bracket of the one-vertex matrix element divided by -v0/2, as a
    complex linear form in the photon polarization vector: bracket = vector . e.
    """

    m: int
    vector: np.ndarray  # complex, shape (3,) or (3, *grid)

    def polarization_summed_square(self, tensor) -> np.ndarray:
        """
        sum over polarizations of |vector . e|^2 = vector_i S_ij conj(vector_j).
        """
        matrix = tensor.matrix if isinstance(tensor, PolarizationSumTensor) else np.asarray(tensor)
        return np.real(np.einsum("i...,ij...,j...->...", self.vector, matrix, np.conj(self.vector)))


def matrix_element_bracket(
    m: int,
    state: ElectronState,
    q,
    direction_theta,
    direction_phi,
    params: DerivedParams,
    emission: bool = True,
) -> ReducedBracket:
    """
    Harmonic-m bracket of the single-photon matrix element:

        (v_k.e) J_m(xi) e^{i m p} - v0 (e_x - i e_y)/2 J_{m+1}(xi) e^{i(m+1)p}
                                  - v0 (e_x + i e_y)/2 J_{m-1}(xi) e^{i(m-1)p}

    with xi = -+(v0/w) q sin t (minus for emission). q may be a scalar or a
    grid matching the direction angles.
    """
    if abs(m) > MAX_HARMONIC:
        raise UnsupportedOrderError(f"harmonic {m} exceeds the supported range |m| <= {MAX_HARMONIC}")
    theta = np.asarray(direction_theta, dtype=float)
    phi = np.asarray(direction_phi, dtype=float)
    sign = -1.0 if emission else 1.0
    xi = sign * params.v0 / params.omega * np.asarray(q, dtype=float) * np.sin(theta)
    xi, phi = np.broadcast_arrays(xi, phi)

    drift = state.velocity.reshape((3,) + (1,) * xi.ndim)
    lowering = np.array([1.0, -1.0j, 0.0]).reshape((3,) + (1,) * xi.ndim)
    raising = np.array([1.0, 1.0j, 0.0]).reshape((3,) + (1,) * xi.ndim)
    bracket = (
        drift * bessel_j(m, xi) * np.exp(1j * m * phi)
        - 0.5 * params.v0 * lowering * bessel_j(m + 1, xi) * np.exp(1j * (m + 1) * phi)
        - 0.5 * params.v0 * raising * bessel_j(m - 1, xi) * np.exp(1j * (m - 1) * phi)
    )
    return ReducedBracket(m=m, vector=bracket / (-0.5 * params.v0))


def floquet_density_grid(beta, theta, phi, cfg: FieldConfig, params: DerivedParams, constants: Constants) -> np.ndarray:
    """
    One-vertex rate density at harmonic 1 without any expansion in 1/c:
    exact photon wave number, exact delta-function Jacobian and Bessel
    functions of the full argument.
    """
    beta = np.asarray(beta, dtype=float)
    state = ElectronState(tuple(beta * constants.c), constants)
    n = unit_vectors(theta, phi)
    doppler = _beta_dot_n(beta, n)
    q1 = exact_wave_number(1, doppler, params, constants)
    bracket = matrix_element_bracket(1, state, q1, theta, phi, params)
    summed = bracket.polarization_summed_square(polarization_sum_grid(theta, phi))
    jacobian = 1.0 - doppler + params.lambda0 * q1
    return (
        constants.e**2
        * q1
        * params.v0**2
        * summed
        / (8.0 * np.pi * constants.hbar * constants.c**2 * jacobian)
    )


def floquet_density(
    state: ElectronState, direction: PhotonDirection, cfg: FieldConfig, params: DerivedParams
) -> float:
    return float(floquet_density_grid(state.beta, direction.theta_q, direction.phi_q, cfg, params, state.constants))


def one_loop_angular_integral(v_k, rule: Optional[QuadratureRule] = None) -> complex:
    """
    Angular integral over the virtual photon direction of
    sum_pol [v_x |e_x|^2 + i v_y |e_y|^2]; equals (8 pi/3)(v_x + i v_y).
    """
    rule = rule or QuadratureRule.gauss_legendre(64)
    v = np.asarray(v_k, dtype=float)

    def integrand(theta, phi):
        tensor = polarization_sum_grid(theta, phi)
        return v[0] * tensor[0, 0] + 1j * v[1] * tensor[1, 1]

    return complex(sphere_integrate(integrand, rule))


@dataclass(frozen=True)
class RadiationPattern:
    theta: np.ndarray
    phi: np.ndarray
    intensity: np.ndarray  # erg/(s sr), shape (n_theta, n_phi)
    classical_part: np.ndarray
    loop_part: np.ndarray
    metadata: dict = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        """
        One row per grid point, theta-outer ordering.
        """
        theta, phi = np.meshgrid(self.theta, self.phi, indexing="ij")
        return pd.DataFrame(
            {
                "theta_rad": theta.ravel(),
                "phi_rad": phi.ravel(),
                "intensity_erg_per_s_sr": self.intensity.ravel(),
                "classical_part": self.classical_part.ravel(),
                "loop_part": self.loop_part.ravel(),
            },
            columns=PATTERN_COLUMNS,
        )


def radiation_pattern(
    state: ElectronState,
    cfg: FieldConfig,
    params: DerivedParams,
    grid=(64, 128),
    method: str = "closed_form",
) -> RadiationPattern:
    """
    Radiation pattern I(theta, phi) on a uniform grid, theta in [0, pi] with
    both poles, phi in [0, 2 pi) periodic.

    method "closed_form" evaluates the pattern formula, "density" weights the
    emission rates with the photon energy.
    """
    n_theta, n_phi = (int(g) for g in grid)
    if n_theta < MIN_PATTERN_GRID[0] or n_phi < MIN_PATTERN_GRID[1]:
        raise DomainError(f"pattern grid {n_theta}x{n_phi} is below the minimum {MIN_PATTERN_GRID[0]}x{MIN_PATTERN_GRID[1]}")
    theta_axis = np.linspace(0.0, np.pi, n_theta)
    phi_axis = 2.0 * np.pi * np.arange(n_phi) / n_phi
    theta, phi = np.meshgrid(theta_axis, phi_axis, indexing="ij")

    if method == "closed_form":
        classical, loop = intensity_grid(state.beta, theta, phi, cfg, params, state.constants)
    elif method == "density":
        classical, loop = energy_flux_grid(state.beta, theta, phi, cfg, params, state.constants)
    else:
        raise DomainError(f"unknown pattern method {method!r}")

    logger.info(f"Computed {n_theta}x{n_phi} radiation pattern with method {method}")
    return RadiationPattern(
        theta=theta_axis,
        phi=phi_axis,
        intensity=classical + loop,
        classical_part=classical,
        loop_part=loop,
        metadata={
            "E0_statvolt_per_cm": cfg.E0,
            "omega_rad_per_s": cfg.omega,
            "polarization": cfg.polarization.value,
            "mode": cfg.mode.value,
            "v_k_cm_per_s": list(state.v_k),
            "n_theta": n_theta,
            "n_phi": n_phi,
            "method": method,
        },
    )
