"""
Photon directions, polarization-summed projectors and the photon wave
numbers allowed by energy-momentum conservation.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from tools.floquet_recoil.core_model import Constants, DerivedParams, FieldConfig
from tools.floquet_recoil.errors import DomainError, NumericError, RelativisticInputError


def unit_vectors(theta, phi) -> np.ndarray:
    """
    n = (sin t cos p, sin t sin p, cos t) with a leading axis of length 3.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    sin_theta = np.sin(theta)
    return np.stack(np.broadcast_arrays(sin_theta * np.cos(phi), sin_theta * np.sin(phi), np.cos(theta)))


@dataclass(frozen=True)
class PhotonDirection:
    theta_q: float
    phi_q: float

    def __post_init__(self):
        if not (0.0 <= self.theta_q <= math.pi):
            raise DomainError(f"theta_q must lie in [0, pi], got {self.theta_q}")
        if not math.isfinite(self.phi_q):
            raise DomainError(f"phi_q must be finite, got {self.phi_q}")
        object.__setattr__(self, "phi_q", float(self.phi_q % (2.0 * math.pi)))

    @property
    def n_q(self) -> np.ndarray:
        return unit_vectors(self.theta_q, self.phi_q)

    def antipodal(self) -> "PhotonDirection":
        return PhotonDirection(math.pi - self.theta_q, self.phi_q + math.pi)


@dataclass(frozen=True)
class PolarizationSumTensor:
    """
    S_ij = sum over the two transverse polarizations of e_i e_j*.
    """

    matrix: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))


def polarization_sum_grid(theta, phi) -> np.ndarray:
    """
    Projector I - n n^T on a grid, shaped (3, 3, *grid).
    """
    n = unit_vectors(theta, phi)
    identity = np.eye(3).reshape((3, 3) + (1,) * (n.ndim - 1))
    return identity - n[:, None] * n[None, :]


def polarization_sum(n: PhotonDirection) -> PolarizationSumTensor:
    return PolarizationSumTensor(polarization_sum_grid(n.theta_q, n.phi_q))


@dataclass(frozen=True)
class PhotonWaveNumber:
    m: int
    q_m: float  # 1/cm, exact root
    first_order_q: float  # 1/cm, (m w/c)(1 + v.n/c)

    @property
    def relative_gap(self) -> float:
        return abs(self.q_m - self.first_order_q) / self.q_m


def exact_wave_number(m: int, doppler: np.ndarray, params: DerivedParams, constants: Constants) -> np.ndarray:
    """
    Positive root of (lambda0/2) q^2 + a q - m w/c = 0 with a = 1 - v.n/c,
    written in the cancellation-free form 2 m w/c / (sqrt(a^2 + 2 m lambda0 w/c) + a).
    """
    a = 1.0 - np.asarray(doppler, dtype=float)
    recoil = 2.0 * m * params.lambda0 * params.omega / constants.c
    discriminant = a * a + recoil
    if np.any(discriminant < 0):
        raise NumericError("negative discriminant in the photon wave-number equation")
    return 2.0 * m * params.omega / constants.c / (np.sqrt(discriminant) + a)


def allowed_photon_q(
    m: int,
    v,
    direction: PhotonDirection,
    cfg: FieldConfig,
    params: DerivedParams,
    constants: Optional[Constants] = None,
) -> PhotonWaveNumber:
    """
    Photon wave number emitted at harmonic m in direction n by an electron
    drifting with velocity v (cm/s).
    """
    constants = constants or Constants.gaussian()
    if m < 1:
        raise DomainError(f"harmonic index must be at least 1, got {m}")
    v = np.asarray(v, dtype=float)
    if np.linalg.norm(v) >= constants.c:
        raise RelativisticInputError("drift speed must stay below c")
    doppler = float(v @ direction.n_q) / constants.c
    q_m = float(exact_wave_number(m, doppler, params, constants))
    first_order_q = m * cfg.omega / constants.c * (1.0 + doppler)
    return PhotonWaveNumber(m=m, q_m=q_m, first_order_q=first_order_q)
