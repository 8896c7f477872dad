"""
Physical constants, the circularly polarized drive field, derived classical
parameters of the dressed electron and the validity checks of the
non-relativistic Floquet treatment.

All internal quantities are Gaussian CGS. SI values enter and leave only
through the helpers of this module.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Mapping, Optional

import numpy as np
from scipy import constants as codata

from tools.floquet_recoil.errors import ConfigError, DomainError, RelativisticInputError

logger = logging.getLogger(__name__)

# 1 statvolt/cm expressed in V/m
STATVOLT_PER_CM_IN_V_PER_M = 2.99792458e4
CM_PER_M = 100.0
DYN_PER_N = 1.0e5
ERG_PER_J = 1.0e7

FIELD_CONFIG_KEYS = (
    "E0_V_per_m",
    "omega_rad_per_s",
    "wavelength_m",
    "polarization",
    "mode",
    "field_scale_m",
)


@dataclass(frozen=True)
class Constants:
    """
    Fundamental constants in Gaussian units.

    e is the magnitude of the electron charge; every observable depends on
    e² or e⁴ so the sign never enters.
    """

    e: float  # esu
    m_e: float  # g
    c: float  # cm/s
    hbar: float  # erg s

    def __post_init__(self):
        for name in ("e", "m_e", "c", "hbar"):
            if not getattr(self, name) > 0:
                raise DomainError(f"constant {name} must be strictly positive")

    @property
    def alpha(self) -> float:
        return self.e**2 / (self.hbar * self.c)

    @property
    def compton_wavelength(self) -> float:
        """Reduced Compton wavelength ħ/m_e c in cm."""
        return self.hbar / (self.m_e * self.c)

    @classmethod
    @lru_cache(maxsize=1)
    def gaussian(cls) -> "Constants":
        """
        CODATA values converted from SI.
        """
        return cls(
            e=codata.e * codata.c * 10.0,
            m_e=codata.m_e * 1.0e3,
            c=codata.c * CM_PER_M,
            hbar=codata.hbar * ERG_PER_J,
        )


def si_to_gaussian(E0_si: float) -> float:
    """
    Convert an electric field amplitude from V/m to statvolt/cm.
    """
    if not E0_si > 0:
        raise DomainError(f"field amplitude must be positive, got {E0_si} V/m")
    return E0_si / STATVOLT_PER_CM_IN_V_PER_M


def gaussian_to_si(E0_gaussian: float) -> float:
    if not E0_gaussian > 0:
        raise DomainError(f"field amplitude must be positive, got {E0_gaussian} statvolt/cm")
    return E0_gaussian * STATVOLT_PER_CM_IN_V_PER_M


def positive_number(key: str, value) -> float:
    """
    Positive finite configuration value. Strings are parsed as floats since
    YAML 1.1 reads exponents without a sign (1.0e10) as text.
    """
    if isinstance(value, bool):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(key, f"expected a number, got {value!r}")
    elif not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if not (math.isfinite(value) and value > 0):
        raise ConfigError(key, f"must be positive and finite, got {value!r}")
    return float(value)


class Polarization(Enum):
    CLOCKWISE = "clockwise"
    COUNTERCLOCKWISE = "counterclockwise"

    @property
    def handedness(self) -> int:
        return 1 if self is Polarization.CLOCKWISE else -1


class FieldMode(Enum):
    HOMOGENEOUS = "homogeneous"
    PLANE_WAVE = "plane_wave"


@dataclass(frozen=True)
class FieldConfig:
    """
    The circularly polarized drive. E0 is stored in statvolt/cm.
    """

    E0: float
    omega: float
    polarization: Polarization = Polarization.CLOCKWISE
    mode: FieldMode = FieldMode.HOMOGENEOUS

    def __post_init__(self):
        if not (np.isfinite(self.E0) and self.E0 > 0):
            raise DomainError(f"E0 must be positive and finite, got {self.E0}")
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise DomainError(f"omega must be positive and finite, got {self.omega}")

    @classmethod
    def from_si(
        cls,
        E0_V_per_m: float,
        omega_rad_per_s: Optional[float] = None,
        wavelength_m: Optional[float] = None,
        polarization="clockwise",
        mode="homogeneous",
        constants: Optional[Constants] = None,
    ) -> "FieldConfig":
        constants = constants or Constants.gaussian()
        if (omega_rad_per_s is None) == (wavelength_m is None):
            raise DomainError("exactly one of omega_rad_per_s and wavelength_m must be given")
        if wavelength_m is not None:
            if not wavelength_m > 0:
                raise DomainError(f"wavelength must be positive, got {wavelength_m} m")
            omega = 2.0 * math.pi * constants.c / (wavelength_m * CM_PER_M)
        else:
            omega = float(omega_rad_per_s)
        return cls(
            E0=si_to_gaussian(E0_V_per_m),
            omega=omega,
            polarization=Polarization(polarization),
            mode=FieldMode(mode),
        )

    @classmethod
    def from_mapping(cls, values: Mapping, constants: Optional[Constants] = None) -> "FieldConfig":
        """
        Build a field from the flat key-value configuration document.
        Unknown keys are rejected so that typos never pass silently.
        """
        for key in values:
            if key not in FIELD_CONFIG_KEYS:
                raise ConfigError(str(key), "unknown configuration key")
        if "E0_V_per_m" not in values:
            raise ConfigError("E0_V_per_m", "missing required key")
        has_omega = values.get("omega_rad_per_s") is not None
        has_wavelength = values.get("wavelength_m") is not None
        if has_omega == has_wavelength:
            raise ConfigError("omega_rad_per_s", "exactly one of omega_rad_per_s and wavelength_m is required")

        def number(key):
            return positive_number(key, values[key])

        E0 = number("E0_V_per_m")
        omega = number("omega_rad_per_s") if has_omega else None
        wavelength = number("wavelength_m") if has_wavelength else None
        if values.get("field_scale_m") is not None:
            number("field_scale_m")

        polarization = values.get("polarization", Polarization.CLOCKWISE.value)
        if polarization not in {p.value for p in Polarization}:
            raise ConfigError("polarization", f"expected clockwise or counterclockwise, got {polarization!r}")
        mode = values.get("mode", FieldMode.HOMOGENEOUS.value)
        if mode not in {m.value for m in FieldMode}:
            raise ConfigError("mode", f"expected homogeneous or plane_wave, got {mode!r}")

        return cls.from_si(
            E0,
            omega_rad_per_s=omega,
            wavelength_m=wavelength,
            polarization=polarization,
            mode=mode,
            constants=constants,
        )

    @property
    def handedness(self) -> int:
        return self.polarization.handedness

    @property
    def L(self) -> np.ndarray:
        """Unit vector of the field angular momentum."""
        return np.array([0.0, 0.0, float(self.handedness)])

    def q0(self, constants: Optional[Constants] = None) -> np.ndarray:
        """Wave vector of the drive; zero for the homogeneous field."""
        constants = constants or Constants.gaussian()
        if self.mode is FieldMode.HOMOGENEOUS:
            return np.zeros(3)
        return np.array([0.0, 0.0, self.omega / constants.c])

    @property
    def n0(self) -> np.ndarray:
        if self.mode is FieldMode.HOMOGENEOUS:
            return np.zeros(3)
        return np.array([0.0, 0.0, 1.0])

    def wavelength_cm(self, constants: Optional[Constants] = None) -> float:
        constants = constants or Constants.gaussian()
        return 2.0 * math.pi * constants.c / self.omega


@dataclass(frozen=True)
class DerivedParams:
    v0: float  # cm/s
    r0: float  # cm
    eps0: float  # erg
    tau: float  # s
    eta: float
    omega_tau: float
    lambda0: float  # cm
    omega: float  # rad/s
    t_damp: float  # s
    photon_energy_ratio: float

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega


def _ratio(numerator: float, denominator: float) -> float:
    if denominator == 0.0:
        return math.inf
    with np.errstate(over="ignore"):
        return float(np.float64(numerator) / np.float64(denominator))


def derive_params(cfg: FieldConfig, constants: Optional[Constants] = None) -> DerivedParams:
    """
    Classical rotation parameters and radiative time scales of the dressed
    electron. The lifetime is reported as infinity when E0 is so small that
    e⁴E0² underflows.
    """
    k = constants or Constants.gaussian()
    v0 = k.e * cfg.E0 / (k.m_e * cfg.omega)
    eta = v0 / k.c
    if eta >= 1.0:
        raise RelativisticInputError(f"v0/c = {eta:.6g} is not below 1")

    radiation_strength = k.e**4 * cfg.E0**2
    tau = _ratio(3.0 * k.hbar * cfg.omega * k.m_e**2 * k.c**3, 2.0 * radiation_strength)
    t_damp = _ratio(3.0 * k.m_e**3 * k.c**5, 2.0 * radiation_strength)
    return DerivedParams(
        v0=v0,
        r0=v0 / cfg.omega,
        eps0=0.5 * k.m_e * v0**2,
        tau=tau,
        eta=eta,
        omega_tau=cfg.omega * tau,
        lambda0=k.compton_wavelength,
        omega=cfg.omega,
        t_damp=t_damp,
        photon_energy_ratio=k.hbar * cfg.omega / (k.m_e * k.c**2),
    )


@dataclass(frozen=True)
class ElectronState:
    """
    Forward drift of the dressed electron, v_k = ħk/m_e in cm/s.
    """

    v_k: tuple
    constants: Constants = field(default_factory=Constants.gaussian, repr=False, compare=False)

    def __post_init__(self):
        velocity = np.asarray(self.v_k, dtype=float)
        if velocity.shape != (3,) or not np.all(np.isfinite(velocity)):
            raise DomainError(f"v_k must be a finite 3-vector, got {self.v_k!r}")
        object.__setattr__(self, "v_k", tuple(float(x) for x in velocity))
        if np.linalg.norm(velocity) >= self.constants.c:
            raise RelativisticInputError(f"|v_k|/c = {np.linalg.norm(velocity) / self.constants.c:.6g} is not below 1")

    @classmethod
    def from_si(cls, vk_m_per_s, constants: Optional[Constants] = None) -> "ElectronState":
        constants = constants or Constants.gaussian()
        return cls(tuple(np.asarray(vk_m_per_s, dtype=float) * CM_PER_M), constants)

    @classmethod
    def at_rest(cls, constants: Optional[Constants] = None) -> "ElectronState":
        return cls((0.0, 0.0, 0.0), constants or Constants.gaussian())

    @property
    def velocity(self) -> np.ndarray:
        return np.array(self.v_k)

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.velocity))

    @property
    def beta(self) -> np.ndarray:
        return self.velocity / self.constants.c

    @property
    def k(self) -> np.ndarray:
        return self.constants.m_e * self.velocity / self.constants.hbar

    @property
    def eps_k(self) -> float:
        k = self.k
        return self.constants.hbar**2 * float(k @ k) / (2.0 * self.constants.m_e)


def floquet_velocity(state: ElectronState, cfg: FieldConfig, params: DerivedParams, t):
    """
    Velocity of the dressed electron, drift plus rotation, at time(s) t.
    Returns an array of shape (3,) or (3, len(t)).
    """
    phase = np.asarray(t, dtype=float) * cfg.omega
    rotation = params.v0 * np.array([-np.cos(phase), -cfg.handedness * np.sin(phase), np.zeros_like(phase)])
    drift = state.velocity.reshape((3,) + (1,) * phase.ndim)
    return drift + rotation


class Verdict(Enum):
    VALID = "Valid"
    MARGINAL = "Marginal"
    INVALID = "Invalid"


# hard limits: Invalid when crossed
ETA_LIMIT = 0.3
BETA_LIMIT = 0.3
OMEGA_TAU_LIMIT = 10.0
PHOTON_ENERGY_LIMIT = 0.01
# soft limits: Marginal when crossed
ETA_WARN = 0.1
BETA_WARN = 0.1
OMEGA_TAU_WARN = 100.0
PHOTON_ENERGY_WARN = 1.0e-3
FIELD_SCALE_FRACTION = 0.1


@dataclass(frozen=True)
class RegimeReport:
    eta: float
    beta_k: float
    omega_tau: float
    photon_energy_ratio: float
    verdict: Verdict
    flags: dict
    warnings: dict

    @property
    def valid(self) -> bool:
        return self.verdict is not Verdict.INVALID


def validate_regime(
    p: DerivedParams, s: ElectronState, field_scale_cm: Optional[float] = None
) -> RegimeReport:
    """
    Evaluate the dimensionless groups that bound the treatment and classify
    the regime. Never raises.
    """
    beta_k = s.speed / s.constants.c
    flags = {
        "eta_below_limit": p.eta < ETA_LIMIT,
        "beta_k_below_limit": beta_k < BETA_LIMIT,
        "omega_tau_above_limit": p.omega_tau > OMEGA_TAU_LIMIT,
        "photon_energy_below_limit": p.photon_energy_ratio < PHOTON_ENERGY_LIMIT,
    }
    warnings = {
        "eta_small": p.eta < ETA_WARN,
        "beta_k_small": beta_k < BETA_WARN,
        "omega_tau_large": p.omega_tau > OMEGA_TAU_WARN,
        "photon_energy_small": p.photon_energy_ratio < PHOTON_ENERGY_WARN,
    }
    if field_scale_cm is not None:
        warnings["r0_below_field_scale"] = p.r0 < FIELD_SCALE_FRACTION * field_scale_cm

    if not all(flags.values()):
        verdict = Verdict.INVALID
    elif not all(warnings.values()):
        verdict = Verdict.MARGINAL
    else:
        verdict = Verdict.VALID

    if verdict is not Verdict.VALID:
        failed = [name for name, ok in {**flags, **warnings}.items() if not ok]
        logger.warning(f"Regime {verdict.value}: {', '.join(failed)}")

    return RegimeReport(
        eta=p.eta,
        beta_k=beta_k,
        omega_tau=p.omega_tau,
        photon_energy_ratio=p.photon_energy_ratio,
        verdict=verdict,
        flags=flags,
        warnings=warnings,
    )


def pulse_duration_ok(p: DerivedParams, duration_s: float) -> bool:
    """
    A pulse must outlast the radiative lifetime by an order of magnitude for
    the stationary rates to apply.
    """
    if not duration_s > 0:
        raise DomainError(f"pulse duration must be positive, got {duration_s}")
    return duration_s >= 10.0 * p.tau
