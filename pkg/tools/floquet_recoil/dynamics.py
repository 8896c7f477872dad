"""
Guiding-center motion of the dressed electron under the period-averaged
recoil forces.

    dr/dt = v_k
    dv_k/dt = -G v_k + W [L x v_k] (+ F0/m_e in plane-wave mode)

with the damping rate G = 1/t_damp and the bend rate W.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from tools.floquet_recoil.core_model import (
    CM_PER_M,
    Constants,
    DerivedParams,
    ElectronState,
    FieldConfig,
    FieldMode,
    validate_regime,
)
from tools.floquet_recoil.errors import DomainError, RegimeError
from tools.floquet_recoil.numerics import OdeState, rk4_integrate
from tools.floquet_recoil.observables import photon_drag, radiation_strength

logger = logging.getLogger(__name__)

MAX_DT_FRACTION = 0.01
TRAJECTORY_COLUMNS = ["t_s", "x_m", "y_m", "z_m", "vx_m_s", "vy_m_s", "vz_m_s", "speed_m_s"]


@dataclass(frozen=True)
class TrajectoryConfig:
    v_k: tuple  # cm/s
    t_end: float  # s
    dt: float  # s
    include_drag: bool = False
    output_stride: int = 1
    include_anomalous: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= self.dt:
            raise DomainError(f"t_end {self.t_end} must be at least dt {self.dt}")
        if self.output_stride < 1:
            raise DomainError(f"output_stride must be at least 1, got {self.output_stride}")
        object.__setattr__(self, "v_k", tuple(float(x) for x in self.v_k))


@dataclass(frozen=True)
class TrajectoryPoint:
    t: float
    r: np.ndarray  # cm
    v_k: np.ndarray  # cm/s
    speed: float
    work_rate_perp: float  # erg/s


def damping_rate(params: DerivedParams) -> float:
    return 1.0 / params.t_damp


def heading_drift_rate(cfg: FieldConfig, params: DerivedParams, constants: Optional[Constants] = None) -> float:
    """
    Signed rotation rate of the drift velocity about z, in rad/s.
    """
    k = constants or Constants.gaussian()
    return radiation_strength(cfg, k) / (9.0 * k.m_e * k.c**5) * params.eta**2 * k.alpha * cfg.handedness


def newton_rhs(
    v_k,
    cfg: FieldConfig,
    params: DerivedParams,
    constants: Optional[Constants] = None,
    include_drag: bool = False,
    include_anomalous: bool = True,
) -> np.ndarray:
    """
    Acceleration of the drift velocity in cm/s^2.
    """
    k = constants or Constants.gaussian()
    v_k = np.asarray(v_k, dtype=float)
    acceleration = -damping_rate(params) * v_k
    if include_anomalous:
        bend = abs(heading_drift_rate(cfg, params, k))
        acceleration = acceleration + bend * np.cross(cfg.L, v_k)
    if include_drag and cfg.mode is FieldMode.PLANE_WAVE:
        acceleration = acceleration + photon_drag(cfg, params, k) / k.m_e
    return acceleration


def simulate(
    trajectory: TrajectoryConfig,
    cfg: FieldConfig,
    params: DerivedParams,
    constants: Optional[Constants] = None,
) -> List[TrajectoryPoint]:
    """
    RK4 integration of position and drift velocity from t = 0 to t_end.
    """
    k = constants or Constants.gaussian()
    if trajectory.dt > MAX_DT_FRACTION * params.t_damp:
        raise DomainError(
            f"dt = {trajectory.dt:.6g} s exceeds t_damp/100 = {MAX_DT_FRACTION * params.t_damp:.6g} s"
        )
    initial = ElectronState(trajectory.v_k, k)
    regime = validate_regime(params, initial)
    if not regime.valid:
        raise RegimeError(regime)
    if trajectory.include_drag and cfg.mode is FieldMode.HOMOGENEOUS:
        logger.info("Drag requested in homogeneous mode, no wave momentum to transfer")

    perp_coefficient = abs(heading_drift_rate(cfg, params, k)) * k.m_e if trajectory.include_anomalous else 0.0

    def rhs(t, y):
        v = y[3:]
        a = newton_rhs(v, cfg, params, k, trajectory.include_drag, trajectory.include_anomalous)
        return np.concatenate((v, a))

    start = OdeState(t=0.0, y=np.concatenate((np.zeros(3), initial.velocity)))
    states = rk4_integrate(rhs, start, trajectory.t_end, trajectory.dt, trajectory.output_stride)
    logger.info(f"Integrated {len(states)} trajectory points up to t = {trajectory.t_end:.6g} s")

    points = []
    for state in states:
        v = state.y[3:]
        force_perp = perp_coefficient * np.cross(cfg.L, v)
        points.append(
            TrajectoryPoint(
                t=state.t,
                r=state.y[:3].copy(),
                v_k=v.copy(),
                speed=float(np.linalg.norm(v)),
                work_rate_perp=float(force_perp @ v),
            )
        )
    return points


def heading_change(points: Sequence[TrajectoryPoint]) -> float:
    """
    Signed angle between the first and last in-plane drift velocity.
    """
    first, last = points[0].v_k, points[-1].v_k
    cross = first[0] * last[1] - first[1] * last[0]
    dot = first[0] * last[0] + first[1] * last[1]
    return math.atan2(cross, dot)


def measured_drift_rate(points: Sequence[TrajectoryPoint]) -> float:
    span = points[-1].t - points[0].t
    if not span > 0:
        raise DomainError("trajectory must span a positive time interval")
    return heading_change(points) / span


def work_integral(points: Sequence[TrajectoryPoint]) -> float:
    """
    Trapezoid sum of F_perp . v_k dt over the emitted points, in erg.
    """
    t = np.array([p.t for p in points])
    rate = np.array([p.work_rate_perp for p in points])
    return float(np.sum(0.5 * (rate[1:] + rate[:-1]) * np.diff(t)))


def guiding_center_metadata(cfg: FieldConfig, params: DerivedParams, constants: Optional[Constants] = None) -> dict:
    return {
        "r0_m": params.r0 / CM_PER_M,
        "omega_bend_rad_per_s": heading_drift_rate(cfg, params, constants),
        "t_damp_s": params.t_damp,
    }


def trajectory_frame(points: Sequence[TrajectoryPoint]) -> pd.DataFrame:
    r = np.array([p.r for p in points]) / CM_PER_M
    v = np.array([p.v_k for p in points]) / CM_PER_M
    return pd.DataFrame(
        {
            "t_s": [p.t for p in points],
            "x_m": r[:, 0],
            "y_m": r[:, 1],
            "z_m": r[:, 2],
            "vx_m_s": v[:, 0],
            "vy_m_s": v[:, 1],
            "vz_m_s": v[:, 2],
            "speed_m_s": np.array([p.speed for p in points]) / CM_PER_M,
        },
        columns=TRAJECTORY_COLUMNS,
    )
