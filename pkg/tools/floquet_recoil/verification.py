"""
Self-verification suite: every closed form against its independent
quadrature or oracle path, at a reference drive of 1e10 V/m and 1 um.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from tools.floquet_recoil.core_model import (
    Constants,
    ElectronState,
    FieldConfig,
    Verdict,
    derive_params,
    validate_regime,
)
from tools.floquet_recoil.emission import classical_density_grid, floquet_density_grid, one_loop_angular_integral
from tools.floquet_recoil.numerics import QuadratureRule, bessel_j, jacobi_anger_check, sphere_integrate
from tools.floquet_recoil.observables import (
    DEFAULT_LAD_SAMPLES,
    Method,
    acceleration_estimate,
    anomalous_recoil,
    classical_recoil,
    lad_time_average,
    larmor_power,
    lifetime,
    photon_drag,
    relative_residual,
)
from tools.floquet_recoil.photon_geometry import polarization_sum_grid

logger = logging.getLogger(__name__)

REFERENCE_E0_V_PER_M = 1.0e10
REFERENCE_WAVELENGTH_M = 1.0e-6
REFERENCE_BETAS = (1.0e-4, 1.0e-3, 1.0e-2)
# arbitrary non-axial drift direction
REFERENCE_DIRECTION = np.array([1.0, 2.0, -0.5]) / math.sqrt(5.25)
ACCELERATION_ESTIMATE_M_S2 = 1.0e3


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual < self.tolerance)


def reference_field(constants: Optional[Constants] = None) -> FieldConfig:
    return FieldConfig.from_si(
        REFERENCE_E0_V_PER_M,
        wavelength_m=REFERENCE_WAVELENGTH_M,
        polarization="clockwise",
        mode="plane_wave",
        constants=constants,
    )


def _drifting(beta: float, constants: Constants) -> ElectronState:
    return ElectronState(tuple(beta * constants.c * REFERENCE_DIRECTION), constants)


def run_checks(
    quad_order: int = 64,
    phi_count: Optional[int] = None,
    lad_samples: int = DEFAULT_LAD_SAMPLES,
    constants: Optional[Constants] = None,
) -> List[CheckResult]:
    """
    Runs every check and returns the results in a fixed order.
    """
    k = constants or Constants.gaussian()
    rule = QuadratureRule.gauss_legendre(quad_order, phi_count)
    cfg = reference_field(k)
    params = derive_params(cfg, k)
    results = []

    def check(name: str, tolerance: float, evaluate: Callable[[], float]):
        residual = float(evaluate())
        result = CheckResult(name=name, residual=residual, tolerance=tolerance)
        logger.info(f"{name}: residual {residual:.3e} (tolerance {tolerance:.1e})")
        results.append(result)

    check(
        "larmor_power",
        1.0e-10,
        lambda: relative_residual(larmor_power(cfg, params, Method.QUADRATURE, rule, k), larmor_power(cfg, params, constants=k)),
    )
    check(
        "lifetime_rate",
        1.0e-10,
        lambda: relative_residual(lifetime(cfg, params, Method.QUADRATURE, rule, k), params.tau),
    )
    check(
        "lifetime_photon_energy",
        1.0e-12,
        lambda: relative_residual(params.tau * larmor_power(cfg, params, constants=k), k.hbar * cfg.omega),
    )
    for beta in REFERENCE_BETAS:
        state = _drifting(beta, k)
        check(
            f"classical_recoil_beta_{beta:.0e}",
            1.0e-8,
            lambda state=state: relative_residual(
                classical_recoil(state, cfg, params, Method.QUADRATURE, rule), classical_recoil(state, cfg, params)
            ),
        )

    state = _drifting(1.0e-3, k)
    perpendicular = anomalous_recoil(state, cfg, params)
    check(
        "anomalous_recoil",
        1.0e-8,
        lambda: relative_residual(anomalous_recoil(state, cfg, params, Method.QUADRATURE, rule), perpendicular),
    )
    check(
        "anomalous_recoil_orthogonal",
        1.0e-9,
        lambda: abs(perpendicular @ state.velocity) / (np.linalg.norm(perpendicular) * state.speed),
    )
    # F_perp only sees the drift component across the field axis
    planar = ElectronState((0.6e-3 * k.c, -0.8e-3 * k.c, 0.0), k)
    check(
        "force_ratio",
        1.0e-10,
        lambda: relative_residual(
            np.linalg.norm(anomalous_recoil(planar, cfg, params)) / np.linalg.norm(classical_recoil(planar, cfg, params)),
            k.alpha / 6.0 * params.eta**2,
        ),
    )

    def loop_integral():
        v = np.array([1.0, -0.5, 0.25])
        exact = 8.0 * math.pi / 3.0 * complex(v[0], v[1])
        return abs(one_loop_angular_integral(v, rule) - exact) / abs(exact)

    check("one_loop_angular_integral", 1.0e-10, loop_integral)

    drag = photon_drag(cfg, params, k)
    check(
        "photon_drag_lifetime",
        1.0e-12,
        lambda: relative_residual(drag, k.hbar * cfg.q0(k) / params.tau),
    )
    check(
        "photon_drag_pressure",
        1.0e-12,
        lambda: relative_residual(np.linalg.norm(drag) * k.c, larmor_power(cfg, params, constants=k)),
    )

    slow = _drifting(1.0e-4, k)
    # in-plane relativistic correction of the period average is 4 eta^2 at leading order
    check(
        "lad_period_average",
        5.0 * max(params.eta**2, 1.0e-8),
        lambda: relative_residual(lad_time_average(slow, cfg, params, lad_samples), classical_recoil(slow, cfg, params)),
    )

    def polarization_components():
        theta, phi = np.meshgrid(np.linspace(0.0, math.pi, 10), np.linspace(0.0, 2.0 * math.pi, 10), indexing="ij")
        tensor = polarization_sum_grid(theta, phi)
        s, c = np.sin(theta), np.cos(theta)
        expected = {
            (0, 0): 1.0 - s**2 * np.cos(phi) ** 2,
            (1, 1): 1.0 - s**2 * np.sin(phi) ** 2,
            (2, 2): s**2,
            (0, 1): -s**2 * np.sin(phi) * np.cos(phi),
            (0, 2): -s * c * np.cos(phi),
            (1, 2): -s * c * np.sin(phi),
        }
        worst = max(float(np.max(np.abs(tensor[i, j] - value))) for (i, j), value in expected.items())
        squared = np.einsum("ik...,kj...->ij...", tensor, tensor)
        return max(worst, float(np.max(np.abs(squared - tensor))))

    check("polarization_sum", 1.0e-13, polarization_components)

    check(
        "jacobi_anger",
        1.0e-10,
        lambda: max(jacobi_anger_check(xi, wt, 30) for xi in (0.1, 1.0, 2.0) for wt in np.linspace(0.0, 2.0 * math.pi, 9)),
    )

    def bessel_recurrence():
        x = np.concatenate(([0.1, 1.0, 5.0], np.linspace(0.5, 30.0, 60)))
        worst = 0.0
        for m in range(1, 20):
            lhs = bessel_j(m - 1, x) + bessel_j(m + 1, x)
            rhs = 2.0 * m / x * bessel_j(m, x)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        return worst

    check("bessel_recurrence", 1.0e-10, bessel_recurrence)

    check(
        "smooth_sphere_integral",
        1.0e-10,
        lambda: relative_residual(
            sphere_integrate(lambda theta, phi: np.exp(np.cos(theta)), rule),
            2.0 * math.pi * (math.e - 1.0 / math.e),
        ),
    )

    def floquet_reduction():
        theta, phi = np.meshgrid(np.linspace(0.0, math.pi, 17), 2.0 * math.pi * np.arange(16) / 16, indexing="ij")
        beta = state.beta
        exact = floquet_density_grid(beta, theta, phi, cfg, params, k)
        first_order = classical_density_grid(beta, theta, phi, params, k)
        return float(np.max(np.abs(exact - first_order) / first_order))

    check(
        "floquet_density_reduction",
        10.0 * (params.eta**2 + (state.speed / k.c) ** 2 + params.photon_energy_ratio),
        floquet_reduction,
    )

    check(
        "regime_reference_valid",
        0.5,
        lambda: 0.0 if validate_regime(params, state).verdict is Verdict.VALID and params.omega_tau > 10 else 1.0,
    )
    check(
        "acceleration_estimate",
        math.log10(3.0),
        lambda: abs(math.log10(acceleration_estimate(state, cfg, params).a_perp_per_beta_m_s2 / ACCELERATION_ESTIMATE_M_S2)),
    )

    return results
