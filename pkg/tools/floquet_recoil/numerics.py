"""
Special functions, quadrature over the unit sphere and fixed-step ODE
integration shared by the physics modules.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional

import numpy as np

from tools.floquet_recoil.errors import DivergenceError, DomainError, IntegrationError, UnsupportedOrderError

logger = logging.getLogger(__name__)

MAX_BESSEL_ORDER = 64
SERIES_RADIUS = 2.0
SERIES_TERMS = 40


def _bessel_series(m: int, x: np.ndarray) -> np.ndarray:
    """
    Defining series of J_m for m >= 0, summed over a fixed number of terms.
    """
    half = 0.5 * x
    term = half**m / math.factorial(m)
    total = term.copy()
    quarter = half * half
    for j in range(1, SERIES_TERMS):
        term = -term * quarter / (j * (j + m))
        total = total + term
    return total


def _bessel_miller(m: int, x: np.ndarray) -> np.ndarray:
    """
    Backward recurrence from a high even start order, normalized with
    J_0 + 2 sum J_2k = 1. Valid for x != 0 and m >= 0.
    """
    x_max = float(np.max(np.abs(x)))
    start = max(m, int(x_max)) + 20 + int(math.sqrt(40.0 * max(m, x_max, 1.0)))
    start += start % 2

    # current holds the unnormalized J_order, after holds J_(order+1)
    after = np.zeros_like(x)
    current = np.full_like(x, 1.0e-30)
    norm = 2.0 * current
    wanted = np.zeros_like(x)
    for order in range(start, 0, -1):
        below = (2.0 * order / x) * current - after
        after, current = current, below
        if order - 1 == m:
            wanted = current.copy()
        if (order - 1) % 2 == 0 and order > 1:
            norm = norm + 2.0 * current
        big = np.abs(current) > 1.0e250
        if np.any(big):
            scale = np.where(big, 1.0e-250, 1.0)
            after, current, norm, wanted = after * scale, current * scale, norm * scale, wanted * scale
    norm = norm + current
    return wanted / norm


def bessel_j(m: int, x):
    """
    Bessel function of the first kind J_m(x) for integer |m| <= 64.

    Uses the power series for |x| < 2 and Miller's backward recurrence
    otherwise; accepts scalars or arrays.
    """
    m = int(m)
    if abs(m) > MAX_BESSEL_ORDER:
        raise UnsupportedOrderError(f"Bessel order {m} exceeds {MAX_BESSEL_ORDER}")
    scalar = np.ndim(x) == 0
    values = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(values)):
        raise DomainError("Bessel argument must be finite")

    order = abs(m)
    magnitude = np.abs(values)
    result = np.zeros_like(magnitude)
    near = magnitude < SERIES_RADIUS
    if np.any(near):
        result[near] = _bessel_series(order, magnitude[near])
    if np.any(~near):
        result[~near] = _bessel_miller(order, magnitude[~near])

    # J_m(-x) = (-1)^m J_m(x), J_{-m}(x) = (-1)^m J_m(x)
    if order % 2 == 1:
        result = np.where(values < 0, -result, result)
        if m < 0:
            result = -result
    return float(result[0]) if scalar else result


def jacobi_anger_check(xi: float, omega_t: float, truncation: int) -> float:
    """
    Residual of the truncated Jacobi-Anger expansion
    exp(i xi sin wt) = sum_m J_m(xi) exp(i m wt), |m| <= truncation.
    """
    orders = range(-truncation, truncation + 1)
    series = sum(bessel_j(m, xi) * np.exp(1j * m * omega_t) for m in orders)
    return float(abs(np.exp(1j * xi * math.sin(omega_t)) - series))


@dataclass(frozen=True)
class QuadratureRule:
    """
    Product rule on the sphere: Gauss-Legendre in cos(theta) times a uniform
    periodic trapezoid in phi.
    """

    order: int
    nodes: tuple
    weights: tuple
    phi_count: int

    def __post_init__(self):
        if self.order < 1:
            raise DomainError(f"quadrature order must be positive, got {self.order}")
        if self.phi_count < 4:
            raise DomainError(f"phi_count must be at least 4, got {self.phi_count}")
        if len(self.nodes) != self.order or len(self.weights) != self.order:
            raise DomainError("nodes and weights must both have `order` entries")

    @classmethod
    def gauss_legendre(cls, order: int, phi_count: Optional[int] = None) -> "QuadratureRule":
        return _gauss_legendre_rule(int(order), int(phi_count) if phi_count else max(4, 2 * int(order)))

    @property
    def cos_theta(self) -> np.ndarray:
        return np.array(self.nodes)

    @property
    def theta(self) -> np.ndarray:
        return np.arccos(self.cos_theta)

    @property
    def phi(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.phi_count) / self.phi_count

    def grid(self):
        """
        Returns (theta, phi, solid_angle_weights), each shaped (order, phi_count).
        """
        theta, phi = np.meshgrid(self.theta, self.phi, indexing="ij")
        weights = np.outer(np.array(self.weights), np.full(self.phi_count, 2.0 * np.pi / self.phi_count))
        return theta, phi, weights


@lru_cache(maxsize=16)
def _gauss_legendre_rule(order: int, phi_count: int) -> QuadratureRule:
    if order < 1:
        raise DomainError(f"quadrature order must be positive, got {order}")
    nodes, weights = np.polynomial.legendre.leggauss(order)
    logger.debug(f"Built Gauss-Legendre rule of order {order} with {phi_count} azimuthal points")
    return QuadratureRule(order=order, nodes=tuple(nodes), weights=tuple(weights), phi_count=phi_count)


def sphere_integrate(f: Callable, rule: QuadratureRule):
    """
    Integrate f(theta, phi) over the full solid angle.

    f receives mesh arrays of shape (order, phi_count) and returns values of
    that shape, or with leading component axes (e.g. (3, order, phi_count)).
    The reduction runs in a fixed order so results are bit-stable.
    """
    theta, phi, weights = rule.grid()
    values = np.asarray(f(theta, phi))
    if values.ndim < 2:
        values = np.broadcast_to(values, weights.shape)
    else:
        values = np.broadcast_to(values, values.shape[:-2] + weights.shape)
    if not np.all(np.isfinite(values)):
        raise IntegrationError("integrand is not finite on the quadrature grid")
    result = np.tensordot(values, weights, axes=([-2, -1], [0, 1]))
    return result.item() if np.ndim(result) == 0 else result


def gauss_integrate(g: Callable, rule: QuadratureRule):
    """
    One-dimensional integral of g(cos_theta) over [-1, 1].
    """
    values = np.asarray(g(rule.cos_theta))
    if not np.all(np.isfinite(values)):
        raise IntegrationError("integrand is not finite on the Gauss nodes")
    result = values @ np.array(rule.weights)
    return result.item() if np.ndim(result) == 0 else result


@dataclass(frozen=True)
class OdeState:
    t: float
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "y", np.array(self.y, dtype=float).reshape(-1))


def rk4_step(rhs: Callable, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    half = 0.5 * dt
    k1 = rhs(t, y)
    k2 = rhs(t + half, y + half * k1)
    k3 = rhs(t + half, y + half * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * (k2 + k3) + k4)


def rk4_integrate(
    rhs: Callable, y0: OdeState, t_end: float, dt: float, stride: int = 1
) -> List[OdeState]:
    """
    Classical fixed-step fourth-order Runge-Kutta from y0.t to t_end.

    Emits the initial state, every `stride`-th state and the final state.
    The last step is shortened so the run ends exactly on t_end.
    """
    if not dt > 0:
        raise DomainError(f"time step must be positive, got {dt}")
    if not t_end > y0.t:
        raise DomainError(f"t_end {t_end} must exceed the initial time {y0.t}")
    if stride < 1:
        raise DomainError(f"output stride must be at least 1, got {stride}")
    if not np.all(np.isfinite(y0.y)):
        raise DivergenceError("initial state is not finite", 0)

    span = t_end - y0.t
    steps = max(1, int(math.ceil(span / dt * (1.0 - 1.0e-12))))
    states = [y0]
    y = y0.y
    for step in range(1, steps + 1):
        t = y0.t + (step - 1) * dt
        h = dt if step < steps else t_end - t
        y = rk4_step(rhs, t, y, h)
        if not np.all(np.isfinite(y)):
            raise DivergenceError("state became non-finite", step)
        if step % stride == 0 or step == steps:
            states.append(OdeState(t=t_end if step == steps else y0.t + step * dt, y=y))
    return states
