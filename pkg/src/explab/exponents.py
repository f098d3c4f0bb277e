"""Gallager's E_o and expurgated E_x functions, their rho-derivatives and the rate regions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import logsumexp

from .channel import ChannelPoint, Constellation, squared_distances
from .numerics import DEFAULT_QUADRATURE, QuadratureSpec, integrate_gaussian_mixture_power

FD_STEP = 1e-3


class Region(str, Enum):
    REGION1 = "region1"
    REGION2 = "region2"
    REGION3 = "region3"
    ABOVE_CAPACITY = "above_capacity"

    @property
    def index(self) -> int:
        return {"region1": 1, "region2": 2, "region3": 3}.get(self.value, 4)


def _snr(c: Constellation, sigma2: float) -> float:
    return c.power / sigma2


def e0(c: Constellation, sigma2: float, rho: float, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Random-coding function E_o(rho) = -ln integral [sum_x q p(y|x)^(1/(1+rho))]^(1+rho) dy."""
    if not c.is_discrete:
        eta = _snr(c, sigma2)
        return rho * math.log1p(eta / (1.0 + rho))
    if rho == 0.0:
        return 0.0
    return -math.log(integrate_gaussian_mixture_power(c.points, c.pmf, sigma2, rho, spec))


def _ex_parts(c: Constellation, sigma2: float):
    q = c.pmf
    sup = q > 0
    pts = c.points[sup]
    logw = np.log(q[sup])[:, None] + np.log(q[sup])[None, :]
    cost = squared_distances(pts) / (8.0 * sigma2)
    return logw.ravel(), cost.ravel()


def ex(c: Constellation, sigma2: float, rho: float) -> float:
    """Expurgated function E_x(rho) = -rho ln sum q q' B(x,x')^(1/rho), B the Bhattacharyya coefficient."""
    if not c.is_discrete:
        eta = _snr(c, sigma2)
        return rho * math.log1p(eta / (2.0 * rho))
    logw, cost = _ex_parts(c, sigma2)
    return -rho * float(logsumexp(logw - cost / rho))


def _richardson_central(f, x, h):
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4 * d2 - d1) / 3


def _richardson_forward(f, x, h):
    # second-order one-sided stencil, then one Richardson step
    def d(step):
        return (-3 * f(x) + 4 * f(x + step) - f(x + 2 * step)) / (2 * step)

    return (4 * d(h / 2) - d(h)) / 3


def e0_derivative(c: Constellation, sigma2: float, rho: float, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """dE_o/drho: analytic for Gaussian input, Richardson-extrapolated differences otherwise."""
    if not c.is_discrete:
        eta = _snr(c, sigma2)
        return math.log1p(eta / (1 + rho)) - eta * rho / ((1 + rho) ** 2 + eta * (1 + rho))

    def f(r):
        return e0(c, sigma2, r, spec)

    if rho < FD_STEP:
        return _richardson_forward(f, rho, FD_STEP)
    return _richardson_central(f, rho, FD_STEP)


def ex_derivative(c: Constellation, sigma2: float, rho: float) -> float:
    """dE_x/drho in closed form (the discrete case needs no integral)."""
    if not c.is_discrete:
        eta = _snr(c, sigma2)
        return math.log1p(eta / (2 * rho)) - eta / (eta + 2 * rho)
    logw, cost = _ex_parts(c, sigma2)
    a = logw - cost / rho
    lse = logsumexp(a)
    mean_cost = float(np.exp(a - lse) @ cost)
    return -float(lse) - mean_cost / rho


@dataclass(frozen=True)
class RegionReport:
    r1_max: float
    r_crit: float
    capacity: float

    def region_of(self, R: float) -> Region:
        if R <= self.r1_max:
            return Region.REGION1
        if R <= self.r_crit:
            return Region.REGION2
        if R <= self.capacity:
            return Region.REGION3
        return Region.ABOVE_CAPACITY

    def to_dict(self) -> dict:
        return {"r1_max": self.r1_max, "r_crit": self.r_crit, "capacity": self.capacity}


def region_report(c: Constellation, point: ChannelPoint, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> RegionReport:
    """Critical rates: dE_x/drho|1 - ln4/n, dE_o/drho|1 and dE_o/drho|0 (capacity)."""
    s2 = point.sigma2
    return RegionReport(
        r1_max=ex_derivative(c, s2, 1.0) - point.log4_over_n,
        r_crit=e0_derivative(c, s2, 1.0, spec),
        capacity=e0_derivative(c, s2, 0.0, spec),
    )
