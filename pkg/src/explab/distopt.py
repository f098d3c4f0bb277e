"""Input-distribution optimization for the random-coding exponent under power constraints.

For fixed rho, maximizing E_o(rho, q) over q is the same as minimizing the
convex functional f(q) = integral [sum_x q(x) p(y|x)^(1/(1+rho))]^(1+rho) dy
over the simplex cut by the average-power half-space.  We use pairwise
Frank-Wolfe over the vertices of that polytope with exact line search; the
Frank-Wolfe gap, rescaled to E_o units, is the optimality certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .channel import PowerConstraint, make_points
from .errors import ValidationError
from .numerics import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    as_points,
    integrate_gaussian_mixture_power,
    maximize_concave,
    reduce_dimension,
)

POWER_SLACK = 1e-12
POLISH = 1e-3


@dataclass(frozen=True)
class OptimizationProblem:
    grid: tuple
    constraint: PowerConstraint
    R: float
    sigma2: float
    rho_grid: tuple = tuple(np.round(np.linspace(0.0, 1.0, 11), 12))

    def __post_init__(self):
        pts = as_points(self.grid)
        object.__setattr__(self, "grid", tuple(tuple(float(v) for v in row) for row in pts))
        object.__setattr__(self, "rho_grid", tuple(float(r) for r in self.rho_grid))
        if not self.sigma2 > 0:
            raise ValidationError("sigma2 must be positive")
        if not self.rho_grid or any(not 0.0 <= r <= 1.0 for r in self.rho_grid):
            raise ValidationError("rho_grid must be non-empty and inside [0, 1]")
        amp = np.sqrt((pts**2).sum(axis=1))
        if np.any(amp > self.constraint.peak_amplitude * (1 + 1e-12)):
            raise ValidationError("grid points exceed the peak amplitude")
        if amp.min() ** 2 > self.constraint.avg_power * (1 + POWER_SLACK):
            raise ValidationError("no grid point satisfies the average-power constraint")

    @property
    def points(self) -> np.ndarray:
        return as_points(self.grid)

    @property
    def powers(self) -> np.ndarray:
        return (self.points**2).sum(axis=1)

    def to_json(self) -> dict:
        return {
            "grid": [list(g) for g in self.grid],
            "avg_power": self.constraint.avg_power,
            "peak_amplitude": None if math.isinf(self.constraint.peak_amplitude) else self.constraint.peak_amplitude,
            "R": self.R,
            "sigma2": self.sigma2,
            "rho_grid": list(self.rho_grid),
        }

    @classmethod
    def from_json(cls, data: dict) -> "OptimizationProblem":
        try:
            peak = data.get("peak_amplitude")
            constraint = PowerConstraint(float(data["avg_power"]), math.inf if peak is None else float(peak))
            kwargs = {}
            if "rho_grid" in data:
                kwargs["rho_grid"] = tuple(data["rho_grid"])
            return cls(tuple(data["grid"]), constraint, float(data["R"]), float(data["sigma2"]), **kwargs)
        except KeyError as exc:
            raise ValidationError(f"problem.{exc.args[0]}: missing") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"problem: {exc}") from None


@dataclass(frozen=True)
class InnerSolution:
    probs: np.ndarray
    rho: float
    e0: float
    residual: float
    converged: bool
    iterations: int
    history: tuple = field(default=(), repr=False)


@dataclass(frozen=True)
class OptimizedDistribution:
    probs: np.ndarray
    rho_opt: float
    er_value: float
    kkt_residual: float
    converged: bool = True
    above_capacity: bool = False

    def to_json(self) -> dict:
        return {
            "probs": [float(p) for p in self.probs],
            "rho_opt": self.rho_opt,
            "er_value": self.er_value,
            "kkt_residual": self.kkt_residual,
            "converged": self.converged,
            "above_capacity": self.above_capacity,
        }


def feasible_vertices(powers: np.ndarray, avg_power: float):
    """Vertices of {q >= 0, sum q = 1, sum q p <= P} as rows of a (V, N) matrix.

    Each vertex is a point mass inside the power budget or a two-point mix of
    one inside and one outside point that meets the budget with equality.
    """
    limit = avg_power * (1 + POWER_SLACK)
    inside = np.flatnonzero(powers <= limit)
    outside = np.flatnonzero(powers > limit)
    rows = []
    for i in inside:
        v = np.zeros(powers.size)
        v[i] = 1.0
        rows.append(v)
    for i in inside:
        for j in outside:
            lam = (powers[j] - avg_power) / (powers[j] - powers[i])
            v = np.zeros(powers.size)
            v[i], v[j] = lam, 1.0 - lam
            rows.append(v)
    return np.array(rows)


def initial_distribution(powers: np.ndarray, avg_power: float) -> np.ndarray:
    """Uniform over the grid, dropping the highest-power points until the budget holds.

    Points of equal power are kept or dropped together, so symmetric grids
    start symmetric.
    """
    keep_level = None
    for level in np.unique(powers):
        if powers[powers <= level].mean() > avg_power * (1 + POWER_SLACK):
            break
        keep_level = level
    q = (powers <= keep_level).astype(float)
    return q / q.sum()


def _decompose(q: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Nonnegative vertex weights reproducing q (Caratheodory via NNLS)."""
    A = np.vstack([vertices.T, np.ones(vertices.shape[0])])
    b = np.concatenate([q, [1.0]])
    w, _ = nnls(A, b, maxiter=50 * A.shape[1])
    w /= w.sum()
    return w


class _Objective:
    """f(q), its gradient and directional curvature on a fixed output-space grid.

    With a_x(y) = p(y|x)^(1/(1+rho)) tabulated at trapezoid nodes, f = sum_y w m^(1+rho)
    for m = q @ A, so every evaluation is a couple of matrix products.  The
    trapezoid rule is spectrally accurate here: the integrand is smooth and
    decays like a Gaussian of width s = sqrt(sigma2 (1+rho)), and the step is s/12.
    """

    STEPS_PER_WIDTH = 12

    def __init__(self, pts, sigma2, rho, radius):
        d = pts.shape[1]
        s = math.sqrt(sigma2 * (1.0 + rho))
        h = s / self.STEPS_PER_WIDTH
        axes = []
        for k in range(d):
            lo = pts[:, k].min() - radius * s
            hi = pts[:, k].max() + radius * s
            axes.append(np.linspace(lo, hi, int(math.ceil((hi - lo) / h)) + 1))
        mesh = np.meshgrid(*axes, indexing="ij")
        y = np.column_stack([m.ravel() for m in mesh])
        w = np.ones(y.shape[0])
        for k, ax in enumerate(axes):
            wk = np.full(ax.size, ax[1] - ax[0])
            wk[[0, -1]] *= 0.5
            w *= np.meshgrid(*[wk if j == k else np.ones(a.size) for j, a in enumerate(axes)],
                             indexing="ij")[0].ravel()
        d2 = ((pts[:, None, :] - y[None, :, :]) ** 2).sum(axis=-1)
        log_norm = 0.5 * d * math.log(2.0 * math.pi * sigma2)
        self.A = np.exp(-(d2 / (2.0 * sigma2) + log_norm) / (1.0 + rho))
        self.w = w
        self.rho = rho

    def _m(self, q):
        return np.maximum(q @ self.A, 1e-300)

    def __call__(self, q):
        m = self._m(q)
        wm = self.w * m**self.rho
        return float(wm @ m), (1.0 + self.rho) * (self.A @ wm)

    def value(self, q):
        m = self._m(q)
        return float(self.w @ m ** (1.0 + self.rho))

    def slope_and_curvature(self, q, direction):
        m = self._m(q)
        dm = direction @ self.A
        r = self.rho
        slope = (1.0 + r) * float(self.w @ (m**r * dm))
        curv = r * (1.0 + r) * float(self.w @ (m ** (r - 1.0) * dm * dm))
        return slope, curv


def _line_search(objective, q, direction, gmax):
    """Exact minimizer of f(q + gamma d) on [0, gmax] by safeguarded Newton on the slope."""
    slope_hi, _ = objective.slope_and_curvature(q + gmax * direction, direction)
    if slope_hi <= 0:
        return gmax
    lo, hi = 0.0, gmax
    gamma = 0.5 * gmax
    for _ in range(100):
        slope, curv = objective.slope_and_curvature(q + gamma * direction, direction)
        if slope == 0:
            return gamma
        if slope > 0:
            hi = gamma
        else:
            lo = gamma
        step = gamma - slope / curv if curv > 0 else math.nan
        if not lo <= step <= hi:
            step = 0.5 * (lo + hi)
        if abs(step - gamma) <= 1e-16 + 1e-14 * gmax or hi - lo <= 1e-15 + 1e-13 * gmax:
            return step
        gamma = step
    return gamma


def optimize_q_for_rho(problem: OptimizationProblem, rho: float, tol: float = 1e-7, max_iter: int = 5000,
                       q0=None, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> InnerSolution:
    """Maximize E_o(rho, q) over the power-constrained simplex on ``problem.grid``.

    Converged when the largest first-order gain in E_o toward any feasible
    vertex drops below ``tol``.  Iteration continues to ``POLISH * tol`` (or
    until progress stalls) since the gap bounds the objective error, not the
    distance to the optimizer.  On hitting ``max_iter`` the best iterate is
    returned with ``converged=False``.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValidationError("rho must lie in [0, 1]")
    pts = reduce_dimension(problem.points)
    powers = problem.powers
    P = problem.constraint.avg_power
    vertices = feasible_vertices(powers, P)
    q = initial_distribution(powers, P) if q0 is None else np.asarray(q0, dtype=float).copy()
    if abs(q.sum() - 1) > 1e-9 or np.any(q < 0) or q @ powers > P * (1 + 1e-9):
        raise ValidationError("starting distribution is infeasible")
    if rho == 0.0:
        return InnerSolution(q, rho, 0.0, 0.0, True, 0)
    if pts.shape[0] == 1:
        e0 = -math.log(integrate_gaussian_mixture_power(pts, q, problem.sigma2, rho, spec))
        return InnerSolution(q, rho, e0, 0.0, True, 0)

    objective = _Objective(pts, problem.sigma2, rho, spec.domain_sigma_radius + 4.0)
    weights = _decompose(q, vertices)
    q = weights @ vertices

    f, g = objective(q)
    history = [-math.log(f)]
    residual = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        scores = vertices @ g
        s = int(np.argmin(scores))
        residual = max(float(q @ g - scores[s]) / f, 0.0)
        if residual < POLISH * tol:
            break
        active = np.flatnonzero(weights > 0)
        a = int(active[np.argmax(scores[active])])
        if a == s:
            break
        direction = vertices[s] - vertices[a]
        gmax = weights[a]
        gamma = _line_search(objective, q, direction, gmax)
        q_new = q + gamma * direction
        f_new, g_new = objective(q_new)
        if f_new > f * (1 + 1e-15):
            # no representable descent left along the best pair
            break
        weights[s] += gamma
        weights[a] -= gamma
        if gamma == gmax:
            weights[a] = 0.0
        q, f, g = q_new, f_new, g_new
        history.append(-math.log(f))
    scores = vertices @ g
    residual = max(float(q @ g - scores.min()) / f, 0.0)
    converged = residual < tol
    q = np.clip(q, 0.0, None)
    q /= q.sum()
    e0 = -math.log(integrate_gaussian_mixture_power(pts, q, problem.sigma2, rho, spec))
    return InnerSolution(q, rho, e0, residual, converged, it, tuple(history))


def optimize_er(problem: OptimizationProblem, tol: float = 1e-7, max_iter: int = 5000,
                rho_tol: float = 1e-6, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> OptimizedDistribution:
    """Jointly optimal (rho, q) for E_r(R) = max_rho [max_q E_o(rho, q) - rho R].

    Scans ``problem.rho_grid`` (warm-starting each inner solve) and refines
    the best grid cell by golden-section search.
    """
    cache = {}
    warm = [None]

    def solve(rho):
        key = round(rho, 14)
        if key not in cache:
            sol = optimize_q_for_rho(problem, rho, tol, max_iter, q0=warm[0], spec=spec)
            warm[0] = sol.probs
            cache[key] = sol
        return cache[key]

    grid = sorted(set(problem.rho_grid))
    values = [solve(r).e0 - r * problem.R for r in grid]
    k = int(np.argmax(values))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    if hi > lo:
        warm[0] = solve(grid[k]).probs
        rho, _ = maximize_concave(lambda r: solve(r).e0 - r * problem.R, lo, hi, rho_tol)
    else:
        rho = grid[k]
    best = solve(rho)
    er = best.e0 - rho * problem.R
    return OptimizedDistribution(best.probs, rho, er, best.residual, best.converged, above_capacity=er <= 0)


def as_constellation(problem: OptimizationProblem, probs):
    """Discrete constellation on the problem grid carrying ``probs``."""
    q = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    return make_points(problem.points, q / q.sum())
