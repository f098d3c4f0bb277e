"""Numerical kernels: Gaussian-mixture power integrals, root finding, concave maximization.

The central quantity is

    I(rho) = integral over y of [ sum_x q(x) p(y|x)^(1/(1+rho)) ]^(1+rho) dy

for an isotropic Gaussian p(y|x) with per-dimension variance sigma2.  Writing
s^2 = sigma2 * (1 + rho) and substituting y = x + s z under each mixture
component gives

    I(rho) = (1+rho)^(d/2) * sum_x q(x) * E_z[ S_x(z)^rho ],
    S_x(z) = sum_x' q(x') exp(-|z + (x - x')/s|^2 / 2),

with z ~ N(0, I_d).  The expectations are evaluated with probabilists'
Gauss-Hermite nodes centred on each component, so widely spread alphabets
are resolved as well as compact ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special

from .errors import BracketError, QuadratureError, ValidationError

PMF_TOL = 1e-12
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# largest Gauss-Hermite order tried per dimension before the adaptive fallback
MAX_NODES = {1: 1536, 2: 384}


@dataclass(frozen=True)
class QuadratureSpec:
    scheme: str = "gauss_hermite_tensor"
    nodes_per_dim: int = 96
    rel_tol: float = 1e-11
    domain_sigma_radius: float = 8.0

    def __post_init__(self):
        if self.scheme not in ("gauss_hermite_tensor", "adaptive_interval"):
            raise ValidationError(f"unknown quadrature scheme {self.scheme!r}")
        if self.nodes_per_dim < 16:
            raise ValidationError("nodes_per_dim must be >= 16")
        if not 0.0 < self.rel_tol <= 1e-4:
            raise ValidationError("rel_tol must lie in (0, 1e-4]")
        if self.domain_sigma_radius < 6.0:
            raise ValidationError("domain_sigma_radius must be >= 6")


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class BracketedRoot:
    lo: float
    hi: float
    tol: float = 1e-10

    def __post_init__(self):
        if not self.hi > self.lo:
            raise BracketError(f"bracket needs hi > lo, got [{self.lo}, {self.hi}]")
        if not self.tol > 0:
            raise ValidationError("root tolerance must be positive")


# ---------------------------------------------------------------------------
# input handling


def as_points(points) -> np.ndarray:
    """Coerce scalars / sequences of coordinates to an (m, d) float array."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValidationError("points must be a non-empty list of coordinates")
    if pts.shape[1] not in (1, 2):
        raise ValidationError(f"only 1-D and 2-D constellations are supported, got d={pts.shape[1]}")
    if not np.all(np.isfinite(pts)):
        raise ValidationError("points must be finite")
    return pts


def check_pmf(probs, size: int) -> np.ndarray:
    q = np.asarray(probs, dtype=float).ravel()
    if q.shape[0] != size:
        raise ValidationError(f"pmf has {q.shape[0]} entries for {size} points")
    if np.any(~np.isfinite(q)) or np.any(q < 0):
        raise ValidationError("pmf entries must be finite and nonnegative")
    if abs(q.sum() - 1.0) > PMF_TOL:
        raise ValidationError(f"pmf sums to {q.sum()!r}, not 1")
    return q


def reduce_dimension(pts: np.ndarray) -> np.ndarray:
    """Project collinear 2-D point sets onto their common line.

    Noise is isotropic, so the orthogonal coordinate integrates out exactly.
    """
    if pts.shape[1] == 1:
        return pts
    centred = pts - pts.mean(axis=0)
    _, sv, vt = np.linalg.svd(centred, full_matrices=False)
    scale = max(1.0, float(np.abs(pts).max()))
    if sv.size < 2 or sv[1] <= 1e-12 * scale:
        return (centred @ vt[0])[:, None]
    return pts


# ---------------------------------------------------------------------------
# Gauss-Hermite machinery


@lru_cache(maxsize=64)
def _hermite_rule(n: int, d: int):
    x, w = special.roots_hermitenorm(n)
    w = w / math.sqrt(2.0 * math.pi)
    if d == 1:
        z = x[:, None]
    else:
        gx, gy = np.meshgrid(x, x, indexing="ij")
        z = np.column_stack([gx.ravel(), gy.ravel()])
        w = np.outer(w, w).ravel()
    z.setflags(write=False)
    w.setflags(write=False)
    return z, w


def mixture_power_terms(pts: np.ndarray, q: np.ndarray, sigma2: float, rho: float, nodes: int) -> np.ndarray:
    """Per-component expectations E_z[S_x(z)^rho] for every point, including zero-mass ones.

    The gradient of I with respect to q(x) is (1+rho)^(1+d/2) times the entry for x.
    """
    m, d = pts.shape
    if rho == 0.0:
        return np.ones(m)
    z, w = _hermite_rule(nodes, d)
    s = math.sqrt(sigma2 * (1.0 + rho))
    sup = q > 0
    logq = np.log(q[sup])
    zz = 0.5 * np.einsum("kd,kd->k", z, z)
    out = np.empty(m)
    for i in range(m):
        delta = (pts[i] - pts[sup]) / s  # (k, d)
        # -|z + delta|^2 / 2 for every (support point, node)
        expo = -(zz[None, :] + delta @ z.T + 0.5 * np.einsum("kd,kd->k", delta, delta)[:, None])
        lse = special.logsumexp(expo + logq[:, None], axis=0)
        out[i] = w @ np.exp(rho * lse)
    return out


def _gh_value(pts, q, sigma2, rho, nodes):
    d = pts.shape[1]
    terms = mixture_power_terms(pts, q, sigma2, rho, nodes)
    return (1.0 + rho) ** (d / 2.0) * float(q @ terms)


def _log_integrand(y: np.ndarray, pts, q, sigma2, rho):
    """log of [sum q p(y|x)^(1/(1+rho))]^(1+rho) for y of shape (k, d)."""
    d = pts.shape[1]
    sup = q > 0
    d2 = ((y[:, None, :] - pts[None, sup, :]) ** 2).sum(axis=-1)
    logp = -d2 / (2.0 * sigma2) - 0.5 * d * math.log(2.0 * math.pi * sigma2)
    lse = special.logsumexp(logp / (1.0 + rho) + np.log(q[sup])[None, :], axis=1)
    return (1.0 + rho) * lse


def _adaptive_value(pts, q, sigma2, rho, spec: QuadratureSpec):
    d = pts.shape[1]
    pad = spec.domain_sigma_radius * math.sqrt(sigma2 * (1.0 + rho))
    lo = pts.min(axis=0) - pad
    hi = pts.max(axis=0) + pad
    opts = dict(epsabs=1e-15, epsrel=spec.rel_tol)
    if d == 1:
        sup = np.sort(pts[q > 0, 0])
        brk = np.unique(np.concatenate([sup, 0.5 * (sup[1:] + sup[:-1])]))
        brk = brk[(brk > lo[0]) & (brk < hi[0])]

        def f(y):
            return math.exp(_log_integrand(np.array([[y]]), pts, q, sigma2, rho)[0])

        val, err = integrate.quad(f, lo[0], hi[0], points=brk if brk.size else None, limit=1000, **opts)
    else:

        def f(y2, y1):
            return math.exp(_log_integrand(np.array([[y1, y2]]), pts, q, sigma2, rho)[0])

        val, err = integrate.dblquad(f, lo[0], hi[0], lo[1], hi[1], **opts)
    return val, err


def resolve_node_count(pts, q, sigma2, rho, spec: QuadratureSpec = DEFAULT_QUADRATURE):
    """Smallest doubling of ``spec.nodes_per_dim`` that passes the self-consistency check.

    Returns ``(nodes, value)``, or ``(None, last_two_estimates)`` when the ladder is exhausted.
    """
    d = pts.shape[1]
    n = spec.nodes_per_dim
    prev = _gh_value(pts, q, sigma2, rho, n)
    while 2 * n <= MAX_NODES[d]:
        cur = _gh_value(pts, q, sigma2, rho, 2 * n)
        if abs(cur - prev) <= spec.rel_tol * abs(cur):
            return 2 * n, cur
        prev, n = cur, 2 * n
    return None, (prev, cur)


def integrate_gaussian_mixture_power(points, probs, sigma2: float, rho: float,
                                     spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Integral of [sum_x q(x) p(y|x)^(1/(1+rho))]^(1+rho) over y for isotropic AWGN.

    Raises QuadratureError (with the last two estimates) when neither the
    Gauss-Hermite ladder nor the adaptive fallback reaches ``spec.rel_tol``.
    """
    pts = as_points(points)
    q = check_pmf(probs, pts.shape[0])
    if not sigma2 > 0:
        raise ValidationError("sigma2 must be positive")
    if not rho > -1.0:
        raise ValidationError("rho must exceed -1")
    pts = reduce_dimension(pts)
    if spec.scheme == "adaptive_interval":
        val, err = _adaptive_value(pts, q, sigma2, rho, spec)
        if err > max(spec.rel_tol * abs(val), 1e-14):
            raise QuadratureError("adaptive quadrature did not converge", (val, val + err))
        return val
    nodes, val = resolve_node_count(pts, q, sigma2, rho, spec)
    if nodes is not None:
        return val
    estimates = val
    aval, err = _adaptive_value(pts, q, sigma2, rho, spec)
    if err <= max(10 * spec.rel_tol * abs(aval), 1e-13):
        return aval
    raise QuadratureError(
        f"quadrature failed to converge (sigma2={sigma2}, rho={rho})", (estimates[-1], aval))


# ---------------------------------------------------------------------------
# scalar solvers


def find_root(f, bracket: BracketedRoot) -> float:
    """Root of ``f`` inside ``bracket``: Brent's method with a bisection fallback."""
    lo, hi = float(bracket.lo), float(bracket.hi)
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if not (np.isfinite(flo) and np.isfinite(fhi)) or np.sign(flo) == np.sign(fhi):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={flo!r}, {fhi!r}")
    try:
        return float(optimize.brentq(f, lo, hi, xtol=bracket.tol, rtol=4 * np.finfo(float).eps, maxiter=500))
    except (RuntimeError, ValueError):
        pass
    while hi - lo > bracket.tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def maximize_concave(f, lo: float, hi: float, tol: float = 1e-9):
    """Golden-section search for the maximum of a unimodal ``f`` on [lo, hi].

    Endpoints are compared explicitly so boundary maxima come back exactly.
    Returns ``(argmax, f(argmax))``.
    """
    if not hi > lo:
        raise ValidationError(f"maximize_concave needs lo < hi, got [{lo}, {hi}]")
    a, b = float(lo), float(hi)
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
    x = 0.5 * (a + b)
    best = (x, f(x))
    for edge in (float(lo), float(hi)):
        fe = f(edge)
        if fe > best[1]:
            best = (edge, fe)
    return best
