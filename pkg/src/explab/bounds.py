"""Region-wise upper bounds on block error probability, plus the per-region closed forms.

All exponents are in nats per symbol and every ``log_pe`` is a natural log.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelPoint, Constellation, gaussian_input
from .errors import BracketError, ValidationError, ValidityError
from .exponents import Region, RegionReport, e0, e0_derivative, ex, region_report
from .numerics import DEFAULT_QUADRATURE, BracketedRoot, QuadratureSpec, find_root, maximize_concave

RHO_MAX = 100.0
RHO_TOL = 1e-8
# rho*(eta) ~ a + b eta across the region-3 SNR window at R = 1 nat
RHO_FIT_A, RHO_FIT_B = -0.37, 0.23


def _log_pe(n, exponent):
    if n == math.inf:
        return -math.inf if exponent > 0 else (math.inf if exponent < 0 else 0.0)
    return -n * exponent


def _capped(log_pe):
    return 1.0 if log_pe >= 0 else math.exp(log_pe)


@dataclass(frozen=True)
class BoundResult:
    region: Region
    rho_opt: float
    exponent: float
    log_pe: float
    pe_capped: float
    eta: float = math.nan
    warnings: tuple = ()
    status: str = "ok"

    def to_dict(self) -> dict:
        return {
            "region": self.region.value if self.region is not None else None,
            "rho_opt": self.rho_opt,
            "exponent": self.exponent,
            "log_pe": self.log_pe,
            "pe_capped": self.pe_capped,
            "eta": self.eta,
            "warnings": list(self.warnings),
            "status": self.status,
        }


def random_coding_exponent(c: Constellation, sigma2: float, R: float, tol: float = RHO_TOL,
                           spec: QuadratureSpec = DEFAULT_QUADRATURE):
    """max over 0 <= rho <= 1 of E_o(rho) - rho R; returns (rho, value)."""
    return maximize_concave(lambda r: e0(c, sigma2, r, spec) - r * R, 0.0, 1.0, tol)


def expurgated_exponent(c: Constellation, sigma2: float, R_eff: float, rho_max: float = RHO_MAX,
                        tol: float = RHO_TOL):
    """sup over 1 <= rho <= rho_max of E_x(rho) - rho R_eff, searched in log(rho)."""
    t, val = maximize_concave(lambda t: ex(c, sigma2, math.exp(t)) - math.exp(t) * R_eff,
                              0.0, math.log(rho_max), tol)
    return math.exp(t), val


def master_bound(c: Constellation, point: ChannelPoint, report: RegionReport | None = None,
                 rho_max: float = RHO_MAX, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> BoundResult:
    """Upper bound on block error probability using the exponent appropriate to R's region.

    Region 1 uses the expurgated exponent with the ln4/n penalty, region 2
    fixes rho = 1, region 3 (and rates above capacity) maximize over [0, 1].
    """
    rep = report or region_report(c, point, spec)
    region = rep.region_of(point.R)
    s2 = point.sigma2
    warnings = []
    if region is Region.REGION1:
        rho, exponent = expurgated_exponent(c, s2, point.R + point.log4_over_n, rho_max)
        if rho >= rho_max * (1 - 1e-6):
            warnings.append("rho_at_max")
    elif region is Region.REGION2:
        rho, exponent = 1.0, e0(c, s2, 1.0, spec) - point.R
    else:
        rho, exponent = random_coding_exponent(c, s2, point.R, spec=spec)
    log_pe = _log_pe(point.n, exponent)
    return BoundResult(region, rho, exponent, log_pe, _capped(log_pe), point.eta, tuple(warnings))


def sweep_threads() -> int:
    raw = os.environ.get("EXPLAB_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValidationError(f"EXPLAB_THREADS must be an integer, got {raw!r}") from None
    return min(8, os.cpu_count() or 1)


def bound_sweep(c: Constellation, n, R: float, snr_grid, threads: int | None = None,
                spec: QuadratureSpec = DEFAULT_QUADRATURE) -> list[BoundResult]:
    """Master bound at each SNR in ``snr_grid`` (linear eta, strictly increasing).

    Failed points come back with ``status`` set and NaN fields; rows whose
    region index increases with SNR are flagged ``region_order_violation``.
    """
    etas = [float(e) for e in snr_grid]
    if any(not e > 0 for e in etas) or any(b <= a for a, b in zip(etas, etas[1:])):
        raise ValidationError("snr_grid must be positive and strictly increasing")
    if not etas:
        return []

    def one(eta):
        try:
            return master_bound(c, ChannelPoint.for_constellation(c, n, R, eta), spec=spec)
        except (ArithmeticError, RuntimeError, ValueError) as exc:
            return BoundResult(None, math.nan, math.nan, math.nan, math.nan, eta,
                               status=f"error: {exc}")

    workers = threads or sweep_threads()
    if workers > 1 and len(etas) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, etas))
    else:
        results = [one(e) for e in etas]

    out, last = [], None
    for res in results:
        if res.region is not None:
            if last is not None and res.region.index > last:
                res = BoundResult(res.region, res.rho_opt, res.exponent, res.log_pe, res.pe_capped,
                                  res.eta, res.warnings + ("region_order_violation",), res.status)
            last = res.region.index
        out.append(res)
    return out


# ---------------------------------------------------------------------------
# closed forms


@dataclass(frozen=True)
class ClosedFormBound:
    name: str
    log_pe: float
    validity: str
    n: float = math.nan
    rho: float = math.nan
    details: dict = field(default_factory=dict)

    @property
    def exponent(self) -> float:
        return -self.log_pe / self.n

    def to_dict(self) -> dict:
        return {"name": self.name, "log_pe": self.log_pe, "validity": self.validity,
                "rho": self.rho, "details": dict(self.details)}


def binary_entropy(x: float) -> float:
    """Binary entropy in nats."""
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log(x) - (1 - x) * math.log1p(-x)


def mary_region1_closed(point: ChannelPoint, M: int, K: float = 1.0) -> ClosedFormBound:
    """exp(-n delta(R) eta K) with ln M - H(delta) = R + ln4/n, delta in (0, 1/2].

    K = 1 reproduces the expression as usually quoted; K = 1/2 (the
    Bhattacharyya exponent of unit-energy BPSK) makes it coincide with the
    expurgated bound for M = 2.
    """
    target = point.R + point.log4_over_n
    lnM = math.log(M)
    try:
        delta = find_root(lambda d: lnM - binary_entropy(d) - target, BracketedRoot(1e-300, 0.5, 1e-14))
    except BracketError:
        raise ValidityError(
            f"mary_region1: no delta in (0, 1/2] solves ln{M} - H(delta) = {target:.6g}") from None
    return ClosedFormBound("mary_region1", _log_pe(point.n, delta * point.eta * K),
                           "ln M - ln 2 <= R + ln4/n <= ln M", point.n,
                           details={"delta": delta, "K": K, "M": M})


def mary_region2_closed(point: ChannelPoint, M: int, K: float) -> ClosedFormBound:
    """e^{nR} M^{-n} (1 + e^{-eta K})^n."""
    if not K > 0:
        raise ValidationError("K must be positive")
    log_pe = point.n * (point.R - math.log(M) + math.log1p(math.exp(-point.eta * K)))
    return ClosedFormBound("mary_region2", log_pe, "region 2", point.n, 1.0, {"K": K, "M": M})


def _bpsk_prefactor(rho, sigma2):
    # -ln{2^(-rho/2-1) pi^(rho/2) sqrt(1+rho) ((1+rho) sigma2)^(rho/2)}
    return ((rho / 2 + 1) * math.log(2) - (rho / 2) * math.log(math.pi)
            - 0.5 * math.log1p(rho) - (rho / 2) * math.log((1 + rho) * sigma2))


def bpsk_region3_closed(point: ChannelPoint, branch: str = "auto", eta1: float | None = None,
                        eta2: float | None = None) -> ClosedFormBound:
    """Region-3 bound for unit-energy BPSK from an explicit lower bound on E_o.

    The stationary rho = 2 e^{-2R-1} eta / pi - 1 must fall in [0, 1].  Below
    eta = pi the lower bound drops the mixture-density power (valid while the
    summed densities stay under one); above pi it splits the output line at
    +-M1 and bounds both pieces on an SNR interval [eta1, eta2] containing eta.
    ``log_pe`` evaluates the resulting exponent directly; the simplified
    expression as usually printed is reported under ``details['log_pe_printed']``.
    """
    n, R, eta = point.n, point.R, point.eta
    sigma2 = 1.0 / eta
    if branch == "auto":
        branch = "low" if eta < math.pi else "high"
    if branch not in ("low", "high"):
        raise ValidationError("branch must be 'auto', 'low' or 'high'")
    rho = 2.0 * math.exp(-2 * R - 1) * eta / math.pi - 1.0
    if not -1e-12 <= rho <= 1.0 + 1e-12:
        raise ValidityError(f"bpsk_region3 {branch}-SNR branch: rho = {rho:.6g} outside [0, 1]")
    rho = min(max(rho, 0.0), 1.0)
    details = {"branch": branch}
    if branch == "low":
        etilde = -(rho / 2) * math.log(math.pi / 2) - 0.5 * math.log1p(rho) - (rho / 2) * math.log((1 + rho) * sigma2)
        printed = (n / 2) * math.log(eta / (2 * math.pi)) - n * (eta * math.exp(-2 * R - 1) / math.pi + R)
        if eta >= math.pi:
            details["outside_stated_snr_range"] = True
        validity = "rho in [0, 1], eta < pi"
    else:
        eta1 = eta if eta1 is None else eta1
        eta2 = eta if eta2 is None else eta2
        if not (math.pi <= eta1 <= eta <= eta2):
            raise ValidityError(f"bpsk_region3 high-SNR branch: need pi <= eta1 <= eta <= eta2, "
                                f"got {eta1:.6g}, {eta:.6g}, {eta2:.6g}")
        m1 = 1 + math.sqrt((rho + 1) / eta * math.log(2 * eta / (math.pi * (rho + 1))))
        m_l = 1 + math.sqrt(math.log(eta1 / math.pi) / eta2)
        m_u = 1 + math.sqrt(2 / eta1 * math.log(2 * eta2 / math.pi))
        tail = (4 * math.sqrt(2) * m_u * eta / math.pi
                + math.sqrt(eta / (4 * math.pi)) * math.exp(-eta * (m_l - 1) ** 2 / 2))
        etilde = _bpsk_prefactor(rho, sigma2) - math.log(tail)
        printed = (n / 2) * math.log(2 * math.pi * math.exp(-2 * R - 2) * eta) - n * math.exp(-2 * R - 1) * eta / math.pi
        details.update({"M1": m1, "M_l1": m_l, "M_u1": m_u, "eta1": eta1, "eta2": eta2})
        validity = "rho in [0, 1], eta > pi"
    details["log_pe_printed"] = printed
    name = "bpsk_region3_low_snr" if branch == "low" else "bpsk_region3_high_snr"
    return ClosedFormBound(name, _log_pe(n, etilde - rho * R), validity, n, rho, details)


def _gauss_rate_fn(delta):
    return math.log1p(delta / 2) - delta / (delta + 2)


def gauss_delta1(R_eff: float) -> float:
    """delta_1 > 0 solving ln(1 + delta/2) - delta/(delta+2) = R_eff; depends on the rate only."""
    if R_eff <= 0:
        if R_eff < 0:
            raise ValidityError("gauss_region1: R + ln4/n must be nonnegative")
        return 0.0
    hi = 1.0
    while _gauss_rate_fn(hi) < R_eff:
        hi *= 2.0
    return find_root(lambda d: _gauss_rate_fn(d) - R_eff, BracketedRoot(0.0, hi, 1e-13))


def gauss_rho_star(R: float, eta: float) -> float:
    """Optimal rho in [0, 1] for the Gaussian-input random-coding exponent at rate R."""
    g = gaussian_input()

    def f(r):
        return e0_derivative(g, 1.0 / eta, r) - R

    # the window edges (capacity and r_crit) give roots at exactly 0 or 1
    if abs(f(1.0)) <= 1e-12:
        return 1.0
    if abs(f(0.0)) <= 1e-12:
        return 0.0
    try:
        return find_root(f, BracketedRoot(0.0, 1.0, 1e-13))
    except BracketError:
        raise ValidityError(f"gauss_region3: R = {R:.6g} is outside region 3 at eta = {eta:.6g}") from None


def gauss_region1_closed(point: ChannelPoint) -> ClosedFormBound:
    delta1 = gauss_delta1(point.R + point.log4_over_n)
    rho = point.eta / delta1 if delta1 > 0 else math.inf
    if rho < 1.0:
        raise ValidityError(f"gauss_region1: optimal rho = {rho:.6g} < 1, rate not in region 1")
    return ClosedFormBound("gauss_region1", _log_pe(point.n, point.eta / (delta1 + 2)),
                           "region 1 (rho = eta/delta1 >= 1)", point.n, rho, {"delta1": delta1})


def gauss_region2_closed(point: ChannelPoint) -> ClosedFormBound:
    exponent = math.log1p(point.eta / 2) - point.R
    return ClosedFormBound("gauss_region2", _log_pe(point.n, exponent), "region 2", point.n, 1.0)


def _region3_exponent(eta, rho):
    return eta * rho**2 / ((1 + rho) ** 2 * (eta / (1 + rho) + 1))


def gauss_region3_closed(point: ChannelPoint) -> ClosedFormBound:
    rho = gauss_rho_star(point.R, point.eta)
    return ClosedFormBound("gauss_region3", _log_pe(point.n, _region3_exponent(point.eta, rho)),
                           "region 3 (rho* in [0, 1])", point.n, rho)


def gauss_region3_linear_approx(point: ChannelPoint, a: float = RHO_FIT_A, b: float = RHO_FIT_B) -> ClosedFormBound:
    """Region-3 expression with rho* replaced by a + b eta (default fit is for R = 1 only).

    An approximation, not a bound.
    """
    rho = a + b * point.eta
    if 1 + rho <= 0:
        raise ValidityError(f"linear approximation: 1 + a + b eta = {1 + rho:.6g} <= 0")
    details = {"a": a, "b": b}
    if not 0.0 <= rho <= 1.0:
        details["rho_outside_unit_interval"] = True
    return ClosedFormBound("gauss_region3_linear_approx", _log_pe(point.n, _region3_exponent(point.eta, rho)),
                           "approximation; (a, b) fitted per rate", point.n, rho, details)


def gauss_region_bounds(point: ChannelPoint, report: RegionReport | None = None) -> ClosedFormBound:
    """Closed form for whichever region R falls in, Gaussian input with SNR ``point.eta``."""
    g = gaussian_input()
    p = ChannelPoint(point.n, point.R, point.eta)
    region = (report or region_report(g, p)).region_of(point.R)
    if region is Region.REGION1:
        return gauss_region1_closed(p)
    if region is Region.REGION2:
        return gauss_region2_closed(p)
    if region is Region.REGION3:
        return gauss_region3_closed(p)
    raise ValidityError(f"rate {point.R:.6g} exceeds Gaussian-input capacity at eta = {point.eta:.6g}")


def fit_rho_star_line(R: float, etas) -> tuple[float, float]:
    """Least-squares (a, b) with rho*(eta) ~ a + b eta over the given SNRs."""
    etas = np.asarray(etas, dtype=float)
    rho = np.array([gauss_rho_star(R, e) for e in etas])
    b, a = np.polyfit(etas, rho, 1)
    return float(a), float(b)


def gauss_region3_window(R: float) -> tuple[float, float]:
    """SNR interval on which R lies in region 3 for Gaussian input: from capacity to r_crit."""
    lo = math.expm1(R)

    def rcrit_gap(eta):
        return e0_derivative(gaussian_input(), 1.0 / eta, 1.0) - R

    hi = max(2 * lo, 1.0)
    while rcrit_gap(hi) < 0:
        hi *= 2
    return lo, find_root(rcrit_gap, BracketedRoot(lo, hi, 1e-12))
