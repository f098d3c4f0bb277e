"""Constellations, channel operating points and SNR bookkeeping.

Noise is isotropic AWGN with variance ``sigma2`` per real dimension; for
unit-energy alphabets the SNR is eta = 1 / sigma2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedKindError, ValidationError
from .numerics import as_points, check_pmf

KINDS = ("psk", "points", "gaussian")
SNR_REFERENCES = ("eta", "es_n0", "eb_n0")


@dataclass(frozen=True)
class Constellation:
    """A discrete point set with a pmf, or the continuous Gaussian-input marker.

    ``power`` is only meaningful for the Gaussian kind (input variance); for
    discrete kinds the mean power follows from the points.
    """

    kind: str
    coords: tuple = ()
    probs: tuple = ()
    order: int | None = None
    dimension: int = 1
    power: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown constellation kind {self.kind!r}")
        if self.dimension not in (1, 2):
            raise ValidationError("dimension must be 1 or 2")
        if self.kind == "gaussian":
            if not self.power > 0:
                raise ValidationError("gaussian input power must be positive")
            return
        pts = as_points(self.coords)
        if pts.shape[1] != self.dimension:
            raise ValidationError(f"coords have dimension {pts.shape[1]}, declared {self.dimension}")
        check_pmf(self.probs, pts.shape[0])

    @property
    def is_discrete(self) -> bool:
        return self.kind != "gaussian"

    @property
    def points(self) -> np.ndarray:
        self._require_discrete()
        return as_points(self.coords)

    @property
    def pmf(self) -> np.ndarray:
        self._require_discrete()
        return np.asarray(self.probs, dtype=float)

    @property
    def mean_power(self) -> float:
        if not self.is_discrete:
            return self.power
        pts = self.points
        return float(self.pmf @ (pts**2).sum(axis=1))

    def _require_discrete(self):
        if not self.is_discrete:
            raise UnsupportedKindError("operation needs a discrete constellation")

    def with_probs(self, probs) -> "Constellation":
        self._require_discrete()
        q = check_pmf(probs, len(self.coords))
        return Constellation("points", self.coords, tuple(float(v) for v in q), dimension=self.dimension)

    def to_json(self) -> dict:
        if self.kind == "psk":
            return {"type": "psk", "order": self.order}
        if self.kind == "gaussian":
            out = {"type": "gaussian", "dimension": self.dimension}
            if self.power != 1.0:
                out["power"] = self.power
            return out
        return {"type": "points", "coords": [list(c) for c in self.coords], "probs": list(self.probs)}


def make_psk(M: int) -> Constellation:
    """Unit-energy M-PSK with points (cos 2 pi k/M, sin 2 pi k/M) and uniform pmf."""
    if isinstance(M, bool) or not isinstance(M, (int, np.integer)) or M < 2:
        raise ValidationError(f"PSK order must be an integer >= 2, got {M!r}")
    theta = 2.0 * np.pi * np.arange(M) / M
    coords = tuple((float(np.cos(t)), float(np.sin(t))) for t in theta)
    return Constellation("psk", coords, (1.0 / M,) * M, order=int(M), dimension=2)


def make_points(coords, probs=None) -> Constellation:
    """Arbitrary 1-D/2-D point set; uniform pmf when ``probs`` is omitted."""
    pts = as_points(coords)
    if probs is None:
        probs = np.full(pts.shape[0], 1.0 / pts.shape[0])
    q = check_pmf(probs, pts.shape[0])
    return Constellation(
        "points",
        tuple(tuple(float(v) for v in row) for row in pts),
        tuple(float(v) for v in q),
        dimension=pts.shape[1],
    )


def gaussian_input(dimension: int = 1, power: float = 1.0) -> Constellation:
    return Constellation("gaussian", dimension=dimension, power=power)


def constellation_from_json(spec) -> Constellation:
    """Parse the constellation JSON schema (string or already-decoded dict).

    Validation errors name the offending field.
    """
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"constellation: not valid JSON ({exc.msg})") from None
    if not isinstance(spec, dict):
        raise ValidationError("constellation: expected a JSON object")
    kind = spec.get("type")
    if kind == "psk":
        order = spec.get("order")
        if not isinstance(order, int) or isinstance(order, bool):
            raise ValidationError("constellation.order: expected an integer >= 2")
        try:
            return make_psk(order)
        except ValidationError as exc:
            raise ValidationError(f"constellation.order: {exc}") from None
    if kind == "points":
        if "coords" not in spec:
            raise ValidationError("constellation.coords: missing")
        try:
            pts = as_points(spec["coords"])
        except (ValidationError, TypeError, ValueError) as exc:
            raise ValidationError(f"constellation.coords: {exc}") from None
        probs = spec.get("probs")
        try:
            return make_points(pts, probs)
        except (ValidationError, TypeError, ValueError) as exc:
            raise ValidationError(f"constellation.probs: {exc}") from None
    if kind == "gaussian":
        dim = spec.get("dimension", 1)
        if dim not in (1, 2):
            raise ValidationError("constellation.dimension: expected 1 or 2")
        power = spec.get("power", 1.0)
        if not isinstance(power, (int, float)) or not power > 0:
            raise ValidationError("constellation.power: expected a positive number")
        return gaussian_input(dim, float(power))
    raise ValidationError(f"constellation.type: expected one of {KINDS}, got {kind!r}")


@dataclass(frozen=True)
class ChannelPoint:
    """Block length ``n``, rate ``R`` (nats/symbol), SNR ``eta`` and noise variance.

    ``sigma2`` defaults to 1/eta (unit-energy alphabets).  ``n`` may be
    ``math.inf`` to drop the finite-length ln4/n term.
    """

    n: float
    R: float
    eta: float
    sigma2: float = field(default=None)

    def __post_init__(self):
        if not (self.n == math.inf or (float(self.n).is_integer() and self.n >= 1)):
            raise ValidationError(f"block length must be a positive integer, got {self.n!r}")
        if not (self.R >= 0 and math.isfinite(self.R)):
            raise ValidationError(f"rate must be nonnegative and finite, got {self.R!r}")
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ValidationError(f"SNR must be positive and finite, got {self.eta!r}")
        if self.sigma2 is None:
            object.__setattr__(self, "sigma2", 1.0 / self.eta)
        elif not self.sigma2 > 0:
            raise ValidationError("sigma2 must be positive")

    @classmethod
    def for_constellation(cls, c: Constellation, n, R, eta) -> "ChannelPoint":
        """Operating point whose noise variance gives SNR ``eta`` for ``c``'s mean power."""
        return cls(n, R, eta, c.mean_power / eta)

    @property
    def log4_over_n(self) -> float:
        return 0.0 if self.n == math.inf else math.log(4.0) / self.n


@dataclass(frozen=True)
class PowerConstraint:
    avg_power: float
    peak_amplitude: float = math.inf

    def __post_init__(self):
        if not self.avg_power > 0:
            raise ValidationError("average power must be positive")
        if not self.peak_amplitude > 0:
            raise ValidationError("peak amplitude must be positive")
        if math.isfinite(self.peak_amplitude) and self.avg_power > self.peak_amplitude**2:
            raise ValidationError("average power exceeds the squared peak amplitude")


def squared_distances(pts: np.ndarray) -> np.ndarray:
    diff = pts[:, None, :] - pts[None, :, :]
    return (diff**2).sum(axis=-1)


def pairwise_bhattacharyya(c: Constellation, sigma2: float) -> np.ndarray:
    """Matrix of integral sqrt(p(y|x_i) p(y|x_j)) dy = exp(-|x_i - x_j|^2 / (8 sigma2))."""
    if not c.is_discrete:
        raise UnsupportedKindError("Bhattacharyya matrix needs a discrete constellation")
    if not sigma2 > 0:
        raise ValidationError("sigma2 must be positive")
    return np.exp(-squared_distances(c.points) / (8.0 * sigma2))


def bhattacharyya_k_matrix(M: int) -> np.ndarray:
    """|x_i - x_j|^2 / 8 for unit-energy M-PSK, so that B_ij = exp(-eta K_ij)."""
    return squared_distances(make_psk(M).points) / 8.0


def printed_k_matrix(M: int) -> np.ndarray:
    """K_ij = 4(b1^2 + b2^2) - (a1^2 + a2^2) for M-PSK in its commonly printed form.

    Reporting only: this does not reduce to the Bhattacharyya exponent
    (e.g. it gives 4 for the BPSK cross term where |x-x'|^2/8 = 1/2).
    """
    theta = 2.0 * np.pi * np.arange(M) / M
    c, s = np.cos(theta), np.sin(theta)
    a1 = c[:, None] + c[None, :]
    a2 = s[:, None] + s[None, :]
    b1 = 0.5 * (c[:, None] ** 2 + c[None, :] ** 2)
    b2 = 0.5 * (s[:, None] ** 2 + s[None, :] ** 2)
    return 4.0 * (b1**2 + b2**2) - (a1**2 + a2**2)


def db_to_eta(snr_db: float, reference: str = "eta", rate_bits: float | None = None) -> float:
    """Convert an SNR in dB to eta = Es / sigma2.

    ``reference`` selects what the dB figure measures: ``eta`` itself,
    Es/N0 (N0 = 2 sigma2), or Eb/N0 (Eb = Es / rate_bits).
    """
    lin = 10.0 ** (snr_db / 10.0)
    if reference == "eta":
        return lin
    if reference == "es_n0":
        return 2.0 * lin
    if reference == "eb_n0":
        if rate_bits is None or not rate_bits > 0:
            raise ValidationError("Eb/N0 reference needs a positive rate in bits")
        return 2.0 * rate_bits * lin
    raise ValidationError(f"snr reference must be one of {SNR_REFERENCES}")


def eta_to_db(eta: float, reference: str = "eta", rate_bits: float | None = None) -> float:
    return 10.0 * math.log10(eta / db_to_eta(0.0, reference, rate_bits))


def bits_to_nats(rate: float) -> float:
    return rate * math.log(2.0)


def nats_to_bits(rate: float) -> float:
    return rate / math.log(2.0)

