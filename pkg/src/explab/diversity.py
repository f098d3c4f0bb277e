"""Local diversity order: slopes of log Pe against SNR and a per-window decay label."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

CLASSES = ("exponential", "polynomial", "sublinear_plateau", "transitional")
CV_MAX = 0.1
PLATEAU_FRACTION = 0.05


@dataclass(frozen=True)
class DiversityProfile:
    samples: tuple
    slope_semilog: tuple
    slope_loglog: tuple
    classification: tuple
    window: int = 7
    n: float = 1.0

    @property
    def interior_eta(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples[1:-1]])

    def windows(self):
        """(start, stop) index ranges into the interior slope arrays, one per label."""
        w = self.window
        return [(k * w, (k + 1) * w) for k in range(len(self.classification))]

    def to_rows(self) -> list[dict]:
        rows = []
        labels = {}
        for k, (a, b) in enumerate(self.windows()):
            for i in range(a, b):
                labels[i] = (k, self.classification[k])
        for i, eta in enumerate(self.interior_eta):
            win, label = labels.get(i, (None, ""))
            rows.append({
                "eta": float(eta),
                # +0.0 turns -0.0 (flat stretches of a negated gradient) into 0.0
                "log_pe": self.samples[i + 1][1] + 0.0,
                "slope_semilog": self.slope_semilog[i] + 0.0,
                "slope_loglog": self.slope_loglog[i] + 0.0,
                "window": win,
                "classification": label,
            })
        return rows


def _cv(x: np.ndarray) -> float:
    m = float(np.mean(x))
    if m == 0:
        return math.inf
    return float(np.std(x) / abs(m))


def classify_window(semilog: np.ndarray, loglog: np.ndarray, n: float = 1.0) -> str:
    """Label one window of slopes.

    A flat curve is a plateau before anything else; when both the semilog and
    log-log slopes are near-constant the steadier one wins.
    """
    threshold = PLATEAU_FRACTION * n
    if abs(np.mean(semilog)) < threshold and abs(np.mean(loglog)) < threshold:
        return "sublinear_plateau"
    cv_exp, cv_poly = _cv(semilog), _cv(loglog)
    is_exp = cv_exp < CV_MAX and abs(np.mean(semilog)) > threshold
    is_poly = cv_poly < CV_MAX
    if is_exp and is_poly:
        return "exponential" if cv_exp <= cv_poly else "polynomial"
    if is_exp:
        return "exponential"
    if is_poly:
        return "polynomial"
    return "transitional"


def profile(samples, window: int = 7, n: float = 1.0) -> DiversityProfile:
    """Slopes -d log_pe/d eta and -d log_pe/d ln eta at interior samples, plus window labels.

    ``samples`` are (eta, log_pe) pairs with eta strictly increasing; ``n``
    scales the plateau threshold (0.05 n).  Interior points are grouped into
    consecutive non-overlapping windows; a ragged tail is left unlabelled.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError("samples must be (eta, log_pe) pairs")
    if not isinstance(window, (int, np.integer)) or window < 3:
        raise ValidationError("window must be an integer >= 3")
    if arr.shape[0] < window + 2:
        raise ValidationError(f"need at least window+2 = {window + 2} samples, got {arr.shape[0]}")
    eta, lp = arr[:, 0], arr[:, 1]
    if not np.all(np.isfinite(arr)):
        raise ValidationError("samples must be finite")
    if np.any(eta <= 0) or np.any(np.diff(eta) <= 0):
        raise ValidationError("eta must be positive and strictly increasing")
    if not n > 0:
        raise ValidationError("n must be positive")

    semilog = -np.gradient(lp, eta)[1:-1]
    loglog = -np.gradient(lp, np.log(eta))[1:-1]
    labels = []
    for k in range(semilog.size // window):
        sl = slice(k * window, (k + 1) * window)
        labels.append(classify_window(semilog[sl], loglog[sl], n))
    return DiversityProfile(
        tuple((float(a), float(b)) for a, b in arr),
        tuple(float(v) for v in semilog),
        tuple(float(v) for v in loglog),
        tuple(labels),
        int(window),
        float(n),
    )


def delta3(R: float, eta: float, a: float, b: float) -> float:
    """(a+b eta)^2 / [(1+a+b eta)^2 (eta/(1+a+b eta) + 1)] with rho* ~ a + b eta.

    For large eta this tends to b/(1+b).  ``R`` only fixes which (a, b) fit
    applies and is kept for call-site symmetry with the other rate functions.
    """
    lin = a + b * eta
    den = 1.0 + lin
    if den == 0:
        raise ValidationError("delta3 has a pole at 1 + a + b*eta = 0")
    if not den > 0:
        raise ValidationError("delta3 requires 1 + a + b*eta > 0")
    return lin**2 / (den**2 * (eta / den + 1.0))
