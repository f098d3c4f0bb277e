"""Random-coding Monte Carlo: ensemble-average block error rate under exhaustive ML decoding.

Stream layout: codebook ``b`` draws from ``SeedSequence(seed, spawn_key=(b,))``;
within a codebook the generator produces the codebook first, then for each
noise draw the message index followed by the noise vector.  Every codebook
is therefore reproducible on its own, independent of scheduling.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import norm

from .channel import ChannelPoint, Constellation
from .errors import ConfigError, UnsupportedKindError, ValidationError
from .numerics import check_pmf

MAX_N = 16
MAX_MESSAGES = 64
DEFAULT_BUDGET = 10**9
Z95 = float(norm.ppf(0.975))


@dataclass(frozen=True)
class SimConfig:
    n: int
    num_messages: int
    codebooks: int
    noise_draws_per_codebook: int
    seed: int = 0
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        for name in ("n", "num_messages", "codebooks", "noise_draws_per_codebook"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if self.n > MAX_N:
            raise ConfigError(f"n must be <= {MAX_N}")
        if not 2 <= self.num_messages <= MAX_MESSAGES:
            raise ConfigError(f"num_messages must lie in [2, {MAX_MESSAGES}]")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.decode_operations > self.budget:
            raise ConfigError(
                f"decode budget exceeded: {self.decode_operations} > {self.budget} "
                "(num_messages^2 * noise_draws * codebooks)")

    @property
    def decode_operations(self) -> int:
        return self.num_messages**2 * self.noise_draws_per_codebook * self.codebooks

    @property
    def trials(self) -> int:
        return self.codebooks * self.noise_draws_per_codebook


@dataclass(frozen=True)
class SimResult:
    pe_hat: float
    ci95_halfwidth: float
    trials: int
    errors: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def ci95_halfwidth(errors: int, trials: int) -> float:
    """Normal-approximation half-width; Wilson interval half-width when errors or successes < 30."""
    p = errors / trials
    if min(errors, trials - errors) >= 30:
        return Z95 * math.sqrt(p * (1 - p) / trials)
    z2 = Z95 * Z95
    return Z95 * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / (1 + z2 / trials)


def messages_for_rate(n: int, R: float) -> int:
    """Smallest message count with e^{nR} <= M."""
    return max(2, math.ceil(math.exp(n * R) - 1e-9))


def _one_codebook(index, pts, q, sigma, cfg: SimConfig, fixed):
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(index,)))
    M, n = cfg.num_messages, cfg.n
    if fixed is None:
        symbols = rng.choice(pts.shape[0], size=(M, n), p=q)
        book = pts[symbols]  # (M, n, d)
    else:
        book = fixed
    flat = book.reshape(M, -1)
    errors = 0
    for _ in range(cfg.noise_draws_per_codebook):
        msg = int(rng.integers(M))
        y = flat[msg] + sigma * rng.standard_normal(flat.shape[1])
        dist = ((flat - y) ** 2).sum(axis=1)
        # ties resolve to the lowest index, which counts as an error unless it is msg
        errors += int(np.argmin(dist) != msg)
    return errors


def simulate_ensemble(c: Constellation, q, point: ChannelPoint, cfg: SimConfig,
                      threads: int | None = None, codebook=None) -> SimResult:
    """Estimate the random-coding ensemble error probability at ``point``.

    ``q`` is the symbol distribution used to draw codewords (it may differ
    from ``c.pmf``).  ``codebook`` (shape (M, n) or (M, n, d)) fixes the code
    instead of drawing it, which is handy for closed-form checks.
    """
    if not c.is_discrete:
        raise UnsupportedKindError("simulation needs a discrete constellation")
    pts = c.points
    q = check_pmf(q, pts.shape[0])
    if point.n != cfg.n:
        raise ConfigError(f"block length mismatch: point.n={point.n}, cfg.n={cfg.n}")
    if math.exp(point.R * cfg.n) > cfg.num_messages * (1 + 1e-9):
        raise ConfigError(f"num_messages={cfg.num_messages} is below e^(nR)={math.exp(point.R * cfg.n):.4g}")
    fixed = None
    if codebook is not None:
        fixed = np.asarray(codebook, dtype=float)
        if fixed.ndim == 2:
            fixed = fixed[:, :, None]
        if fixed.shape != (cfg.num_messages, cfg.n, pts.shape[1]):
            raise ValidationError(f"codebook shape {fixed.shape} does not match (M, n, d)")
    sigma = math.sqrt(point.sigma2)
    workers = threads or int(os.environ.get("EXPLAB_THREADS", "0") or 0) or (os.cpu_count() or 1)
    workers = max(1, min(workers, cfg.codebooks))

    def run(b):
        return _one_codebook(b, pts, q, sigma, cfg, fixed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(run, range(cfg.codebooks)))
    else:
        counts = [run(b) for b in range(cfg.codebooks)]
    errors = int(sum(counts))  # exact integer sum, independent of order
    trials = cfg.trials
    return SimResult(errors / trials, ci95_halfwidth(errors, trials), trials, errors)
