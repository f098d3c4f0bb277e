import math

import pytest
from scipy.stats import norm

from explab.bounds import random_coding_exponent
from explab.channel import ChannelPoint, gaussian_input, make_points, make_psk
from explab.ensemble import SimConfig, ci95_halfwidth, messages_for_rate, simulate_ensemble
from explab.errors import ConfigError, UnsupportedKindError

BPSK = make_psk(2)


def test_config_validation():
    with pytest.raises(ConfigError):
        SimConfig(17, 4, 1, 1)
    with pytest.raises(ConfigError):
        SimConfig(4, 65, 1, 1)
    with pytest.raises(ConfigError):
        SimConfig(4, 1, 1, 1)
    with pytest.raises(ConfigError, match="budget"):
        SimConfig(16, 64, 10**4, 10**4)


def test_rate_needs_enough_messages():
    p = ChannelPoint(4, math.log(16) / 4, 2.0)
    with pytest.raises(ConfigError):
        simulate_ensemble(BPSK, BPSK.pmf, p, SimConfig(4, 8, 2, 2))
    assert messages_for_rate(8, math.log(16) / 8) == 16


def test_needs_discrete():
    with pytest.raises(UnsupportedKindError):
        simulate_ensemble(gaussian_input(), [1.0], ChannelPoint(2, 0.1, 1.0), SimConfig(2, 2, 1, 1))


def test_noiseless_limit():
    book = [[1, 1, 1, 1], [-1, -1, -1, -1], [1, -1, 1, -1], [-1, 1, -1, 1]]
    line = make_points([-1.0, 1.0])
    res = simulate_ensemble(line, line.pmf, ChannelPoint(4, 0.3, 1e6), SimConfig(4, 4, 3, 200, seed=5),
                            codebook=book)
    assert res.pe_hat == 0.0


def test_antipodal_q_function():
    p = ChannelPoint(1, 0.5, 4.0)
    cfg = SimConfig(1, 2, 20, 2000, seed=11)
    res = simulate_ensemble(BPSK, BPSK.pmf, p, cfg, codebook=[[[1.0, 0.0]], [[-1.0, 0.0]]])
    q = norm.sf(1 / math.sqrt(p.sigma2))
    assert abs(res.pe_hat - q) <= 3 * res.ci95_halfwidth


def test_reproducible_across_threads():
    p = ChannelPoint(6, math.log(8) / 6, 2.0)
    cfg = SimConfig(6, 8, 12, 50, seed=2**63 + 7)
    a = simulate_ensemble(BPSK, BPSK.pmf, p, cfg, threads=1)
    b = simulate_ensemble(BPSK, BPSK.pmf, p, cfg, threads=4)
    assert a == b
    c = simulate_ensemble(BPSK, BPSK.pmf, p, SimConfig(6, 8, 12, 50, seed=8))
    assert c.errors != a.errors or c.pe_hat == a.pe_hat


def test_monotone_in_snr():
    cfg = SimConfig(6, 8, 40, 100, seed=3)
    vals = [simulate_ensemble(BPSK, BPSK.pmf, ChannelPoint(6, math.log(8) / 6, eta), cfg) for eta in (0.5, 2, 8)]
    for lo, hi in zip(vals, vals[1:]):
        assert hi.pe_hat <= lo.pe_hat + 2 * (hi.ci95_halfwidth + lo.ci95_halfwidth)


def test_small_bound_check():
    p = ChannelPoint(6, math.log(8) / 6, 3.0)
    res = simulate_ensemble(BPSK, BPSK.pmf, p, SimConfig(6, 8, 60, 100, seed=4))
    _, er = random_coding_exponent(BPSK, p.sigma2, p.R)
    assert res.pe_hat - 3 * res.ci95_halfwidth <= math.exp(-6 * er)


def test_ci_switches_to_wilson():
    assert ci95_halfwidth(0, 100) > 0
    p = 0.5
    assert ci95_halfwidth(500, 1000) == pytest.approx(1.959963985 * math.sqrt(p * (1 - p) / 1000), rel=1e-8)
