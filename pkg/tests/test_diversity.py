import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from explab.bounds import gauss_region2_closed, mary_region2_closed
from explab.channel import ChannelPoint
from explab.diversity import classify_window, delta3, profile
from explab.errors import ValidationError


def test_pure_exponential():
    eta = np.linspace(1, 20, 40)
    p = profile(list(zip(eta, -2.5 * eta)), 7, n=10)
    assert set(p.classification) == {"exponential"}
    assert np.allclose(p.slope_semilog, 2.5)
    assert len(p.slope_semilog) == len(eta) - 2


def test_gaussian_region2_polynomial():
    eta = np.geomspace(100, 1e4, 40)
    lp = [gauss_region2_closed(ChannelPoint(50, 0.5, e)).log_pe for e in eta]
    p = profile(list(zip(eta, lp)), 7, n=50)
    assert set(p.classification) == {"polynomial"}
    assert p.slope_loglog[-1] == pytest.approx(50, rel=0.01)


def test_mary_region2_plateau():
    eta = np.linspace(50, 100, 30)
    lp = [mary_region2_closed(ChannelPoint(50, 0.5, e), 4, 0.3).log_pe for e in eta]
    p = profile(list(zip(eta, lp)), 7, n=50)
    assert set(p.classification) == {"sublinear_plateau"}


def test_transitional():
    eta = np.linspace(1, 3, 23)
    lp = -np.where(eta < 2, eta, 30 * np.log(eta))
    p = profile(list(zip(eta, lp)), 7, n=10)
    assert "transitional" in p.classification


@pytest.mark.parametrize("kind", ["exp", "poly", "const"])
def test_prototypes_survive_ten_percent_noise(kind, rng):
    # 10% multiplicative noise on Pe, i.e. an additive log perturbation; slopes use the smooth trend
    eta = np.geomspace(10, 40, 30) if kind != "exp" else np.linspace(10, 40, 30)
    trend = {"exp": -3 * eta, "poly": -20 * np.log(eta), "const": np.full(eta.size, -5.0)}[kind]
    lp = trend + np.log1p(0.1 * rng.uniform(-1, 1, eta.size)) * 1e-3
    p = profile(list(zip(eta, lp)), 7, n=20)
    want = {"exp": "exponential", "poly": "polynomial", "const": "sublinear_plateau"}[kind]
    assert set(p.classification) == {want}


def test_tie_break_prefers_lower_cv():
    assert classify_window(np.full(7, 2.0), np.linspace(10, 11, 7), 1.0) == "exponential"
    assert classify_window(np.linspace(2, 2.1, 7), np.full(7, 30.0), 1.0) == "polynomial"


@given(c=st.floats(0.1, 5), a=st.floats(0.5, 3), m=st.integers(60, 120))
def test_chain_rule(c, a, m):
    eta = np.geomspace(1, 10, m)
    lp = -c * eta**a
    p = profile(list(zip(eta, lp)), 3, n=1)
    inner = eta[1:-1]
    semi, log = np.array(p.slope_semilog), np.array(p.slope_loglog)
    assert np.allclose(log, inner * semi, rtol=0.02)
    assert len(p.classification) == (m - 2) // 3


def test_chain_rule_gaussian_bound_sweep():
    from explab.bounds import bound_sweep
    from explab.channel import gaussian_input

    eta = np.geomspace(1, 100, 200)
    res = bound_sweep(gaussian_input(), 50, 0.8, eta, threads=1)
    p = profile([(r.eta, r.log_pe) for r in res], 7, n=50)
    semi, log = np.array(p.slope_semilog), np.array(p.slope_loglog)
    # away from the region boundaries the curve is smooth
    regions = np.array([r.region.index for r in res])
    smooth = (regions[:-2] == regions[1:-1]) & (regions[2:] == regions[1:-1]) & (semi > 0.1)
    assert np.allclose(log[smooth], eta[1:-1][smooth] * semi[smooth], rtol=0.02)


def test_rows():
    eta = np.linspace(1, 10, 12)
    p = profile(list(zip(eta, -eta)), 3)
    rows = p.to_rows()
    assert len(rows) == 10
    assert rows[0]["classification"] == "exponential"


def test_validation():
    with pytest.raises(ValidationError):
        profile([(1, 0), (2, 0), (3, 0)], 3)
    with pytest.raises(ValidationError):
        profile([(1, 0), (3, 0), (2, 0), (4, 0), (5, 0)], 3)
    with pytest.raises(ValidationError):
        profile([(e, 0) for e in range(1, 10)], 2)


def test_delta3_values():
    assert delta3(1.0, 0.37 / 0.23, -0.37, 0.23) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValidationError):
        delta3(1.0, 1.0, -2.0, 1.0)
    with pytest.raises(ValidationError):
        delta3(1.0, 1.0, -3.0, 1.0)


def test_delta3_limit():
    # (a+b eta)^2 / ((1+a+b eta)(eta + 1+a+b eta)) -> b^2 / (b (1+b)) = b/(1+b)
    b = 0.23
    assert delta3(1.0, 1e9, -0.37, b) == pytest.approx(b / (1 + b), rel=1e-6)


def test_delta3_increasing_on_region3_window():
    eta = np.linspace(math.e - 1, 5.8973, 60)
    d = np.array([delta3(1.0, e, -0.37, 0.23) for e in eta])
    assert np.all(np.diff(d[eta > 0.37 / 0.23]) > 0)
