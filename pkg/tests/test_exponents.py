import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from explab.channel import ChannelPoint, gaussian_input, make_points, make_psk
from explab.exponents import Region, e0, e0_derivative, ex, ex_derivative, region_report


def mutual_information_1d(points, probs, sigma2):
    """I(X;Y) in nats by direct integration of the output entropy."""
    pts, q = np.asarray(points, float), np.asarray(probs, float)

    def py(y):
        return float(q @ np.exp(-(y - pts) ** 2 / (2 * sigma2))) / math.sqrt(2 * math.pi * sigma2)

    def integrand(y):
        p = py(y)
        return -p * math.log(p) if p > 0 else 0.0

    s = math.sqrt(sigma2)
    h, _ = integrate.quad(integrand, pts.min() - 12 * s, pts.max() + 12 * s, limit=400, epsabs=1e-13)
    return h - 0.5 * math.log(2 * math.pi * math.e * sigma2)


@pytest.mark.parametrize("eta", [0.5, 2.0, 10.0])
def test_bpsk_capacity_is_mutual_information(eta):
    c = make_psk(2)
    cap = e0_derivative(c, 1 / eta, 0.0)
    assert cap == pytest.approx(mutual_information_1d([-1, 1], [0.5, 0.5], 1 / eta), abs=1e-6)


def test_pam_capacity_is_mutual_information():
    pts, q = [-3, -1, 1, 3], [0.1, 0.4, 0.4, 0.1]
    c = make_points(pts, q)
    assert e0_derivative(c, 0.7, 0.0) == pytest.approx(mutual_information_1d(pts, q, 0.7), abs=1e-6)


@pytest.mark.parametrize("M", [2, 4, 8])
@pytest.mark.parametrize("eta", [0.5, 2.0, 10.0])
def test_eo_equals_ex_at_one(M, eta):
    c = make_psk(M)
    assert e0(c, 1 / eta, 1.0) == pytest.approx(ex(c, 1 / eta, 1.0), rel=1e-8)


def test_gaussian_closed_forms():
    g = gaussian_input()
    eta = 3.0
    assert e0(g, 1 / eta, 0.5) == pytest.approx(0.5 * math.log(1 + eta / 1.5))
    assert ex(g, 1 / eta, 2.0) == pytest.approx(2 * math.log(1 + eta / 4))
    assert e0(g, 1 / eta, 1.0) == pytest.approx(ex(g, 1 / eta, 1.0))


@pytest.mark.parametrize("eta", [1.0, 2.0, 8.0])
def test_gaussian_derivatives_match_finite_differences(eta):
    g, s2, h = gaussian_input(), 1 / eta, 1e-5
    for rho in (0.0, 0.4, 1.0):
        lo = max(rho - h, 0.0)
        fd = (e0(g, s2, rho + h) - e0(g, s2, lo)) / (rho + h - lo)
        assert e0_derivative(g, s2, rho) == pytest.approx(fd, abs=1e-5 if rho == 0 else 1e-8)
    fd = (ex(g, s2, 1 + h) - ex(g, s2, 1 - h)) / (2 * h)
    assert ex_derivative(g, s2, 1.0) == pytest.approx(fd, abs=1e-8)


def test_discrete_ex_derivative_matches_finite_differences():
    c, s2, h = make_psk(8), 0.2, 1e-5
    for rho in (1.0, 3.0, 20.0):
        fd = (ex(c, s2, rho + h) - ex(c, s2, rho - h)) / (2 * h)
        assert ex_derivative(c, s2, rho) == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("eta", [1.0, 2.0, 8.0])
def test_gaussian_thresholds(eta):
    rep = region_report(gaussian_input(), ChannelPoint(50, 0.1, eta))
    assert rep.capacity == pytest.approx(math.log(1 + eta))
    assert rep.r_crit == pytest.approx(math.log(1 + eta / 2) - eta / (4 + 2 * eta))
    assert rep.r1_max == pytest.approx(math.log(1 + eta / 2) - eta / (2 + eta) - math.log(4) / 50)


@pytest.mark.parametrize("c", [make_psk(2), make_psk(4), gaussian_input()], ids=["bpsk", "qpsk", "gauss"])
@pytest.mark.parametrize("eta", [0.5, 4.0, 30.0])
def test_thresholds_ordered(c, eta):
    rep = region_report(c, ChannelPoint.for_constellation(c, 100, 0.1, eta))
    assert rep.r1_max < rep.r_crit < rep.capacity


def test_region_labels():
    rep = region_report(gaussian_input(), ChannelPoint(50, 0.1, 10.0))
    assert rep.region_of(0.0) is Region.REGION1
    assert rep.region_of(1.2) is Region.REGION2
    assert rep.region_of(2.0) is Region.REGION3
    assert rep.region_of(3.0) is Region.ABOVE_CAPACITY
    assert Region.ABOVE_CAPACITY.index == 4


@given(rho=st.floats(0.05, 0.95), eta=st.floats(0.2, 30))
def test_bpsk_eo_concave_increasing(rho, eta):
    c, s2, h = make_psk(2), 1 / eta, 0.04
    a, b, d = e0(c, s2, rho - h), e0(c, s2, rho), e0(c, s2, rho + h)
    assert a <= b <= d
    assert a + d - 2 * b <= 1e-12


@given(eta=st.floats(0.2, 30))
def test_bpsk_capacity_below_ln2(eta):
    cap = region_report(make_psk(2), ChannelPoint(10, 0.1, eta)).capacity
    assert 0 < cap < math.log(2)
