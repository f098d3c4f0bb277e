import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from explab.channel import (
    ChannelPoint,
    PowerConstraint,
    bhattacharyya_k_matrix,
    bits_to_nats,
    constellation_from_json,
    db_to_eta,
    eta_to_db,
    gaussian_input,
    make_points,
    make_psk,
    nats_to_bits,
    pairwise_bhattacharyya,
    printed_k_matrix,
)
from explab.errors import UnsupportedKindError, ValidationError


def test_psk_points_unit_energy():
    c = make_psk(8)
    assert c.points.shape == (8, 2)
    assert np.allclose((c.points**2).sum(axis=1), 1.0)
    assert c.mean_power == pytest.approx(1.0)
    assert c.pmf.sum() == pytest.approx(1.0)


def test_psk_order_checks():
    for bad in (1, 0, 2.5, True):
        with pytest.raises(ValidationError):
            make_psk(bad)


def test_points_uniform_default():
    c = make_points([-1, 0, 2])
    assert np.allclose(c.pmf, 1 / 3)
    assert c.dimension == 1


def test_pmf_tolerance():
    make_points([0, 1], [0.5, 0.5 + 5e-13])
    with pytest.raises(ValidationError):
        make_points([0, 1], [0.5, 0.5 + 1e-9])


def test_gaussian_has_no_points():
    g = gaussian_input()
    assert not g.is_discrete
    with pytest.raises(UnsupportedKindError):
        g.points
    with pytest.raises(UnsupportedKindError):
        pairwise_bhattacharyya(g, 1.0)


@pytest.mark.parametrize(
    "text, field",
    [
        ('{"type":"psk","order":1}', "constellation.order"),
        ('{"type":"psk"}', "constellation.order"),
        ('{"type":"points","probs":[1]}', "constellation.coords"),
        ('{"type":"points","coords":[[0,0],[1,1]],"probs":[0.2,0.2]}', "constellation.probs"),
        ('{"type":"gaussian","dimension":3}', "constellation.dimension"),
        ('{"type":"hexagon"}', "constellation.type"),
        ('{"type":', "constellation"),
    ],
)
def test_json_errors_name_field(text, field):
    with pytest.raises(ValidationError, match=field.replace(".", r"\.")):
        constellation_from_json(text)


def test_json_round_trip():
    for c in (make_psk(4), make_points([[0, 1], [1, 0]], [0.25, 0.75]), gaussian_input(2)):
        again = constellation_from_json(json.dumps(c.to_json()))
        assert again.to_json() == c.to_json()


def test_channel_point_defaults():
    p = ChannelPoint(50, 0.8, 4.0)
    assert p.sigma2 == 0.25
    assert p.log4_over_n == pytest.approx(math.log(4) / 50)
    assert ChannelPoint(math.inf, 0.8, 4.0).log4_over_n == 0.0
    for bad in [(0, 0.1, 1), (2.5, 0.1, 1), (5, -0.1, 1), (5, 0.1, 0)]:
        with pytest.raises(ValidationError):
            ChannelPoint(*bad)


def test_channel_point_scales_with_mean_power():
    c = make_points([-2.0, 2.0])
    p = ChannelPoint.for_constellation(c, 10, 0.1, 8.0)
    assert p.sigma2 == pytest.approx(0.5)


def test_power_constraint():
    PowerConstraint(4.0, 3.0)
    with pytest.raises(ValidationError):
        PowerConstraint(10.0, 3.0)
    with pytest.raises(ValidationError):
        PowerConstraint(-1.0)


def test_bhattacharyya_matrix_bpsk():
    B = pairwise_bhattacharyya(make_psk(2), 0.5)
    assert B[0, 1] == pytest.approx(math.exp(-1.0))
    assert np.allclose(np.diag(B), 1.0)


def test_k_matrices():
    kb = bhattacharyya_k_matrix(2)
    assert kb[0, 1] == pytest.approx(0.5)
    kp = printed_k_matrix(2)
    # the expression as quoted gives 4 on the BPSK cross term
    assert kp[0, 1] == pytest.approx(4.0)
    assert np.allclose(printed_k_matrix(4), printed_k_matrix(4).T)


def test_db_references():
    assert db_to_eta(10.0) == pytest.approx(10.0)
    assert db_to_eta(10.0, "es_n0") == pytest.approx(20.0)
    assert db_to_eta(0.0, "eb_n0", 0.5) == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        db_to_eta(1.0, "eb_n0")
    with pytest.raises(ValidationError):
        db_to_eta(1.0, "ebno")


@given(db=st.floats(-20, 40), ref=st.sampled_from(["eta", "es_n0", "eb_n0"]), rb=st.floats(0.1, 4))
def test_db_round_trip(db, ref, rb):
    assert eta_to_db(db_to_eta(db, ref, rb), ref, rb) == pytest.approx(db, abs=1e-9)


@given(r=st.floats(0, 10))
def test_rate_units(r):
    assert nats_to_bits(bits_to_nats(r)) == pytest.approx(r)
