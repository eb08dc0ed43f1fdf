import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gcperim.constants import unit_ball_volume, variance_constant
from gcperim.diagnostics import centering_constant, decompose, g1, g1_variance, g2, phi_pair
from gcperim.geometry import AxisSlab, Ball, EmptySet
from gcperim.neighbor_graph import cut_count_naive
from gcperim.sampling import LabeledCloud, make_cloud

DISC = Ball((0.5, 0.5), 0.25)
EPS = 0.05


@pytest.fixture(scope="module")
def p_disc():
    return centering_constant(DISC, EPS)


def test_g1_off_tube(p_disc):
    assert g1([[0.5, 0.5], [0.9, 0.9]], DISC, EPS, p_disc).tolist() == [-p_disc, -p_disc]


def test_g1_slab_interface():
    slab = AxisSlab(0, 0.5, 2)
    p = centering_constant(slab, EPS)
    assert float(g1([0.5, 0.5], slab, EPS, p)) == pytest.approx(unit_ball_volume(2) / (2 * EPS) - p)


def test_g1_is_centred(p_disc):
    x = np.random.default_rng(0).random((1_000_000, 2))
    vals = g1(x, DISC, EPS, p_disc)
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    assert abs(vals.mean()) <= 3 * se


def test_g2_far_apart_off_tube(p_disc):
    assert float(g2([0.5, 0.5], [0.95, 0.95], DISC, EPS, p_disc)) == pytest.approx(p_disc)
    # same label, close, both off the tube
    assert float(g2([0.5, 0.5], [0.51, 0.5], DISC, EPS, p_disc)) == pytest.approx(p_disc)


def test_g2_is_degenerate_in_each_argument(p_disc):
    x = np.array([0.5 + 0.25 - 0.01, 0.5])  # a tube point
    y = np.random.default_rng(1).random((1_000_000, 2))
    vals = g2(np.broadcast_to(x, y.shape), y, DISC, EPS, p_disc)
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    assert abs(vals.mean()) <= 3 * se


def test_phi_pair_kernel():
    val = phi_pair([0.74, 0.5], [0.76, 0.5], DISC, EPS)
    assert float(val) == pytest.approx(EPS**-3)
    assert float(phi_pair([0.7, 0.5], [0.72, 0.5], DISC, EPS)) == 0.0


def brute_u2(cloud, shape, eps, p):
    pts = cloud.points
    i, j = np.triu_indices(cloud.n, 1)
    return 2 * math.fsum(g2(pts[i], pts[j], shape, eps, p)) / (cloud.n * (cloud.n - 1))


@given(st.integers(0, 2**32 - 1), st.integers(2, 120))
def test_identity_and_u2_match_brute_force(seed, n):
    p = centering_constant(DISC, EPS)
    cloud = make_cloud(DISC, n, seed)
    terms = decompose(cloud, DISC, EPS, p)
    assert abs(terms.identity_residual) <= 1e-10 * max(1.0, abs(terms.gper))
    assert terms.u2 == pytest.approx(brute_u2(cloud, DISC, EPS, p), abs=1e-9 * max(1, abs(terms.u2)))
    assert terms.u1 == pytest.approx(np.mean(terms.g1_samples))


def test_decompose_cloud_off_tube(p_disc):
    pts = np.array([[0.5, 0.5], [0.52, 0.5], [0.9, 0.9], [0.1, 0.1]])
    cloud = LabeledCloud(pts, DISC.contains(pts))
    terms = decompose(cloud, DISC, EPS, p_disc)
    assert cut_count_naive(cloud, EPS) == 0
    assert terms.u1 == pytest.approx(-p_disc)
    assert 2 * terms.u1 + terms.u2 == pytest.approx(-p_disc)


def test_decompose_default_centering():
    cloud = make_cloud(DISC, 500, 4)
    terms = decompose(cloud, DISC, EPS)
    assert terms.p_eps == pytest.approx(centering_constant(DISC, EPS))


def test_decompose_needs_two_points():
    with pytest.raises(ValueError):
        decompose(make_cloud(DISC, 1, 0), DISC, EPS, 1.0)


def test_u1_variance_matches_g1_variance():
    n, trials = 2000, 300
    p = centering_constant(DISC, EPS)
    u1 = [decompose(make_cloud(DISC, n, s), DISC, EPS, p).u1 for s in range(trials)]
    var_g1, _ = g1_variance(DISC, EPS, m=200_000)
    ratio = np.var(u1, ddof=1) / (var_g1 / n)
    # sampling error of a variance from 300 draws is about sqrt(2/300) = 8%
    assert 0.75 <= ratio <= 1.25


def test_g1_variance_scaled_limit():
    ball = Ball((0.5, 0.5), 1 / 3)
    var, se = g1_variance(ball, 0.02, m=400_000, seed=1)
    ratio = 0.02 * var / (variance_constant(2) * ball.exact_perimeter)
    assert 0.9 <= ratio <= 1.1
    assert se > 0


def test_g1_variance_standard_error_law():
    _, se1 = g1_variance(DISC, EPS, m=100_000, seed=2)
    _, se2 = g1_variance(DISC, EPS, m=200_000, seed=3)
    assert se1 / se2 == pytest.approx(math.sqrt(2), rel=0.1)


def test_g1_variance_empty_and_unsupported():
    assert g1_variance(EmptySet(2), 0.05) == (0.0, 0.0)
    with pytest.raises(ValueError):
        g1_variance(AxisSlab(0, 0.5, 2), 0.05)


def test_regime_dominance():
    # dense: 2 U1 dominates; sparse: U2 dominates
    p = centering_constant(DISC, EPS)
    dense = [decompose(make_cloud(DISC, 5000, s), DISC, EPS, p) for s in range(60)]
    assert np.var([2 * t.u1 for t in dense]) > np.var([t.u2 for t in dense])
    eps_s = 0.004
    p_s = centering_constant(DISC, eps_s)
    sparse = [decompose(make_cloud(DISC, 5000, s), DISC, eps_s, p_s) for s in range(60)]
    assert np.var([2 * t.u1 for t in sparse]) < np.var([t.u2 for t in sparse])
