import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import comb

from normrays import hermlab as hl
from normrays import secring as sr

# mpmath oracles in the x = log|z|^2 coordinate (tests/oracles/compute_oracles.py),
# metric with symplectic potential u_FS + 0.3 y^3, degree 6
CUBIC_HILB_LOG = [-1.9730644664644869, -3.776683517773982, -4.6473949308449564, -4.7868302356713691,
                  -4.1996821964381118, -2.7841157178612929, -0.25189771312837179]
CUBIC_BAN_LOG_SUP = [0.0, -1.3475169599322474, -1.8762091715511051, -1.9669415416798359,
                     -1.6428758382177718, -0.83085029326558073, 0.9]


def test_multiplication_matrices():
    m = sr.mult_matrix(2, 3)
    assert m.shape == (7, 10)
    # every monomial of Sym^2 lands on exactly one z^c
    assert np.all(m.sum(axis=0) == 1)
    m2 = sr.mult2_matrix(2, 3)
    assert m2.shape == (6, 12)
    assert np.all(m2.sum(axis=0) == 1)
    # z^1 (x) z^2 -> z^3
    assert m2[3, 1 * 4 + 2] == 1.0


def test_u_fs_endpoints():
    assert sr.u_fs(np.array([0.0, 1.0])) == pytest.approx([0.0, 0.0])
    assert sr.u_fs(0.5) == pytest.approx(-math.log(2))


@pytest.mark.parametrize("k", [0, 1, 5, 12])
def test_hilb_fs_closed_form(fs_metric, k):
    g = np.exp(sr.hilb_log_diag(fs_metric, k))
    assert np.allclose(g, sr.hilb_fs_exact(k), rtol=1e-9, atol=0)
    if k:
        assert np.allclose(1 / (g * (k + 1)), comb(k, np.arange(k + 1)), rtol=1e-9)


def test_hilb_cubic_oracle(cubic_metric):
    assert np.allclose(sr.hilb_log_diag(cubic_metric, 6), CUBIC_HILB_LOG, atol=1e-9)


def test_hilb_negative_degree(fs_metric):
    with pytest.raises(ValueError):
        sr.hilb_log_diag(fs_metric, -1)


@pytest.mark.parametrize("c", [0.3, -1.2])
def test_scaled_metric_distance(fs_metric, c):
    """Adding c to phi multiplies L^2 norms of degree k by e^{-kc/2}."""
    k = 7
    a = sr.hilb_log_diag(fs_metric, k)
    b = sr.hilb_log_diag(fs_metric.scaled(c), k)
    d = hl.dp_distance(sr.DiagonalNorm(a).herm(), sr.DiagonalNorm(b).herm(), math.inf)
    assert d == pytest.approx(abs(c) * k / 2, rel=1e-8)


def test_ban_monomials_exact(cubic_metric, fs_metric):
    assert np.allclose(sr.BanNorm(cubic_metric, 6).log_monomials, CUBIC_BAN_LOG_SUP, atol=1e-9)
    k = 5
    a = np.arange(k + 1)
    y = a / k
    with np.errstate(divide="ignore", invalid="ignore"):
        expect = 0.5 * k * np.nan_to_num(y * np.log(y) + (1 - y) * np.log(1 - y))
    assert np.allclose(sr.BanNorm(fs_metric, k).log_monomials, expect, atol=1e-12)


def test_ban_grid_norm_on_monomial(fs_metric):
    ban = sr.BanNorm(fs_metric, 4)
    e = np.zeros(5)
    e[2] = 1.0
    assert ban.log_norm(e) == pytest.approx(ban.log_monomials[2], abs=1e-4)
    assert ban.log_norm(e) <= ban.log_monomials[2] + 1e-12


def test_ban_circle_average_lower_bound(fs_metric, rng):
    ban = sr.BanNorm(fs_metric, 4)
    c = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    lo = np.max(np.log(np.abs(c)) + ban.log_monomials)
    hi = math.log(np.sum(np.abs(c) * np.exp(ban.log_monomials)))
    assert lo - 1e-4 <= ban.log_norm(c) <= hi + 1e-12


@pytest.mark.parametrize("k", [2, 6, 12])
def test_ban_hilb_bracket(fs_metric, k):
    lo, hi = sr.ban_hilb_dinf_bracket(fs_metric, k)
    assert 0 <= lo <= hi
    # both sides are O(log k)
    assert hi <= 0.5 * math.log(k + 1) + 0.5 * math.log(2 * math.pi * k) + 1


def test_fs_eval_degree_one(fs_metric):
    """For the standard norm on degree 1 the FS metric is the FS metric on O(1)."""
    h = hl.HermNorm.identity(2)
    for z in (0.0, 0.4, 1.0, 3 - 2j):
        assert sr.fs_eval(h, z) == pytest.approx(1 / math.sqrt(1 + abs(z) ** 2))
    assert sr.fs_eval(h, 1.0) == pytest.approx(1 / math.sqrt(2))


def test_fs_scaling_and_contraction(rng):
    h0 = hl.random_herm(4, rng)
    h1 = hl.random_herm(4, rng)
    x = np.linspace(-8, 8, 201)
    th = rng.uniform(0, 2 * np.pi, x.size)
    q0 = sr.fs_log_q(h0, x, th)
    # e^c ||.|| gives potential shifted by -2c
    assert np.allclose(sr.fs_log_q(h0.scaled(0.7), x, th), q0 - 1.4)
    gap = 0.5 * np.max(np.abs(sr.fs_log_q(h1, x, th) - q0))
    assert gap <= hl.dp_distance(h0, h1, math.inf) + 1e-9


def test_fs_of_hilb_fs_is_close(fs_metric):
    k = 8
    q = sr.fs_log_q(sr.DiagonalNorm(sr.hilb_log_diag(fs_metric, k)), fs_metric.x) / k
    # Bergman density of FS is constant (k+1), so the quotient is exactly log(k+1)/k
    assert np.allclose(q - fs_metric.phi, math.log(k + 1) / k, atol=1e-9)
    m = sr.fs_metric(sr.DiagonalNorm(sr.hilb_log_diag(fs_metric, k)))
    assert sr.lognorm_gap_sup(m, fs_metric) == pytest.approx(0.5 * math.log(k + 1) / k, abs=1e-9)


def test_filtration_profiles():
    lin = sr.MonomialFiltration.linear()
    assert np.array_equal(lin.weights(4), np.arange(5.0))
    assert np.array_equal(sr.MonomialFiltration.trivial().weights(3), np.zeros(4))
    assert np.array_equal(sr.MonomialFiltration.reversed_linear().weights(3), np.arange(3.0, -1, -1))
    assert np.array_equal(lin.shifted(2.0).weights(3), np.arange(4.0) + 6)
    assert lin.submultiplicative_defect(8) <= 1e-12


def test_submultiplicative_defect_detects_failure():
    bad = sr.MonomialFiltration(lambda k, a: np.where(a == 1, 5.0, 0.0), "bump")
    assert bad.submultiplicative_defect(4) > 0
    with pytest.raises(ValueError):
        sr.canonical_approx(bad, 2, kmax=6)


def _brute_weights(w, l):
    best = {}
    k = len(w) - 1
    for combo in np.ndindex(*([k + 1] * l)):
        c = sum(combo)
        best[c] = max(best.get(c, -np.inf), sum(w[i] for i in combo))
    return np.array([best[c] for c in range(k * l + 1)])


def test_canonical_approx_tent():
    tent = sr.MonomialFiltration(lambda k, a: np.minimum(a, k / 2), "tent")
    ca = sr.canonical_approx(tent, 4, kmax=12)
    for d in (4, 8, 12):
        assert np.allclose(ca.weights(d), _brute_weights(tent.weights(4), d // 4))
    # the tent is concave, so the approximation is exact
    assert np.allclose(ca.weights(12), tent.weights(12))
    with pytest.raises(ValueError):
        ca.weights(6)
    assert np.array_equal(ca.weights(0), [0.0])


def test_canonical_approx_trivial():
    ca = sr.canonical_approx(sr.MonomialFiltration.trivial(), 3)
    assert np.array_equal(ca.weights(9), np.zeros(10))


def test_maxplus_power_brute():
    w = np.array([0.0, 1.5, 0.2, 2.0])
    assert np.allclose(sr.maxplus_power(w, 3), _brute_weights(w, 3))


def test_dp_graded_zero_and_shift(fs_metric):
    hb = sr.hilb_graded(fs_metric)
    d0 = sr.dp_graded(hb, hb, 2.0, kmax=6)
    assert np.allclose(d0.values, 0.0)
    hs = sr.hilb_graded(fs_metric.scaled(0.4))
    d = sr.dp_graded(hb, hs, 2.0, kmax=6)
    assert np.allclose(d.values, 0.2, rtol=1e-8)
    assert d.cauchy


def test_dp_graded_ray_equals_filtration_distance(fs_metric):
    hb = sr.hilb_graded(fs_metric)
    lin = sr.MonomialFiltration.linear()
    t = 3.0
    d = sr.dp_graded(hb, sr.ray_graded(hb, lin, t), 1.0, kmax=10)
    # d_1 of weights a over k+1 entries is k/2; divided by k
    assert np.allclose(d.values, t * 0.5, rtol=1e-12)


def test_hilb_ban_gap_decays(fs_metric):
    ks = [2, 4, 8, 16]
    upper = [sr.ban_hilb_dinf_bracket(fs_metric, k)[1] / k for k in ks]
    assert np.all(np.diff(upper) < 0)
    assert upper[-1] <= 0.25


def test_dp_graded_mixed_inputs(fs_metric):
    hb = sr.hilb_graded(fs_metric)
    d1 = sr.dp_graded(hb, hb, math.inf, kmax=4)
    d2 = sr.dp_graded(lambda k: hb(k).herm(), hb, math.inf, kmax=4)
    assert np.allclose(d1.values, d2.values, atol=1e-12)


def test_homogenize_monomial_and_constant(fs_metric):
    ban = sr.ban_graded(fs_metric)
    e = np.zeros(3)
    e[1] = 1.0
    res = sr.homogenize(ban, e, 2, kmax=8)
    # sup norms are multiplicative on monomials
    assert np.allclose(res.values, res.values[0], rtol=1e-3)
    hb = sr.hilb_graded(fs_metric)
    res2 = sr.homogenize(hb, e, 2, kmax=16)
    # L^2 norms of powers increase towards the sup norm (probability measure)
    assert np.all(np.diff(res2.values) >= -1e-12)
    assert res2.values[-1] <= res.values[0] * (1 + 1e-3)
    assert res2.values[-1] == pytest.approx(res.values[0], rel=0.15)
    assert res.values[0] == pytest.approx(0.5, rel=1e-3)
    c = sr.homogenize(hb, np.array([2.0]), 0, kmax=4)
    assert np.allclose(c.values, 2.0)
    with pytest.raises(ValueError):
        sr.homogenize(hb, e, 3)


@pytest.mark.parametrize("k", [1, 3, 6])
def test_sym_l2_identity(k, rng):
    for h in (hl.HermNorm.identity(2), hl.HermNorm.diag([4.0, 1.0]), hl.random_herm(2, rng)):
        assert sr.sym_l2_identity_check(h, k) <= 1e-8


def test_sym_l2_requires_dim_two():
    with pytest.raises(ValueError):
        sr.sym_l2_gram(hl.HermNorm.identity(3), 2)


def test_phong_sturm_trivial_ray(fs_metric):
    res = sr.phong_sturm_ray(sr.MonomialFiltration.trivial(), fs_metric, 5.0, kmax=16)
    # the trivial ray is constant, so this is the Tian sequence log(l+1)/l
    assert np.all(np.diff(res.tail_gaps) <= 1e-12)
    x = res.metric.x
    assert np.allclose(res.potentials[16] - fs_metric.potential(x), math.log(17) / 16, atol=1e-9)


def test_phong_sturm_linear_ray_slope(fs_metric):
    t = 10.0
    res = sr.phong_sturm_ray(sr.MonomialFiltration.linear(), fs_metric, t, kmax=12)
    # weights a give phi_t(x) ~ phi(x + 2t)
    x = np.linspace(-5, 5, 11)
    shifted = np.logaddexp(0, x + 2 * t)
    assert np.max(np.abs(res.metric.potential(x) - shifted)) <= math.log(13) / 12 + 1e-4


def test_metric_validation():
    x = np.linspace(-5, 5, 101)
    with pytest.raises(ValueError):
        sr.from_grid(x, 2.0 * np.logaddexp(0, x))  # slopes exceed 1
    with pytest.raises(ValueError):
        sr.from_grid(x, -np.logaddexp(0, x))


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_lognorm_gap_sup_shift(c1, c2):
    h = sr.fubini_study()
    assert sr.lognorm_gap_sup(h.scaled(c1), h.scaled(c2)) == pytest.approx(abs(c1 - c2) / 2, abs=1e-9)
