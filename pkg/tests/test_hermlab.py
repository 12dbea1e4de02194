import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from normrays import hermlab as hl


def herm_pairs(max_dim=6):
    return st.tuples(st.integers(2, max_dim), st.integers(0, 2**32 - 1))


class TestHermNorm:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            hl.HermNorm(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_singular(self):
        with pytest.raises(ValueError, match="positive definite"):
            hl.HermNorm(np.array([[1.0, 1.0], [1.0, 1.0]]))

    def test_json_round_trip(self, rng):
        h = hl.random_herm(3, rng)
        back = hl.HermNorm.from_json(h.to_json())
        assert np.allclose(back.gram, h.gram, atol=0, rtol=1e-15)

    def test_value_matches_gram(self):
        h = hl.HermNorm.diag([4.0, 1.0])
        assert h([1.0, 0.0]) == pytest.approx(2.0)
        assert h([1.0, 1.0]) == pytest.approx(math.sqrt(5.0))


class TestTransferAndDistance:
    def test_transfer_examples(self):
        assert np.allclose(hl.transfer(hl.HermNorm.identity(2), hl.HermNorm.diag([4, 1])), np.diag([4, 1]))
        g0 = hl.HermNorm(np.array([[2.0, 1.0], [1.0, 1.0]]))
        assert np.allclose(hl.transfer(g0, hl.HermNorm.identity(2)), [[1, -1], [-1, 2]])

    def test_transfer_identity_case(self, rng):
        h = hl.random_herm(4, rng)
        assert np.allclose(hl.transfer(h, h), np.eye(4), atol=1e-12)

    @pytest.mark.parametrize("p", [1, 2, 5, math.inf])
    def test_pure_scaling(self, p):
        assert hl.dp_distance(hl.HermNorm.identity(2), hl.HermNorm(math.e**4 * np.eye(2)), p) == pytest.approx(2.0)

    def test_split_spectrum(self):
        h1 = hl.HermNorm.diag([math.e**4, math.e**-4])
        assert np.allclose(hl.log_spectrum(hl.HermNorm.identity(2), h1), [2.0, -2.0])
        for p in (1, 2, 7, math.inf):
            assert hl.dp_distance(hl.HermNorm.identity(2), h1, p) == pytest.approx(2.0)

    def test_diagonal_d1_dinf(self):
        h1 = hl.HermNorm.diag([math.e**2, math.e**6])
        assert hl.dp_distance(hl.HermNorm.identity(2), h1, 1) == pytest.approx(2.0)
        assert hl.dp_distance(hl.HermNorm.identity(2), h1, math.inf) == pytest.approx(3.0)

    def test_p_below_one_rejected(self):
        with pytest.raises(ValueError):
            hl.dp_distance(hl.HermNorm.identity(2), hl.HermNorm.identity(2), 0.5)

    @settings(max_examples=40, deadline=None)
    @given(herm_pairs(), st.sampled_from([1.0, 2.0, 5.0, math.inf]))
    def test_metric_axioms(self, case, p):
        n, seed = case
        rng = np.random.default_rng(seed)
        h0, h1, h2 = (hl.random_herm(n, rng, spread=2.0) for _ in range(3))
        d01 = hl.dp_distance(h0, h1, p)
        assert d01 == hl.dp_distance(h1, h0, p)
        assert hl.dp_distance(h0, h0, p) <= 1e-12
        assert d01 <= hl.dp_distance(h0, h2, p) + hl.dp_distance(h2, h1, p) + 1e-9

    @settings(max_examples=30, deadline=None)
    @given(herm_pairs(), st.floats(0, 1))
    def test_geodesic_speed(self, case, t):
        n, seed = case
        rng = np.random.default_rng(seed)
        h0, h1 = hl.random_herm(n, rng), hl.random_herm(n, rng)
        for p in (1.0, 2.0, math.inf):
            assert abs(hl.dp_distance(h0, hl.geodesic(h0, h1, t), p) - t * hl.dp_distance(h0, h1, p)) <= 1e-9

    def test_p_monotone_and_large_p(self, rng):
        h0, h1 = hl.random_herm(5, rng), hl.random_herm(5, rng)
        ds = [hl.dp_distance(h0, h1, p) for p in (1, 2, 4, 8, 16, 64)]
        assert np.all(np.diff(ds) >= -1e-12)
        dinf = hl.dp_distance(h0, h1, math.inf)
        assert abs(ds[-1] - dinf) <= 0.05 * dinf


class TestGeodesic:
    def test_endpoints(self, rng):
        h0, h1 = hl.random_herm(3, rng), hl.random_herm(3, rng)
        assert hl.geodesic(h0, h1, 0) is h0
        assert hl.geodesic(h0, h1, 1) is h1

    def test_diagonal_midpoint(self):
        g = hl.geodesic(hl.HermNorm.identity(2), hl.HermNorm.diag([math.e**2, math.e**4]), 0.5)
        assert np.allclose(g.gram, np.diag([math.e, math.e**2]))


class TestQuotientDual:
    def test_examples(self):
        assert np.allclose(hl.quotient_norm(hl.HermNorm.identity(2), [[1, 0]]).gram, [[1.0]])
        assert np.allclose(hl.quotient_norm(hl.HermNorm.diag([1, 4]), [[1, 1]]).gram, [[0.8]])
        h = hl.HermNorm.diag([2.0, 3.0])
        assert np.allclose(hl.quotient_norm(h, np.eye(2)).gram, h.gram)

    def test_quotient_matches_least_norm(self, rng):
        h = hl.random_herm(4, rng)
        a = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        q = hl.quotient_norm(h, a)
        target = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        # least-norm preimage: minimize g^* G g subject to A g = q
        ginv = np.linalg.inv(h.gram)
        pre = ginv @ a.conj().T @ np.linalg.solve(a @ ginv @ a.conj().T, target)
        assert np.allclose(a @ pre, target)
        assert q(target) == pytest.approx(h(pre), rel=1e-10)

    def test_dual(self, rng):
        assert np.allclose(hl.dual_norm(hl.HermNorm.diag([4, 1])).gram, np.diag([0.25, 1.0]))
        h = hl.random_herm(4, rng)
        assert np.allclose(hl.dual_norm(hl.dual_norm(h)).gram, h.gram, atol=1e-12)

    def test_dual_norm_is_operator_norm(self, rng):
        h = hl.random_herm(3, rng)
        xi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        # sup |xi v| / ||v|| attained at v = G^{-1} xi^*
        v = np.linalg.solve(h.gram, xi.conj())
        direct = abs(xi @ v) / h(v)
        assert hl.dual_norm(h)(xi) == pytest.approx(direct, rel=1e-12)


class TestSymTensor:
    def test_sym_identity(self):
        assert np.allclose(np.diag(hl.sym_power_norm(hl.HermNorm.identity(2), 2).gram).real, [1, 0.5, 1])
        assert np.allclose(np.diag(hl.sym_power_norm(hl.HermNorm.identity(2), 3).gram).real, [1, 1 / 3, 1 / 3, 1])

    def test_sym_one_is_identity_map(self, rng):
        h = hl.random_herm(3, rng)
        assert np.allclose(hl.sym_power_norm(h, 1).gram, h.gram)

    def test_multi_indices(self):
        assert hl.multi_indices(2, 2) == [(2, 0), (1, 1), (0, 2)]
        assert len(hl.multi_indices(3, 4)) == math.comb(6, 2)

    def test_tensor(self, rng):
        assert np.allclose(hl.tensor_norm(hl.HermNorm.diag([1, 2]), hl.HermNorm.diag([3, 5])).gram,
                           np.diag([3, 5, 6, 10]))
        h, h2, k = hl.random_herm(3, rng), hl.random_herm(3, rng), hl.random_herm(3, rng)
        d = hl.dp_distance(hl.tensor_norm(h, k), hl.tensor_norm(h2, k), 1)
        assert d == pytest.approx(hl.dp_distance(h, h2, 1), rel=1e-10)


class TestGramSchmidt:
    def test_diagonal_unchanged(self):
        h = hl.HermNorm.diag([2.0, 5.0])
        assert np.allclose(hl.gram_schmidt_project(h, np.eye(2)).gram, h.gram)

    def test_two_by_two(self):
        rho = 0.6
        h = hl.HermNorm(np.array([[1, rho], [rho, 1]]))
        assert np.allclose(hl.gram_schmidt_project(h, np.eye(2)).gram, np.diag([1, 1 - rho**2]))

    @settings(max_examples=25, deadline=None)
    @given(herm_pairs(5))
    def test_one_lipschitz(self, case):
        n, seed = case
        rng = np.random.default_rng(seed)
        h0, h1 = hl.random_herm(n, rng), hl.random_herm(n, rng)
        basis = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        for p in (1.0, 2.0, math.inf):
            lhs = hl.dp_distance(hl.gram_schmidt_project(h0, basis), hl.gram_schmidt_project(h1, basis), p)
            assert lhs <= hl.dp_distance(h0, h1, p) + 1e-10

    def test_order_preserving(self, rng):
        h0 = hl.random_herm(4, rng)
        h1 = hl.HermNorm(h0.gram + np.eye(4))
        basis = rng.standard_normal((4, 4))
        mu = hl.log_spectrum(hl.gram_schmidt_project(h0, basis), hl.gram_schmidt_project(h1, basis))
        assert mu.min() >= -1e-12


class TestGeneralNorms:
    def test_john_linf(self):
        linf = hl.PolyhedralNorm(np.eye(2), "sup")
        h = hl.john_ellipsoid(linf)
        assert np.allclose(h.gram, 0.5 * np.eye(2), atol=1e-6)

    def test_john_sandwich_sum_type(self, rng):
        gens = rng.standard_normal((7, 3)) + 1j * rng.standard_normal((7, 3))
        n = hl.PolyhedralNorm(gens, "sum")
        h = hl.john_ellipsoid(n)
        for _ in range(10):
            v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            ratio = n(v) / h(v)
            assert 1 - 1e-6 <= ratio <= math.sqrt(3) + 1e-6

    def test_relative_spectrum_l2_linf(self):
        rep = hl.log_relative_spectrum(hl.HermNorm.identity(2), hl.PolyhedralNorm(np.eye(2), "sup"))
        assert rep.exact
        assert np.allclose(rep.values, [0.0, -0.5 * math.log(2)], atol=1e-6)

    def test_relative_spectrum_self(self):
        n = hl.PolyhedralNorm(np.array([[1, 0], [1, 1], [0, 1]]), "sup")
        rep = hl.log_relative_spectrum(n, n)
        assert np.allclose(rep.values, 0, atol=1e-9)

    def test_dp_general_hermitian_point(self, rng):
        h0, h1 = hl.random_herm(3, rng), hl.random_herm(3, rng)
        iv = hl.dp_general(h0, h1, 2)
        assert iv.width == 0 and iv.lo == pytest.approx(hl.dp_distance(h0, h1, 2))

    def test_dp_general_bracket_contains_sampled_ratio(self, rng):
        gens = rng.standard_normal((6, 3))
        n = hl.PolyhedralNorm(gens, "sup")
        h = hl.random_herm(3, rng)
        iv = hl.dp_general(h, n, math.inf)
        # sampled log-ratios never exceed the certified upper end
        worst = max(abs(math.log(n(v) / h(v))) for v in rng.standard_normal((50, 3)))
        assert worst <= iv.hi + 1e-9

    def test_brute_force_refinement_agrees_with_eigensolver(self, rng):
        # for Hermitian inputs the search must reproduce the exact spectrum
        h0, h1 = hl.random_herm(2, rng), hl.random_herm(2, rng)
        vals = hl._brute_force_dim2(h0, h1)
        assert np.allclose(vals, hl.log_spectrum(h0, h1), atol=1e-7)

    def test_sum_type_complex_uses_socp(self):
        n = hl.PolyhedralNorm(np.array([[1, 0], [0, 1]], complex), "sum")
        assert n(np.array([1j, 1.0])) == pytest.approx(2.0, abs=1e-6)
