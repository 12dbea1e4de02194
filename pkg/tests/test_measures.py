import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import wasserstein_distance

from normrays import filtrations as fl
from normrays import hermlab as hl
from normrays import measures as ms
from normrays import secring as sr
from normrays import toricgeo as tg

atoms = st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=12)


def test_measure_validation():
    with pytest.raises(ValueError):
        ms.DiscreteMeasure([0.0, 1.0], [0.5])
    with pytest.raises(ValueError):
        ms.DiscreteMeasure([0.0, 1.0], [1.5, -0.5])
    with pytest.raises(ValueError):
        ms.DiscreteMeasure([0.0, 1.0], [0.5, 0.4])
    mu = ms.DiscreteMeasure([3.0, 1.0], [0.25, 0.75])
    assert np.array_equal(mu.atoms, [1.0, 3.0])
    assert np.array_equal(mu.masses, [0.75, 0.25])


def test_moments_and_json():
    mu = ms.DiscreteMeasure.uniform([-2.0, 1.0, 1.0])
    assert mu.mean() == pytest.approx(0.0)
    assert mu.moment(2.0) == pytest.approx(math.sqrt(2.0))
    assert mu.moment(math.inf) == 2.0
    assert mu.merged().atoms.size == 2
    back = ms.DiscreteMeasure.from_json(mu.to_json())
    assert np.array_equal(back.atoms, mu.atoms) and np.array_equal(back.masses, mu.masses)
    assert mu.cdf(np.array([-3.0, 1.0])) == pytest.approx([0.0, 1.0])
    assert ms.DiscreteMeasure.dirac(0.5).shifted(1.0).atoms[0] == 1.5


@settings(max_examples=50, deadline=None)
@given(atoms, atoms)
def test_w1_matches_scipy(a, b):
    mu, nu = ms.DiscreteMeasure.uniform(a), ms.DiscreteMeasure.uniform(b)
    assert ms.wasserstein1(mu, nu) == pytest.approx(wasserstein_distance(a, b), abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(atoms, st.floats(-3, 3))
def test_w1_shift_equivariance(a, s):
    mu = ms.DiscreteMeasure.uniform(a)
    assert ms.wasserstein1(mu, mu.shifted(s)) == pytest.approx(abs(s), abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1, 2, allow_nan=False), min_size=1, max_size=8))
def test_w1_uniform_closed_form(a):
    mu = ms.DiscreteMeasure.uniform(a)
    # fine empirical approximation of Lebesgue on [0, 1] as an independent route
    n = 200000
    ref = wasserstein_distance(a, (np.arange(n) + 0.5) / n)
    assert ms.wasserstein1_uniform(mu) == pytest.approx(ref, abs=1e-5)


def test_relative_measure_joint_basis(rng):
    f1 = fl.random_filtration(4, rng, integer=True)
    f2 = fl.random_filtration(4, rng, integer=True)
    mu = ms.relative_spectral_measure(f1, f2)
    for p in (1.0, 2.0, math.inf):
        assert mu.moment(p) == pytest.approx(fl.dp_filtrations(f1, f2, p), rel=1e-10)
    with pytest.raises(ValueError):
        ms.relative_spectral_measure(np.zeros(2), np.zeros(3))


@pytest.mark.parametrize("k", [1, 2, 7, 24, 100])
def test_linear_trivial_spectral_measure(k):
    lin, triv = sr.MonomialFiltration.linear(), sr.MonomialFiltration.trivial()
    mu = ms.graded_spectral_measure(lin, triv, k)
    assert np.allclose(mu.atoms, np.arange(k + 1) / k)
    assert ms.wasserstein1_uniform(mu) <= 2.0 / k
    for p in (1.0, 2.0, 3.0, 4.0):
        d = hl.p_mean(lin.weights(k) - triv.weights(k), p) / k
        assert mu.moment(p) == pytest.approx(d, rel=1e-14)


def test_weak_convergence_trace():
    lin, triv = sr.MonomialFiltration.linear(), sr.MonomialFiltration.trivial()
    ks = range(2, 41, 2)
    tr = ms.weak_convergence_trace(lambda k: ms.graded_spectral_measure(lin, triv, k), ks, "uniform")
    assert tr.cauchy
    assert np.all(np.diff(tr.to_reference) < 0)
    rows = list(tr.rows())
    assert rows[0]["k"] == 2 and "w1_reference" in rows[0]
    with pytest.raises(ValueError):
        ms.weak_convergence_trace(lambda k: ms.DiscreteMeasure.dirac(0.0), [1], "gauss")
    tr2 = ms.weak_convergence_trace(lambda k: ms.DiscreteMeasure.dirac(1.0 / k), [1, 2], ms.DiscreteMeasure.dirac(0.0))
    assert np.allclose(tr2.to_reference, [1.0, 0.5])


def test_endpoint_slopes_linear_trivial():
    lin, triv = sr.MonomialFiltration.linear(), sr.MonomialFiltration.trivial()
    out = ms.endpoint_slopes(lin, triv, 24, tg.linear_ray(), tg.trivial_ray(), 40.0)
    assert out.algebraic == (1.0, 0.0)
    assert out.gaps[0] <= 0.05 and out.gaps[1] <= 0.05


def test_toric_measure_matches_graded_limit():
    """Spectral measures of k*g(a/k) weights approach the law of g under dy."""
    g = lambda y: np.minimum(y, 0.5)
    f = sr.MonomialFiltration.from_profile(g)
    mu = ms.graded_spectral_measure(f, sr.MonomialFiltration.trivial(), 64)
    limit = ms.DiscreteMeasure.uniform(g((np.arange(20000) + 0.5) / 20000))
    assert ms.wasserstein1(mu, limit) <= 2.0 / 64
