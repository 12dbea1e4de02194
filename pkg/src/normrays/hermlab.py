"""Hermitian and polyhedral norms on finite-dimensional complex spaces.

A Hermitian norm is stored through its Gram matrix ``G`` in a fixed
reference basis, with ``<u, v> = v^* G u``.  Distances between two norms are
read off the relative spectrum: for Hermitian norms the logarithmic
relative spectrum is ``1/2 log`` of the eigenvalues of the transfer operator
``G0^{-1} G1`` (ratios of norms, not of squared norms).

Polyhedral norms (sup of moduli of finitely many functionals, or the gauge
of the circled hull of finitely many generators) are compared through their
John ellipsoids, which turns every spectral quantity into a certified
interval.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import linprog, minimize

logger = logging.getLogger(__name__)

EIG_FLOOR = 1e-14
HERM_TOL = 1e-12


# --------------------------------------------------------------------------
# Types
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HermNorm:
    """Hermitian norm given by a positive-definite Gram matrix.

    Parameters
    ----------
    gram : ndarray, shape (n, n)
        Hermitian positive-definite matrix.  The inner product is
        ``<u, v> = v^* gram u``.
    """

    gram: np.ndarray

    def __post_init__(self):
        g = np.array(self.gram, dtype=complex)
        if g.ndim == 0:
            g = g.reshape(1, 1)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"Gram matrix must be square, got shape {g.shape}")
        scale = max(np.linalg.norm(g), np.finfo(float).tiny)
        if np.linalg.norm(g - g.conj().T) > HERM_TOL * scale:
            raise ValueError("Gram matrix is not Hermitian")
        g = 0.5 * (g + g.conj().T)
        if not np.all(np.isfinite(g)):
            raise ValueError("Gram matrix has non-finite entries")
        evals = np.linalg.eigvalsh(g)
        if evals[0] <= EIG_FLOOR * max(evals[-1], 1.0) or evals[0] <= 0:
            raise ValueError(
                f"Gram matrix is not positive definite (min eigenvalue {evals[0]:.3e})"
            )
        g.setflags(write=False)
        object.__setattr__(self, "gram", g)

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    def __call__(self, v) -> float:
        v = np.asarray(v, dtype=complex)
        return float(np.sqrt(max(np.real(v.conj() @ self.gram @ v), 0.0)))

    def inner(self, u, v) -> complex:
        """Return ``<u, v> = v^* G u``."""
        return complex(np.asarray(v).conj() @ self.gram @ np.asarray(u))

    @classmethod
    def identity(cls, n: int) -> "HermNorm":
        return cls(np.eye(n))

    @classmethod
    def diag(cls, values) -> "HermNorm":
        """Norm diagonal in the reference basis with ``||e_i||^2 = values[i]``."""
        return cls(np.diag(np.asarray(values, dtype=float)))

    def scaled(self, c: float) -> "HermNorm":
        """Return the norm ``e^c ||.||`` (Gram multiplied by ``e^{2c}``)."""
        return HermNorm(self.gram * math.exp(2.0 * c))

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "gram": [[[float(z.real), float(z.imag)] for z in row] for row in self.gram],
        }

    @classmethod
    def from_json(cls, data: dict) -> "HermNorm":
        g = np.array([[complex(re, im) for re, im in row] for row in data["gram"]])
        if g.shape != (data["dim"], data["dim"]):
            raise ValueError("dim does not match gram shape")
        return cls(g)


@dataclass(frozen=True, eq=False)
class PolyhedralNorm:
    """Norm given by finitely many functionals or generators.

    Parameters
    ----------
    vectors : ndarray, shape (m, n)
        For ``kind="sup"`` the rows are covectors ``l_i`` and
        ``||v|| = max_i |l_i(v)|``.  For ``kind="sum"`` the rows are
        generators ``u_j`` and ``||v|| = min sum |c_j|`` over
        ``v = sum c_j u_j``.
    kind : {"sup", "sum"}
    """

    vectors: np.ndarray
    kind: str = "sup"

    def __post_init__(self):
        vecs = np.atleast_2d(np.array(self.vectors, dtype=complex))
        if self.kind not in ("sup", "sum"):
            raise ValueError(f"unknown polyhedral kind {self.kind!r}")
        if np.linalg.matrix_rank(vecs) < vecs.shape[1]:
            what = "functionals do not span the dual" if self.kind == "sup" else "generators do not span V"
            raise ValueError(f"degenerate polyhedral norm: {what}")
        vecs.setflags(write=False)
        object.__setattr__(self, "vectors", vecs)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def is_real(self) -> bool:
        return bool(np.all(np.abs(self.vectors.imag) == 0))

    def __call__(self, v) -> float:
        v = np.asarray(v, dtype=complex)
        if self.kind == "sup":
            return float(np.max(np.abs(self.vectors @ v)))
        return _sum_type_norm(self.vectors, v)

    def dual(self) -> "PolyhedralNorm":
        """Dual norm on ``V*`` (sup-type and sum-type are exchanged).

        Vectors of ``V*`` are paired with ``V`` by ``xi(v) = xi @ v``, so
        the dual of ``max |l_i @ v|`` is the gauge generated by the ``l_i``.
        """
        return PolyhedralNorm(self.vectors, "sum" if self.kind == "sup" else "sup")


def _sum_type_norm(gens: np.ndarray, v: np.ndarray) -> float:
    """Gauge of the circled hull of the rows of ``gens`` at ``v``."""
    m, n = gens.shape
    if np.all(gens.imag == 0) and np.all(v.imag == 0):
        a = gens.real.T
        res = linprog(
            np.ones(2 * m),
            A_eq=np.hstack([a, -a]),
            b_eq=v.real,
            bounds=[(0, None)] * (2 * m),
            method="highs",
        )
        if res.status != 0:
            raise RuntimeError(f"sum-type norm LP failed: {res.message}")
        return float(res.fun)
    import cvxpy as cp

    c = cp.Variable(m, complex=True)
    prob = cp.Problem(cp.Minimize(cp.sum(cp.abs(c))), [gens.T @ c == v])
    prob.solve(solver="CLARABEL")
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"sum-type norm SOCP failed: {prob.status}")
    return float(prob.value)


@dataclass(frozen=True)
class SpectrumReport:
    """Logarithmic relative spectrum, possibly interval-valued.

    Attributes
    ----------
    values : ndarray
        Point estimates sorted non-increasingly (exact when ``exact``).
    lower, upper : ndarray
        Certified bounds for each ``mu_j``; equal to ``values`` when exact.
    normalization : int
        Dimension used in p-means.
    exact : bool
    """

    values: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    normalization: int
    exact: bool = True
    method: str = "hermitian"


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi + 1e-12:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol


# --------------------------------------------------------------------------
# Matrix functions
# --------------------------------------------------------------------------


def _herm_eig(a: np.ndarray):
    a = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(a)
    if w[0] < -EIG_FLOOR * max(abs(w[-1]), 1.0):
        raise ValueError(f"matrix is not positive semidefinite (eigenvalue {w[0]:.3e})")
    return np.maximum(w, EIG_FLOOR), v


def herm_func(a: np.ndarray, fn) -> np.ndarray:
    """Apply a scalar function to a positive Hermitian matrix."""
    w, v = _herm_eig(a)
    return (v * fn(w)) @ v.conj().T


def herm_sqrt(a):
    return herm_func(a, np.sqrt)


def herm_invsqrt(a):
    return herm_func(a, lambda w: 1.0 / np.sqrt(w))


def herm_power(a, t: float):
    return herm_func(a, lambda w: w**t)


def _check_pair(h0, h1):
    if h0.dim != h1.dim:
        raise ValueError(f"dimension mismatch: {h0.dim} vs {h1.dim}")


# --------------------------------------------------------------------------
# Hermitian operations
# --------------------------------------------------------------------------


def transfer(h0: HermNorm, h1: HermNorm) -> np.ndarray:
    """Transfer operator ``T`` with ``<u, v>_1 = <T u, v>_0``.

    Returns
    -------
    ndarray
        ``G0^{-1} G1``; it is ``G0``-self-adjoint with positive spectrum.
    """
    _check_pair(h0, h1)
    return np.linalg.solve(h0.gram, h1.gram)


def log_spectrum(h0: HermNorm, h1: HermNorm) -> np.ndarray:
    """Return ``1/2 log`` of the transfer eigenvalues, sorted non-increasingly."""
    _check_pair(h0, h1)
    w = scipy.linalg.eigh(h1.gram, h0.gram, eigvals_only=True)
    if np.any(w <= 0):
        raise ValueError("transfer operator has non-positive eigenvalues")
    mu = 0.5 * np.log(w)
    order = np.argsort(-mu, kind="stable")
    return mu[order]


def p_mean(values, p: float, normalization: int | None = None) -> float:
    """``(sum |x_i|^p / N)^{1/p}``, with ``p = inf`` giving ``max |x_i|``."""
    x = np.abs(np.asarray(values, dtype=float))
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if x.size == 0:
        return 0.0
    n = x.size if normalization is None else normalization
    if np.isinf(p):
        return float(x.max())
    m = x.max()
    if m == 0:
        return 0.0
    # scale out the maximum to keep large p stable
    return float(m * (np.sum((x / m) ** p) / n) ** (1.0 / p))


def dp_distance(h0: HermNorm, h1: HermNorm, p: float = 2.0) -> float:
    """``d_p`` distance between Hermitian norms.

    ``d_p = (sum_j |mu_j|^p / n)^{1/p}`` with ``mu`` the logarithmic relative
    spectrum; ``p = inf`` gives ``max_j |mu_j|``.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    # the spectrum of (h1, h0) is minus that of (h0, h1); fixing the order
    # makes d_p(h0, h1) == d_p(h1, h0) bit for bit
    if h1.gram.tobytes() < h0.gram.tobytes():
        h0, h1 = h1, h0
    return p_mean(log_spectrum(h0, h1), p)


def geodesic(h0: HermNorm, h1: HermNorm, t: float) -> HermNorm:
    """Point ``H_t`` of the distinguished geodesic from ``h0`` to ``h1``.

    ``G_t = G0^{1/2} (G0^{-1/2} G1 G0^{-1/2})^t G0^{1/2}``.  Values of ``t``
    outside ``[0, 1]`` extend the geodesic to a line and are logged.
    """
    _check_pair(h0, h1)
    if t == 0:
        return h0
    if t == 1:
        return h1
    if not 0 <= t <= 1:
        logger.info("geodesic evaluated at t=%g outside [0, 1] (extrapolated)", t)
    s = herm_sqrt(h0.gram)
    si = herm_invsqrt(h0.gram)
    mid = herm_power(si @ h1.gram @ si, t)
    return HermNorm(s @ mid @ s)


def quotient_norm(h: HermNorm, a) -> HermNorm:
    """Quotient norm on ``Q`` for a surjection ``A: V -> Q``.

    ``||q|| = inf{||g|| : A g = q}``; the Gram matrix is ``(A G^{-1} A^*)^{-1}``.
    """
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    if a.shape[1] != h.dim:
        raise ValueError("surjection has wrong number of columns")
    if np.linalg.matrix_rank(a) < a.shape[0]:
        raise ValueError("map is not surjective (rank-deficient)")
    inner = a @ np.linalg.solve(h.gram, a.conj().T)
    return HermNorm(np.linalg.inv(0.5 * (inner + inner.conj().T)))


def dual_norm(h: HermNorm) -> HermNorm:
    """Dual norm on ``V*`` in the dual basis; the Gram is ``G^{-1}``.

    With covectors written as rows ``xi``, ``||xi||_* = sqrt(xi G^{-1} xi^*)``,
    i.e. the Gram of the dual in the convention ``v^* G u`` is ``conj(G^{-1})``.
    For real Gram matrices the two agree.
    """
    return HermNorm(np.linalg.inv(h.gram).conj())


def multi_indices(n: int, l: int) -> list[tuple[int, ...]]:
    """Exponent vectors ``alpha`` with ``|alpha| = l`` in ``n`` variables.

    Ordered lexicographically decreasing, so ``e_1^l`` comes first.
    """
    out = []
    for combo in itertools.combinations_with_replacement(range(n), l):
        alpha = [0] * n
        for i in combo:
            alpha[i] += 1
        out.append(tuple(alpha))
    out.sort(reverse=True)
    return out


def _poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for a, ca in p.items():
        for b, cb in q.items():
            key = tuple(x + y for x, y in zip(a, b))
            out[key] = out.get(key, 0) + ca * cb
    return out


def sym_power_matrix(a, l: int) -> np.ndarray:
    """Matrix of ``Sym^l A`` in monomial bases.

    Column ``alpha`` holds the coefficients of ``prod_i (A e_i)^{alpha_i}``
    in the monomials of the target, both ordered by :func:`multi_indices`.
    """
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    m, n = a.shape
    src = multi_indices(n, l)
    dst = multi_indices(m, l)
    pos = {alpha: i for i, alpha in enumerate(dst)}
    cols = []
    for i in range(n):
        cols.append({tuple(int(j == r) for j in range(m)): a[r, i] for r in range(m) if a[r, i] != 0})
    out = np.zeros((len(dst), len(src)), dtype=complex)
    for c, alpha in enumerate(src):
        poly = {tuple([0] * m): 1.0 + 0j}
        for i, ai in enumerate(alpha):
            for _ in range(ai):
                poly = _poly_mul(poly, cols[i])
        for key, val in poly.items():
            out[pos[key], c] += val
    return out


def sym_power_norm(h: HermNorm, l: int) -> HermNorm:
    """Induced norm on ``Sym^l V``.

    In the monomials of an ``H``-orthonormal basis ``||e^alpha||^2 =
    alpha!/l!``; the Gram is returned in the monomials of the reference
    basis.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    if l == 1:
        return h
    # G = R^* R with R upper triangular: R maps reference coordinates to an
    # orthonormal frame.
    r = scipy.linalg.cholesky(h.gram, lower=False)
    s = sym_power_matrix(r, l)
    d = np.array(
        [math.prod(math.factorial(x) for x in alpha) / math.factorial(l) for alpha in multi_indices(h.dim, l)]
    )
    return HermNorm(s.conj().T @ (d[:, None] * s))


def tensor_norm(h: HermNorm, k: HermNorm) -> HermNorm:
    """Tensor product norm on ``V (x) W`` (Kronecker product of Grams)."""
    return HermNorm(np.kron(h.gram, k.gram))


def gram_schmidt_project(h: HermNorm, basis) -> HermNorm:
    """Diagonal norm from the Gram–Schmidt procedure in an ordered basis.

    The result is diagonal in ``basis`` and ``||e_i||`` equals the distance
    from ``e_i`` to ``span(e_1, ..., e_{i-1})`` for ``h``.
    """
    b = np.atleast_2d(np.asarray(basis, dtype=complex))
    if b.shape != (h.dim, h.dim) or np.linalg.matrix_rank(b) < h.dim:
        raise ValueError("degenerate basis")
    m = b.conj().T @ h.gram @ b
    chol = np.linalg.cholesky(0.5 * (m + m.conj().T))
    d2 = np.real(np.diag(chol)) ** 2
    binv = np.linalg.inv(b)
    return HermNorm(binv.conj().T @ (d2[:, None] * binv))


def vee_norm(h0: HermNorm, h1: HermNorm) -> HermNorm:
    """Maximum of two Hermitian norms in their common diagonal basis.

    With ``e`` orthonormal for ``h0`` and diagonalizing ``h1`` (eigenvalues
    ``lambda_i``), the result is diagonal with ``||e_i||^2 = max(1, lambda_i)``.
    """
    _check_pair(h0, h1)
    lam, e = scipy.linalg.eigh(h1.gram, h0.gram)
    einv = np.linalg.inv(e)
    return HermNorm(einv.conj().T @ (np.maximum(lam, 1.0)[:, None] * einv))


def random_herm(n: int, rng: np.random.Generator, spread: float = 1.0, complex_: bool = True) -> HermNorm:
    """Random Hermitian norm with log-spectrum of size about ``spread``."""
    z = rng.standard_normal((n, n))
    if complex_:
        z = z + 1j * rng.standard_normal((n, n))
    q, _ = np.linalg.qr(z)
    w = np.exp(spread * rng.uniform(-1, 1, n))
    return HermNorm((q * w) @ q.conj().T)


# --------------------------------------------------------------------------
# John ellipsoids and general norms
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class JohnResult:
    norm: HermNorm
    iterations: int
    residual: float
    converged: bool


def _min_volume_circled(points: np.ndarray, tol: float = 1e-8, max_iter: int = 200000):
    """Minimum-volume circled Hermitian ellipsoid around the rows of ``points``.

    D-optimal design iteration with away steps (Khachiyan, Todd–Yildirim).
    With ``X = sum_i u_i a_i a_i^*`` and ``g_i = a_i^* X^{-1} a_i`` the
    iteration stops once ``max g_i <= n (1 + tol)`` and every supported
    ``g_i >= n (1 - tol)``.
    """
    m, n = points.shape
    u = np.full(m, 1.0 / m)
    it = 0
    resid = np.inf
    for it in range(1, max_iter + 1):
        x = (points.T * u) @ points.conj()
        g = np.real(np.einsum("ij,jk,ik->i", points.conj(), np.linalg.inv(x), points))
        j = int(np.argmax(g))
        jm = int(np.argmin(np.where(u > 0, g, np.inf)))
        up, down = g[j] / n - 1.0, 1.0 - g[jm] / n
        resid = max(up, down)
        if resid <= tol:
            break
        if up >= down:
            step = (g[j] - n) / (n * (g[j] - 1.0))
            u *= 1.0 - step
            u[j] += step
        else:
            step = u[jm] / (1.0 - u[jm])
            if g[jm] > 1.0:
                step = min(step, (n - g[jm]) / (n * (g[jm] - 1.0)))
            u *= 1.0 + step
            u[jm] -= step
            u = np.maximum(u, 0.0)
            u /= u.sum()
    x = (points.T * u) @ points.conj()
    return x, it, resid


def john_ellipsoid(n_poly: PolyhedralNorm, tol: float = 1e-8, return_info: bool = False):
    """Hermitian norm ``H`` with ``H <= N <= sqrt(n) H``.

    For a sum-type norm the minimum-volume ellipsoid ``E`` around the
    generators contains the unit ball and ``E / sqrt(n)`` lies inside it, so
    the gauge of ``E`` is the required ``H``.  For a sup-type norm the same
    construction is applied to the functionals in ``V*`` and dualized.
    """
    n = n_poly.dim
    pts = n_poly.vectors
    x, it, resid = _min_volume_circled(pts, tol=tol)
    converged = resid <= tol
    if not converged:
        logger.warning("John iteration stopped with residual %.3e", resid)
    # E = {a : a^* M a <= 1}; rescale so that every point is exactly inside.
    m_mat = np.linalg.inv(n * x)
    m_mat = 0.5 * (m_mat + m_mat.conj().T)
    gvals = np.real(np.einsum("ij,jk,ik->i", pts.conj(), m_mat, pts))
    m_mat = m_mat / gvals.max()
    if n_poly.kind == "sum":
        h = HermNorm(m_mat)
    else:
        # sup_{a in E} |a^T v| = sqrt(v^* conj(M^{-1}) v)
        h = HermNorm(np.linalg.inv(m_mat).conj() / n)
    res = JohnResult(h, it, resid, converged)
    return res if return_info else h


def norm_value(n, v) -> float:
    return float(n(v))


def _is_herm(n) -> bool:
    return isinstance(n, HermNorm)


def _brute_force_dim2(n0, n1, grid: int = 181, refine: bool = True) -> np.ndarray:
    """Exact ``(mu_1, mu_2)`` in dimension 2: extrema of ``log N1/N0`` over ``CP^1``."""

    def ratio(par):
        th, ps = par
        v = np.array([math.cos(th), math.sin(th) * np.exp(1j * ps)])
        return math.log(n1(v) / n0(v))

    ths = np.linspace(0, np.pi / 2, grid)
    pss = np.linspace(0, 2 * np.pi, 2 * grid, endpoint=False)
    vals = np.array([[ratio((a, b)) for b in pss] for a in ths])
    imax = np.unravel_index(np.argmax(vals), vals.shape)
    imin = np.unravel_index(np.argmin(vals), vals.shape)
    hi, lo = vals[imax], vals[imin]
    if refine:
        r = minimize(lambda z: -ratio(z), x0=[ths[imax[0]], pss[imax[1]]], method="Nelder-Mead",
                     options={"xatol": 1e-12, "fatol": 1e-14})
        hi = max(hi, -r.fun)
        r = minimize(ratio, x0=[ths[imin[0]], pss[imin[1]]], method="Nelder-Mead",
                     options={"xatol": 1e-12, "fatol": 1e-14})
        lo = min(lo, r.fun)
    return np.array([hi, lo])


def log_relative_spectrum(n0, n1, exact_dim2: bool = True) -> SpectrumReport:
    """Logarithmic relative spectrum ``mu_j = sup_W inf_{w in W} log N1(w)/N0(w)``.

    Hermitian pairs are exact.  Otherwise each polyhedral side is replaced
    by its John ellipsoid, giving an interval of half-width ``1/2 log n``
    per polyhedral side.  In dimension 2 with sup-type/Hermitian inputs the
    extrema are also located by search over ``CP^1`` (``method="search"``).
    """
    if n0.dim != n1.dim:
        raise ValueError("dimension mismatch")
    n = n0.dim
    if _is_herm(n0) and _is_herm(n1):
        mu = log_spectrum(n0, n1)
        return SpectrumReport(mu, mu.copy(), mu.copy(), n, True, "hermitian")
    h0 = n0 if _is_herm(n0) else john_ellipsoid(n0)
    h1 = n1 if _is_herm(n1) else john_ellipsoid(n1)
    mu = log_spectrum(h0, h1)
    s0 = 0.0 if _is_herm(n0) else 0.5 * math.log(n)
    s1 = 0.0 if _is_herm(n1) else 0.5 * math.log(n)
    lower, upper = mu - s0, mu + s1
    simple = all(_is_herm(x) or x.kind == "sup" for x in (n0, n1))
    if n == 2 and exact_dim2 and simple:
        vals = _brute_force_dim2(n0, n1)
        return SpectrumReport(vals, vals.copy(), vals.copy(), n, True, "search")
    return SpectrumReport(0.5 * (lower + upper), lower, upper, n, False, "john")


def dp_general(n0, n1, p: float = 2.0) -> Interval:
    """Interval containing ``d_p(N0, N1)`` for Hermitian or polyhedral norms."""
    rep = log_relative_spectrum(n0, n1)
    if rep.exact:
        d = p_mean(rep.values, p)
        return Interval(d, d)
    lo_abs = np.where(rep.lower > 0, rep.lower, np.where(rep.upper < 0, -rep.upper, 0.0))
    hi_abs = np.maximum(np.abs(rep.lower), np.abs(rep.upper))
    return Interval(p_mean(lo_abs, p, rep.normalization), p_mean(hi_abs, p, rep.normalization))
