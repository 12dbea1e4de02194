"""Geodesic rays of norms attached to filtrations.

Given a Hermitian norm ``H`` and a filtration ``F`` with jumping numbers
``e(i)``, pick an ``H``-orthonormal basis ``s_i`` adapted to ``F``.  The ray
``H_t^F`` is the Hermitian norm for which ``exp(t e(i)) s_i`` is
orthonormal, so ``||s_i||_t = exp(-t e(i))``.

Distances between two rays from the same base are computed from the
singular values of ``M_ij = exp(t e0_i) U_ij exp(-t e1_j)``, where ``U`` is
the unitary change between the two adapted bases.  For large ``t`` the
entries span many orders of magnitude, so those singular values are
computed in extended precision.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .filtrations import Filtration, dp_filtrations, weight
from .hermlab import (
    HermNorm,
    dp_general,
    log_spectrum,
    p_mean,
    quotient_norm,
    sym_power_norm,
    tensor_norm,
)
from .filtrations import sym_filtration, tensor_filtration

logger = logging.getLogger(__name__)


class PreconditionError(ValueError):
    """Inputs do not satisfy the hypotheses of a check."""


# --------------------------------------------------------------------------
# Hermitian rays
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HermRay:
    """Ray ``t -> H_t^F`` emanating from ``base``.

    Attributes
    ----------
    base : HermNorm
    filt : Filtration
    adapted : ndarray
        Columns ``s_i``: ``base``-orthonormal, with ``span(s_1..s_j)`` equal
        to the span of the first ``j`` canonical vectors of ``filt``.
    """

    base: HermNorm
    filt: Filtration
    adapted: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.base.dim != self.filt.dim:
            raise ValueError("dimension mismatch between base norm and filtration")
        v = self.filt.vectors
        m = v.conj().T @ self.base.gram @ v
        low = np.linalg.cholesky(0.5 * (m + m.conj().T))
        s = scipy.linalg.solve_triangular(low, v.conj().T, lower=True).conj().T
        s.setflags(write=False)
        object.__setattr__(self, "adapted", s)

    @property
    def jumps(self) -> np.ndarray:
        return self.filt.weights

    def at(self, t: float) -> HermNorm:
        """Hermitian norm ``H_t^F``."""
        return herm_ray_at(self, t)


def herm_ray_at(ray: HermRay, t: float) -> HermNorm:
    """Gram of ``H_t``: ``diag(exp(-2 t e(i)))`` in the adapted basis."""
    if t < 0:
        raise ValueError("rays are defined for t >= 0")
    if t == 0:
        return ray.base
    sinv = np.linalg.inv(ray.adapted)
    d = np.exp(-2.0 * t * ray.jumps)
    return HermNorm(sinv.conj().T @ (d[:, None] * sinv))


def _block_log_singular(u: np.ndarray, a: np.ndarray, b: np.ndarray, tol: float = 1e-12):
    """Exact log singular values of ``diag(e^a) U diag(e^-b)`` for block-structured ``U``.

    Applies when the sparsity pattern of the unitary ``U`` splits into
    blocks on which ``a`` and ``b`` are constant.  Returns ``None`` otherwise.
    """
    n = u.shape[0]
    mask = np.abs(u) > tol
    seen = np.zeros(n, bool)
    out = []
    for start in range(n):
        if seen[start]:
            continue
        rows, cols = {start}, set()
        frontier = [("r", start)]
        while frontier:
            kind, idx = frontier.pop()
            nbrs = np.nonzero(mask[idx] if kind == "r" else mask[:, idx])[0]
            for j in nbrs:
                target = cols if kind == "r" else rows
                if j not in target:
                    target.add(int(j))
                    frontier.append(("c" if kind == "r" else "r", int(j)))
        rows_l, cols_l = sorted(rows), sorted(cols)
        seen[rows_l] = True
        if len(rows_l) != len(cols_l):
            return None
        if np.ptp(a[rows_l]) > 1e-12 or np.ptp(b[cols_l]) > 1e-12:
            return None
        out.extend([a[rows_l[0]] - b[cols_l[0]]] * len(rows_l))
    return np.sort(np.array(out))[::-1]


def scaled_log_singular_values(u: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Log singular values of ``diag(e^a) U diag(e^-b)``, sorted decreasingly.

    Uses double precision when the exponent spread is mild and mpmath with
    enough digits otherwise.
    """
    fast = _block_log_singular(u, a, b)
    if fast is not None:
        return fast
    spread = float(np.ptp(a) + np.ptp(b))
    if spread < 8.0:
        m = np.exp(a)[:, None] * u * np.exp(-b)[None, :]
        s = np.linalg.svd(m, compute_uv=False)
        return np.log(s)
    import mpmath

    digits = int(30 + 2 * spread / math.log(10))
    with mpmath.workdps(digits):
        n = u.shape[0]
        m = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(n):
                m[i, j] = mpmath.mpc(u[i, j].real, u[i, j].imag) * mpmath.exp(
                    mpmath.mpf(float(a[i])) - mpmath.mpf(float(b[j]))
                )
        s = mpmath.svd_c(m, compute_uv=False)
        vals = np.array([float(mpmath.log(s[i])) for i in range(n)])
    return np.sort(vals)[::-1]


def ray_log_spectrum(r0: HermRay, r1: HermRay, t: float) -> np.ndarray:
    """Logarithmic relative spectrum between ``H_t^{F0}`` and ``H_t^{F1}``."""
    if not np.allclose(r0.base.gram, r1.base.gram, rtol=1e-12, atol=1e-14):
        raise ValueError("rays must share their base norm")
    # U = S0^{-1} S1 = S0^* G S1 is unitary
    u = r0.adapted.conj().T @ r0.base.gram @ r1.adapted
    # log sigma of D0^{-1/2} U D1^{1/2} with D = diag(exp(-2 t e))
    return scaled_log_singular_values(u, t * r0.jumps, t * r1.jumps)


def chordal_slope(r0: HermRay, r1: HermRay, p: float, t: float) -> float:
    """``d_p(H_t^{F0}, H_t^{F1}) / t``."""
    if t <= 0:
        raise ValueError("slope undefined at t <= 0")
    return p_mean(ray_log_spectrum(r0, r1, t), p) / t


@dataclass(frozen=True)
class SlopeTrace:
    """Chordal slopes on a time grid.

    Attributes
    ----------
    ts, slopes : ndarray
    limit : float
        ``d_p(F0, F1)`` computed from a joint basis.
    monotone_violation : float
        Largest decrease ``slope(s) - slope(t)`` over ``s < t`` (<= 0 if monotone).
    upper_violation : float
        Largest ``d_p(H_t^{F0}, H_t^{F1}) - t d_p(F0, F1)``.
    """

    ts: np.ndarray
    slopes: np.ndarray
    limit: float
    monotone_violation: float
    upper_violation: float

    def rows(self):
        for t, s in zip(self.ts, self.slopes):
            yield {"t": float(t), "slope": float(s), "limit": self.limit}


def chordal_trace(r0: HermRay, r1: HermRay, p: float, ts) -> SlopeTrace:
    ts = np.asarray(ts, dtype=float)
    slopes = np.array([chordal_slope(r0, r1, p, t) for t in ts])
    limit = dp_filtrations(r0.filt, r1.filt, p)
    running_max = np.maximum.accumulate(slopes)
    mono = float(np.max(running_max - slopes)) if slopes.size else 0.0
    upper = float(np.max(ts * slopes - ts * limit)) if slopes.size else 0.0
    return SlopeTrace(ts, slopes, limit, mono, upper)


# --------------------------------------------------------------------------
# Envelope rays
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EnvelopeRay:
    """Ray ``N_t^F(f) = inf sum ||f_i|| chi(f_i)^t`` over decompositions of ``f``."""

    base: object
    filt: Filtration
    tol: float = 1e-7
    max_iter: int = 200


@dataclass(frozen=True)
class EnvelopeValue:
    """Certified bracket ``lower <= N_t(f) <= upper``."""

    value: float
    lower: float
    upper: float
    pieces: tuple = ()

    @property
    def gap(self) -> float:
        return self.upper - self.lower


def _base_cvx_norm(base, vec_expr):
    import cvxpy as cp

    if isinstance(base, HermNorm):
        r = scipy.linalg.cholesky(base.gram, lower=False)
        return cp.norm(r @ vec_expr, 2), []
    if base.kind == "sup":
        return cp.max(cp.abs(base.vectors @ vec_expr)), []
    d = cp.Variable(base.vectors.shape[0], complex=True)
    return cp.sum(cp.abs(d)), [base.vectors.T @ d == vec_expr]


def _restricted_dual_norm(base, b: np.ndarray, y: np.ndarray) -> float:
    """``sup{Re(y^* g) / N(g) : g in span(b)}`` for an orthonormal basis ``b``."""
    if b.shape[1] == 0:
        return 0.0
    if isinstance(base, HermNorm):
        m = b.conj().T @ base.gram @ b
        z = b.conj().T @ y
        return float(np.sqrt(max(np.real(z.conj() @ np.linalg.solve(m, z)), 0.0)))
    import cvxpy as cp

    c = cp.Variable(b.shape[1], complex=True)
    nrm, cons = _base_cvx_norm(base, b @ c)
    prob = cp.Problem(cp.Maximize(cp.real(np.conj(y) @ (b @ c))), [nrm <= 1] + cons)
    prob.solve(solver="CLARABEL")
    return float(prob.value)


def envelope_ray_at(ray: EnvelopeRay, f, t: float) -> EnvelopeValue:
    """Value of the envelope ray at ``f`` with a primal/dual bracket.

    Merging all summands of a decomposition that lie in the same jumping
    level never increases the cost (triangle inequality, and ``chi`` is
    constant on ``F^lam \\ F^{>lam}``), so it suffices to optimize over
    ``f = sum_j g_j`` with one ``g_j in F^{lam_j}`` per jump ``lam_j`` and
    cost ``sum_j exp(-t lam_j) N(g_j)``.  That problem is a second-order
    cone program (a linear program for real polyhedral data).  The upper
    bound is the exact cost of a feasible decomposition and the lower bound
    comes from a dual functional ``y``:
    ``N_t(f) >= Re(y^* f) / max_j (nu_j(y) / exp(-t lam_j))`` with ``nu_j``
    the dual norm of ``y`` restricted to ``F^{lam_j}``.
    """
    import cvxpy as cp

    if t < 0:
        raise ValueError("t must be >= 0")
    base, filt = ray.base, ray.filt
    f = np.asarray(f, dtype=complex)
    nf = float(base(f))
    if nf == 0.0:
        return EnvelopeValue(0.0, 0.0, 0.0)
    if t == 0:
        return EnvelopeValue(nf, nf, nf)
    lams = filt.jumps
    bases = [filt.subspace(lam) for lam in lams]
    logw = -t * lams
    wts = np.exp(logw - logw.max())  # scaled weights, true = wts * exp(max)
    scale = math.exp(float(logw.max()))

    cs = [cp.Variable(b.shape[1], complex=True) for b in bases]
    terms, cons = [], []
    for w, b, c in zip(wts, bases, cs):
        nrm, extra = _base_cvx_norm(base, b @ c)
        terms.append(w * nrm)
        cons += extra
    fs = f / nf
    eq = sum(b @ c for b, c in zip(bases, cs)) == fs
    prob = cp.Problem(cp.Minimize(sum(terms)), [eq] + cons)
    try:
        prob.solve(solver="CLARABEL", tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12,
                   max_iter=ray.max_iter)
    except Exception as exc:  # solver stall: fall back to trivial bracket
        logger.warning("envelope solver failed (%s); returning trivial bracket", exc)
    # primal: repair feasibility on the largest level (the whole space)
    pieces = []
    if cs[0].value is not None:
        coeffs = [np.asarray(c.value, dtype=complex) for c in cs]
    else:
        coeffs = [np.zeros(b.shape[1], complex) for b in bases]
    resid = fs - sum(b @ c for b, c in zip(bases, coeffs))
    coeffs[-1] = coeffs[-1] + bases[-1].conj().T @ resid
    pieces = [b @ c for b, c in zip(bases, coeffs)]
    upper = float(sum(w * base(g) for w, g in zip(wts, pieces)))
    # dual candidates
    lower = 0.0
    y0 = eq.dual_value
    cands = []
    if y0 is not None:
        y0 = np.asarray(y0, dtype=complex).ravel()
        cands = [y0, -y0, np.conj(y0), -np.conj(y0)]
    for y in cands:
        val = float(np.real(np.conj(y) @ fs))
        if val <= 0:
            continue
        ratio = max(_restricted_dual_norm(base, b, y) / w for b, w in zip(bases, wts))
        if ratio > 0:
            lower = max(lower, val / ratio)
    lower = min(lower, upper)
    k = scale * nf
    return EnvelopeValue(upper * k, lower * k, upper * k, tuple(g * nf for g in pieces))


def envelope_vs_hermitian(n_base, h_base: HermNorm, filt: Filtration, t: float, samples) -> dict:
    """Sampled comparison of the envelope ray of ``n_base`` with ``H_t^F``.

    Returns the largest certified ``|log N_t(f) / H_t(f)|`` over the
    samples and the bound ``d_inf(N, H) + log n``.
    """
    ray_n = EnvelopeRay(n_base, filt)
    h_t = HermRay(h_base, filt).at(t)
    worst = 0.0
    for f in samples:
        val = envelope_ray_at(ray_n, f, t)
        hv = h_t(f)
        worst = max(worst, abs(math.log(val.upper / hv)), abs(math.log(max(val.lower, 1e-300) / hv)))
    dinf = dp_general(n_base, h_base, math.inf).hi
    return {"observed": worst, "bound": dinf + math.log(filt.dim)}


# --------------------------------------------------------------------------
# Interpolation for quotients
# --------------------------------------------------------------------------


def quotient_filtration(filt: Filtration, a) -> Filtration:
    """Filtration on ``Q`` with ``[F]^lam = A(F^lam)``."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    return Filtration.from_generators(a @ filt.vectors, filt.weights)


def _order_margin(small: HermNorm, big: HermNorm) -> float:
    """``min_j mu_j(small, big)``; nonnegative iff ``small <= big``."""
    return float(log_spectrum(small, big).min())


@dataclass(frozen=True)
class InterpolationReport:
    ts: np.ndarray
    margins: np.ndarray

    @property
    def min_margin(self) -> float:
        return float(self.margins.min())


def interpolation_check(h0: HermNorm, f: Filtration, h1: HermNorm, g: Filtration, a, ts,
                        tol: float = 1e-10) -> InterpolationReport:
    """Check ``[H_t^F] >= H_t^G`` on the quotient ``A: V -> Q``.

    Hypotheses: ``[H0] >= H1`` and ``A(F^lam) ⊂ G^lam`` for all ``lam``.
    The margin at each ``t`` is the smallest logarithmic relative
    eigenvalue of ``[H_t^F]`` against ``H_t^G`` (nonnegative when the
    conclusion holds).
    """
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    q0 = quotient_norm(h0, a)
    if _order_margin(h1, q0) < -tol:
        raise PreconditionError("[H0] >= H1 fails")
    for lam in f.jumps:
        img = a @ f.subspace(lam)
        for col in img.T:
            if np.linalg.norm(col) > 1e-12 and weight(g, col) < lam - 1e-9:
                raise PreconditionError(f"A(F^{lam}) is not contained in G^{lam}")
    rf, rg = HermRay(h0, f), HermRay(h1, g)
    margins = []
    for t in ts:
        margins.append(_order_margin(rg.at(t), quotient_norm(rf.at(t), a)))
    return InterpolationReport(np.asarray(ts, float), np.array(margins))


def random_admissible_triple(n: int, m: int, rng: np.random.Generator, spread: float = 1.0):
    """Random ``(H0, F, H1, G, A)`` satisfying the interpolation hypotheses.

    ``H1`` is the quotient norm shrunk by a random positive factor per
    direction and ``G`` is the quotient filtration with weights raised.
    """
    from .filtrations import random_filtration
    from .hermlab import random_herm

    a = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    h0 = random_herm(n, rng, spread)
    f = random_filtration(n, rng, spread=spread)
    q = quotient_norm(h0, a)
    # H1 <= [H0]: conjugate a contraction into the quotient Gram
    z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    u, _ = np.linalg.qr(z)
    shrink = np.exp(-rng.uniform(0, spread, m))
    qs = scipy.linalg.sqrtm(q.gram)
    h1 = HermNorm(qs @ (u * shrink**2) @ u.conj().T @ qs)
    gq = quotient_filtration(f, a)
    g = Filtration(gq.vectors, gq.weights + rng.uniform(0, spread, m))
    return h0, f, h1, g, a


# --------------------------------------------------------------------------
# Compatibility with Sym and tensor products
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SymTensorReport:
    ok: bool
    sym_residual: float
    tensor_residual: float


def ray_sym_tensor_check(h: HermNorm, f: Filtration, l: int, t: float,
                         k: HermNorm | None = None, g: Filtration | None = None,
                         tol: float = 1e-9) -> SymTensorReport:
    """Compare ``H_t^{Sym^l F}`` with ``Sym^l H_t^F`` (and the tensor analogue).

    Residuals are ``d_inf`` distances between the two Hermitian norms.
    """
    lhs = HermRay(sym_power_norm(h, l), sym_filtration(f, l)).at(t)
    rhs = sym_power_norm(HermRay(h, f).at(t), l)
    sym_res = float(np.max(np.abs(log_spectrum(lhs, rhs))))
    ten_res = 0.0
    if k is not None and g is not None:
        lhs = HermRay(tensor_norm(h, k), tensor_filtration(f, g)).at(t)
        rhs = tensor_norm(HermRay(h, f).at(t), HermRay(k, g).at(t))
        ten_res = float(np.max(np.abs(log_spectrum(lhs, rhs))))
    return SymTensorReport(sym_res <= tol and ten_res <= tol, sym_res, ten_res)
