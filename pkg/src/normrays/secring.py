"""Section ring of O(1) over the projective line, in the monomial model.

Degree ``k`` sections are the monomials ``z^a w^{k-a}``, ``a = 0..k``.  In
the chart ``w = 1`` a torus-invariant metric on ``O(1)`` is described by a
convex potential ``phi(x)`` of ``x = log|z|^2`` with
``|w|^2 = exp(-phi(x))``; the Fubini–Study metric has
``phi = log(1 + e^x)``.  Its Legendre transform ``u(y)``, ``y in [0, 1]``,
is the symplectic potential; the Monge–Ampère measure pushed to the moment
coordinate ``y = phi'(x)`` is Lebesgue measure on ``[0, 1]``.

Metrics are stored on an ``x``-grid and, when known, through an exact
symplectic potential ``u = u_FS + v``.  Integrals against the Monge–Ampère
measure are evaluated in the moment coordinate, where

    |z^a|^2 exp(-k phi) = y^a (1-y)^(k-a) exp(k v + (a - k y) v').
"""
from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import expit, gammaln, logsumexp

from . import _convex
from .filtrations import Filtration
from .hermlab import HermNorm, PolyhedralNorm, multi_indices, p_mean, sym_power_norm

logger = logging.getLogger(__name__)

X_MAX = 40.0
N_GRID = 4096
K_MAX = 32


# --------------------------------------------------------------------------
# Multiplication maps
# --------------------------------------------------------------------------


def mult_matrix(l: int, k: int) -> np.ndarray:
    """Multiplication ``Sym^l H^0(O(k)) -> H^0(O(kl))`` in monomial bases.

    Columns are indexed by :func:`multi_indices` of ``k + 1`` variables
    (``e_a = z^a w^{k-a}``); the monomial ``prod e_a^{alpha_a}`` maps to
    ``z^{sum a alpha_a}``.
    """
    cols = multi_indices(k + 1, l)
    out = np.zeros((k * l + 1, len(cols)))
    for j, alpha in enumerate(cols):
        out[sum(a * m for a, m in enumerate(alpha)), j] = 1.0
    return out


def mult2_matrix(l: int, k: int) -> np.ndarray:
    """Multiplication ``H^0(O(l)) (x) H^0(O(k)) -> H^0(O(l+k))`` (Kronecker order)."""
    out = np.zeros((l + k + 1, (l + 1) * (k + 1)))
    for a in range(l + 1):
        for b in range(k + 1):
            out[a + b, a * (k + 1) + b] = 1.0
    return out


# --------------------------------------------------------------------------
# Metrics on O(1)
# --------------------------------------------------------------------------


def u_fs(y):
    """Symplectic potential of Fubini–Study: ``y log y + (1-y) log(1-y)``."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(y > 0, y * np.log(np.where(y > 0, y, 1.0)), 0.0) + np.where(
            y < 1, (1 - y) * np.log(np.where(y < 1, 1 - y, 1.0)), 0.0
        )
    return out


def _zero(y):
    return np.zeros_like(np.asarray(y, dtype=float))


@dataclass(frozen=True, eq=False)
class SymplecticData:
    """Exact symplectic potential ``u = u_FS + v`` with ``v`` bounded on ``[0, 1]``.

    ``dv`` must be bounded; ``d2v`` is needed only for integrals against a
    fixed volume form (canonical norms).  ``kinks`` lists points where ``dv``
    jumps.
    """

    v: Callable
    dv: Callable
    d2v: Callable | None = None
    kinks: tuple = ()

    def u(self, y):
        return u_fs(y) + self.v(y)

    def combine(self, other: "SymplecticData", a: float, b: float) -> "SymplecticData":
        """``a * self + b * other`` on the perturbations (with ``a + b = 1``)."""
        d2 = None
        if self.d2v is not None and other.d2v is not None:
            d2 = lambda y, s=self, o=other: a * s.d2v(y) + b * o.d2v(y)
        return SymplecticData(
            lambda y, s=self, o=other: a * s.v(y) + b * o.v(y),
            lambda y, s=self, o=other: a * s.dv(y) + b * o.dv(y),
            d2,
            tuple(sorted(set(self.kinks) | set(other.kinks))),
        )

    def add(self, g: Callable, dg: Callable, d2g: Callable | None = None, kinks=()) -> "SymplecticData":
        """Perturbation ``v + g``."""
        d2 = None
        if self.d2v is not None and d2g is not None:
            d2 = lambda y, s=self: s.d2v(y) + d2g(y)
        return SymplecticData(
            lambda y, s=self: s.v(y) + g(y),
            lambda y, s=self: s.dv(y) + dg(y),
            d2,
            tuple(sorted(set(self.kinks) | set(kinks))),
        )


FS_DATA = SymplecticData(_zero, _zero, _zero)


def _softplus(s):
    return np.logaddexp(0.0, s)


def _legendre_exact(sym: SymplecticData, x: np.ndarray, iters: int = 80):
    """``phi(x) = sup_y (x y - u(y))`` and the maximizer ``y(x)``.

    Solves ``s + v'(expit(s)) = x`` for the logit ``s`` of ``y`` by bisection.
    """
    x = np.asarray(x, dtype=float)
    probe = np.linspace(0, 1, 2049)[1:-1]
    bound = float(np.max(np.abs(sym.dv(probe)))) + 1.0
    lo, hi = x - bound - 1.0, x + bound + 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        val = mid + sym.dv(expit(mid)) - x
        lo = np.where(val < 0, mid, lo)
        hi = np.where(val < 0, hi, mid)
    s = 0.5 * (lo + hi)
    y = expit(s)
    # x y - u(y) with u_FS(y) = y s - softplus(s)
    phi = y * (x - s) + _softplus(s) - sym.v(y)
    return phi, y


@dataclass(frozen=True, eq=False)
class MetricOnL:
    """Torus-invariant metric on ``O(1)``.

    Attributes
    ----------
    x : ndarray
        Uniform grid on ``[-X_MAX, X_MAX]``.
    phi : ndarray
        Potential on the grid; extended by affine tails of slope 0 and 1.
    sym : SymplecticData or None
        Exact symplectic potential when available.
    label : str
    """

    x: np.ndarray
    phi: np.ndarray
    sym: SymplecticData | None = None
    label: str = ""

    def __post_init__(self):
        if self.x.shape != self.phi.shape:
            raise ValueError("grid and potential must have the same shape")
        slopes = np.diff(self.phi) / np.diff(self.x)
        if np.any(slopes < -1e-8) or np.any(slopes > 1 + 1e-8):
            raise ValueError("potential slopes must lie in [0, 1]")
        if not _convex.is_convex(self.x, self.phi, tol=1e-8):
            raise ValueError("potential is not convex")

    @property
    def smooth(self) -> bool:
        return self.sym is not None and self.sym.d2v is not None and not self.sym.kinks

    def potential(self, xq) -> np.ndarray:
        """Potential at arbitrary points, exact when the symplectic data is known."""
        xq = np.asarray(xq, dtype=float)
        if self.sym is not None:
            return _legendre_exact(self.sym, xq)[0]
        out = np.interp(xq, self.x, self.phi)
        out = np.where(xq < self.x[0], self.phi[0], out)
        return np.where(xq > self.x[-1], self.phi[-1] + (xq - self.x[-1]), out)

    def symplectic(self, y) -> np.ndarray:
        """Symplectic potential ``u(y)``."""
        y = np.asarray(y, dtype=float)
        if self.sym is not None:
            return self.sym.u(y)
        return _convex.legendre(self.x, self.phi, y)

    def scaled(self, c: float) -> "MetricOnL":
        """The metric ``exp(-c) h`` (potential ``phi + c``)."""
        sym = None
        if self.sym is not None:
            sym = self.sym.add(lambda y: -c * np.ones_like(np.asarray(y, float)), _zero, _zero)
        return MetricOnL(self.x, self.phi + c, sym, f"{self.label}+{c}")

    def translated(self, s: float) -> "MetricOnL":
        """Potential ``phi(x - s)`` (pull-back by ``z -> e^{s/2} z``)."""
        if self.sym is None:
            return from_grid(self.x, self.potential(self.x - s), f"{self.label}(x-{s})")
        sym = self.sym.add(lambda y: s * np.asarray(y, float), lambda y: s * np.ones_like(np.asarray(y, float)), _zero)
        return from_symplectic(sym, self.x, f"{self.label}(x-{s})")


def default_grid(x_max: float = X_MAX, n: int = N_GRID) -> np.ndarray:
    return np.linspace(-x_max, x_max, n)


def from_symplectic(sym: SymplecticData, x: np.ndarray | None = None, label: str = "") -> MetricOnL:
    x = default_grid() if x is None else np.asarray(x, float)
    phi, _ = _legendre_exact(sym, x)
    return MetricOnL(x, phi, sym, label)


def from_grid(x, phi, label: str = "") -> MetricOnL:
    return MetricOnL(np.asarray(x, float), np.asarray(phi, float), None, label)


def fubini_study(x: np.ndarray | None = None) -> MetricOnL:
    x = default_grid() if x is None else np.asarray(x, float)
    return MetricOnL(x, _softplus(x), FS_DATA, "FS")


def lognorm_gap_sup(h0: MetricOnL, h1: MetricOnL) -> float:
    """``sup |log |.|_{h1} / |.|_{h0}|`` on the grid (half the potential gap)."""
    return 0.5 * float(np.max(np.abs(h0.phi - h1.phi)))


# --------------------------------------------------------------------------
# L^2 and sup norms
# --------------------------------------------------------------------------


def _log_weight_ma(sym: SymplecticData, k: int, c: float):
    """Log density of ``|z|^{2c} exp(-k phi)`` against ``dy`` (Monge–Ampère)."""

    def fn(y):
        y = np.asarray(y, float)
        with np.errstate(divide="ignore"):
            out = (c * np.log(y) if c else 0.0) + ((k - c) * np.log1p(-y) if k - c else 0.0)
        return out + k * sym.v(y) + (c - k * y) * sym.dv(y)

    return fn


def _log_quad(logf: Callable, points=(), peak_hint: float | None = None, epsrel: float = 1e-11) -> float:
    """``log int_0^1 exp(logf(y)) dy`` by adaptive quadrature with a log shift."""
    probe = np.concatenate([np.linspace(0, 1, 2001)[1:-1], np.asarray(points, float)])
    if peak_hint is not None:
        probe = np.append(probe, np.clip(peak_hint, 1e-12, 1 - 1e-12))
    probe = probe[(probe > 0) & (probe < 1)]
    lv = logf(probe)
    shift = float(np.max(lv))
    brk = sorted({float(p) for p in points if 0 < p < 1} | ({float(peak_hint)} if peak_hint and 0 < peak_hint < 1 else set()))
    val, err = integrate.quad(lambda y: math.exp(float(logf(np.array([y]))[0]) - shift), 0.0, 1.0,
                              points=brk or None, limit=500, epsabs=0.0, epsrel=epsrel)
    if not np.isfinite(val) or val <= 0:
        raise RuntimeError("quadrature failed")
    if err > 1e-8 * val:
        logger.warning("quadrature error estimate %.2e exceeds target", err / val)
    return shift + math.log(val)


def _require_sym(h: MetricOnL) -> SymplecticData:
    if h.sym is not None:
        return h.sym
    return _grid_sym(h)


def _grid_sym(h: MetricOnL) -> SymplecticData:
    """Symplectic data from a grid potential (piecewise linear in ``y``)."""
    y = np.linspace(0, 1, 8193)
    u = _convex.legendre(h.x, h.phi, y)
    v = u - u_fs(y)
    dv_nodes = np.gradient(v, y)
    dv_nodes[0], dv_nodes[-1] = dv_nodes[1], dv_nodes[-2]
    return SymplecticData(lambda q: np.interp(q, y, v), lambda q: np.interp(q, y, dv_nodes))


def hilb_log_diag(h: MetricOnL, k: int) -> np.ndarray:
    """``log ||z^a||^2`` for the ``L^2`` norm of ``h^k`` against its Monge–Ampère measure.

    The measure has total mass one, so ``k = 0`` gives ``0``.
    """
    if k < 0:
        raise ValueError("degree must be nonnegative")
    sym = _require_sym(h)
    out = np.empty(k + 1)
    for a in range(k + 1):
        peak = a / k if k else 0.5
        out[a] = _log_quad(_log_weight_ma(sym, k, a), points=sym.kinks, peak_hint=peak)
    return out


def hilb_k(h: MetricOnL, k: int) -> HermNorm:
    """``Hilb_k(h)``: diagonal Gram ``int |z^a|^2 e^{-k phi} dMA``."""
    return HermNorm.diag(np.exp(hilb_log_diag(h, k)))


def hilb_fs_exact(k: int) -> np.ndarray:
    """``a! (k-a)! / (k+1)!`` for ``a = 0..k``."""
    a = np.arange(k + 1)
    return np.exp(gammaln(a + 1) + gammaln(k - a + 1) - gammaln(k + 2))


@dataclass(frozen=True, eq=False)
class DiagonalNorm:
    """Hermitian norm diagonal in monomials, stored through ``log ||z^a||^2``."""

    log_gram: np.ndarray

    @property
    def dim(self) -> int:
        return self.log_gram.size

    def log_norm(self, coeffs) -> float:
        c = np.asarray(coeffs, dtype=complex)
        with np.errstate(divide="ignore"):
            lc = 2 * np.log(np.abs(c))
        return 0.5 * float(logsumexp(lc + self.log_gram))

    def __call__(self, coeffs) -> float:
        return math.exp(self.log_norm(coeffs))

    def herm(self) -> HermNorm:
        return HermNorm.diag(np.exp(self.log_gram))


class BanNorm:
    """Sup norm ``sup_z |s(z)| exp(-k phi/2)`` of ``h^k``.

    Monomials are exact: ``log ||z^a|| = (k/2) u(a/k)``.  General sections
    use a grid in ``(x, theta)``; ``grid_gap`` records the largest
    difference between grid and exact values over the monomials.
    """

    def __init__(self, h: MetricOnL, k: int, n_x: int = 2049, n_theta: int = 64):
        self.h, self.k = h, k
        self.xs = np.linspace(h.x[0], h.x[-1], n_x)
        self.phis = h.potential(self.xs)
        self.thetas = np.linspace(0, 2 * np.pi, n_theta, endpoint=False)
        a = np.arange(k + 1)
        self.log_monomials = 0.5 * k * h.symplectic(a / k) if k else np.zeros(1)
        grid_vals = 0.5 * np.max(a[:, None] * self.xs[None, :] - k * self.phis[None, :], axis=1)
        self.grid_gap = float(np.max(self.log_monomials - grid_vals))

    @property
    def dim(self) -> int:
        return self.k + 1

    def log_norm(self, coeffs) -> float:
        c = np.asarray(coeffs, dtype=complex)
        nz = np.nonzero(np.abs(c) > 0)[0]
        if nz.size == 0:
            return -math.inf
        if nz.size == 1:
            a = nz[0]
            return math.log(abs(c[a])) + float(self.log_monomials[a])
        a = np.arange(self.k + 1)[nz]
        lc = np.log(np.abs(c[nz]))
        ph = np.angle(c[nz])
        # log |sum_a c_a e^{a x/2} e^{i a theta}| with a per-x shift
        expo = lc[None, :] + 0.5 * a[None, :] * self.xs[:, None]
        shift = expo.max(axis=1)
        mag = np.exp(expo - shift[:, None])
        phase = np.exp(1j * (ph[None, None, :] + a[None, None, :] * self.thetas[None, :, None]))
        vals = np.abs(np.sum(mag[:, None, :] * phase, axis=2))
        with np.errstate(divide="ignore"):
            logs = np.log(vals) + shift[:, None] - 0.5 * self.k * self.phis[:, None]
        return float(np.max(logs))

    def __call__(self, coeffs) -> float:
        return math.exp(self.log_norm(coeffs))

    def to_polyhedral(self) -> PolyhedralNorm:
        """Sup-type polyhedral norm over the evaluation grid (moderate ``k`` only)."""
        a = np.arange(self.k + 1)
        z = np.exp(0.5 * self.xs)[:, None] * np.exp(1j * self.thetas)[None, :]
        z = z.ravel()
        scale = np.repeat(np.exp(-0.5 * self.k * self.phis), self.thetas.size)
        rows = scale[:, None] * z[:, None] ** a[None, :]
        return PolyhedralNorm(rows, "sup")


def ban_k(h: MetricOnL, k: int, **kw) -> BanNorm:
    return BanNorm(h, k, **kw)


def ban_hilb_dinf_bracket(h: MetricOnL, k: int) -> tuple[float, float]:
    """Bracket for ``d_inf(Ban_k(h), Hilb_k(h))`` (log-norm units).

    Both norms are torus invariant.  Averaging over the circle shows
    ``Ban >= max_a |c_a| Ban(z^a)``; with the triangle inequality this
    sandwiches ``Ban`` between the weighted ``l^inf`` and ``l^1`` norms of
    the coefficients, which gives the bracket below.
    """
    lb = BanNorm(h, k).log_monomials
    lg = 0.5 * hilb_log_diag(h, k)
    r = lb - lg
    lower = float(np.max(np.abs(r)))
    up1 = 0.5 * float(logsumexp(2 * r))  # sup Ban / Hilb <= ||b/g||_2
    up2 = 0.5 * float(logsumexp(-2 * r))  # sup Hilb / Ban <= ||g/b||_2
    return lower, max(up1, up2)


# --------------------------------------------------------------------------
# Fubini–Study map
# --------------------------------------------------------------------------


def fs_log_q(n: HermNorm | DiagonalNorm, x, theta=0.0) -> np.ndarray:
    """``log ||ev_z||_*^2`` at ``z = e^{x/2 + i theta}`` (frame ``w^k``).

    The Fubini–Study metric of ``n`` on ``O(k)`` has potential equal to
    this quantity.
    """
    x = np.atleast_1d(np.asarray(x, float))
    theta = np.broadcast_to(np.asarray(theta, float), x.shape)
    if isinstance(n, DiagonalNorm):
        a = np.arange(n.dim)
        return logsumexp(a[None, :] * x[:, None] - n.log_gram[None, :], axis=1)
    g = n.gram
    diag = np.real(np.diag(g))
    if np.allclose(g, np.diag(diag), atol=0, rtol=0):
        return fs_log_q(DiagonalNorm(np.log(diag)), x)
    k = n.dim - 1
    a = np.arange(k + 1)
    expo = 0.5 * a[None, :] * x[:, None]
    shift = expo.max(axis=1)
    ev = np.exp(expo - shift[:, None] + 1j * a[None, :] * theta[:, None])
    ginv = np.linalg.inv(g)
    q = np.real(np.einsum("ia,ab,ib->i", ev, ginv, ev.conj()))
    return np.log(q) + 2 * shift


def fs_eval(n: HermNorm, z: complex) -> float:
    """Fiber norm of the frame ``w^k`` at the point ``[z : 1]`` for ``FS(n)``.

    ``|l|_FS = |l| / ||ev_z||_*`` with ``ev_z`` the evaluation covector.
    """
    z = complex(z)
    if z == 0:
        x, th = -np.inf, 0.0
        ev = np.zeros(n.dim, complex)
        ev[0] = 1.0
        q = float(np.real(ev @ np.linalg.inv(n.gram) @ ev.conj()))
        return q**-0.5
    x, th = 2 * math.log(abs(z)), math.atan2(z.imag, z.real)
    return float(np.exp(-0.5 * fs_log_q(n, x, th)[0]))


def fs_metric(n: HermNorm | DiagonalNorm, x: np.ndarray | None = None, label: str = "") -> MetricOnL:
    """``FS(n)^{1/k}`` as a grid metric on ``O(1)`` (torus-invariant ``n``)."""
    x = default_grid() if x is None else x
    k = n.dim - 1
    if k == 0:
        raise ValueError("degree 0 has no Fubini–Study metric on O(1)")
    phi = fs_log_q(n, x) / k
    return from_grid(x, phi, label)


# --------------------------------------------------------------------------
# Graded families
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MonomialFiltration:
    """Graded filtration diagonal in monomials, ``w_k(a)`` per degree.

    Attributes
    ----------
    weight_fn : callable ``(k, a) -> weights``
    label : str
    """

    weight_fn: Callable
    label: str = ""

    def weights(self, k: int) -> np.ndarray:
        return np.asarray(self.weight_fn(k, np.arange(k + 1)), dtype=float)

    def piece(self, k: int) -> Filtration:
        return Filtration.diagonal(self.weights(k))

    @classmethod
    def from_profile(cls, g: Callable, label: str = "") -> "MonomialFiltration":
        """Weights ``w_k(a) = k g(a/k)`` for a concave profile ``g`` on ``[0, 1]``."""
        return cls(lambda k, a: k * g(a / k) if k else np.array([float(g(0.0))]) * 0, label)

    @classmethod
    def trivial(cls) -> "MonomialFiltration":
        return cls(lambda k, a: np.zeros_like(a, dtype=float), "trivial")

    @classmethod
    def linear(cls) -> "MonomialFiltration":
        """Weights ``w_k(a) = a``."""
        return cls(lambda k, a: np.asarray(a, float), "weights-a")

    @classmethod
    def reversed_linear(cls) -> "MonomialFiltration":
        """Weights ``w_k(a) = k - a``."""
        return cls(lambda k, a: k - np.asarray(a, float), "weights-(k-a)")

    def shifted(self, m: float) -> "MonomialFiltration":
        """Degree-``k`` weights shifted by ``m k``."""
        return MonomialFiltration(lambda k, a, f=self.weight_fn: f(k, a) + m * k, f"{self.label}[{m}]")

    def submultiplicative_defect(self, kmax: int) -> float:
        """``max (w_k(a) + w_l(b) - w_{k+l}(a+b))`` over ``k + l <= kmax``."""
        worst = -math.inf
        for k in range(1, kmax):
            wk = self.weights(k)
            for l in range(1, kmax - k + 1):
                wl = self.weights(l)
                wkl = self.weights(k + l)
                s = wk[:, None] + wl[None, :]
                idx = np.arange(k + 1)[:, None] + np.arange(l + 1)[None, :]
                worst = max(worst, float(np.max(s - wkl[idx])))
        return worst


def maxplus_power(w: np.ndarray, l: int) -> np.ndarray:
    """``W[c] = max_{c = a_1 + ... + a_l} sum w[a_i]`` by dynamic programming."""
    out = np.asarray(w, float)
    for _ in range(l - 1):
        n_out = out.size + w.size - 1
        nxt = np.full(n_out, -np.inf)
        for b, wb in enumerate(w):
            nxt[b:b + out.size] = np.maximum(nxt[b:b + out.size], out + wb)
        out = nxt
    return out


@dataclass(frozen=True, eq=False)
class CanonicalApprox:
    """Filtration generated in degree ``k`` by a graded filtration ``F``.

    On degree ``l k`` the weight of ``z^a`` is the maximum of
    ``sum_i w_k(a_i)`` over ``a = a_1 + ... + a_l``.
    """

    base: MonomialFiltration
    k: int

    def weights(self, d: int) -> np.ndarray:
        if d % self.k:
            raise ValueError(f"degree {d} is not a multiple of {self.k}")
        if d == 0:
            return np.zeros(1)
        return maxplus_power(self.base.weights(self.k), d // self.k)

    def piece(self, d: int) -> Filtration:
        return Filtration.diagonal(self.weights(d))


def canonical_approx(f: MonomialFiltration, k: int, kmax: int = K_MAX, check: bool = True) -> CanonicalApprox:
    """Canonical approximation ``F(k)``; requires ``F`` submultiplicative up to ``kmax``."""
    if check:
        defect = f.submultiplicative_defect(kmax)
        if defect > 1e-9:
            raise ValueError(f"filtration is not submultiplicative (defect {defect:.3e})")
    return CanonicalApprox(f, k)


@dataclass(frozen=True)
class GradedDistance:
    ks: np.ndarray
    values: np.ndarray
    limsup: float
    last: float
    tail_spread: float
    cauchy: bool


def dp_graded(n_fn: Callable, m_fn: Callable, p: float, kmax: int = K_MAX, kmin: int = 1,
              tail: int = 4, tol: float = 0.05) -> GradedDistance:
    """``d_p(N_k, M_k)/k`` for ``k = kmin..kmax`` with tail statistics.

    ``n_fn(k)``/``m_fn(k)`` return :class:`DiagonalNorm` or :class:`HermNorm`.
    The sequence is flagged Cauchy when its last ``tail`` values stay within
    ``tol`` (relative) of each other.
    """
    from .hermlab import dp_distance

    ks = np.arange(kmin, kmax + 1)
    vals = []
    for k in ks:
        a, b = n_fn(k), m_fn(k)
        if isinstance(a, DiagonalNorm) and isinstance(b, DiagonalNorm):
            vals.append(p_mean(0.5 * (b.log_gram - a.log_gram), p) / k)
        else:
            a = a.herm() if isinstance(a, DiagonalNorm) else a
            b = b.herm() if isinstance(b, DiagonalNorm) else b
            vals.append(dp_distance(a, b, p) / k)
    vals = np.array(vals)
    t = vals[-tail:]
    spread = float(np.ptp(t))
    ref = max(abs(float(t[-1])), 1e-12)
    return GradedDistance(ks, vals, float(np.max(t)), float(vals[-1]), spread, spread <= tol * ref or spread <= 1e-12)


@dataclass(frozen=True)
class Homogenization:
    ms: np.ndarray
    values: np.ndarray
    bracket: tuple
    doubling_monotone: bool


def _poly_power_log(f: np.ndarray, m: int):
    """Coefficients of ``f^m`` as ``(normalized coefficients, log scale)``."""
    scale = float(np.max(np.abs(f)))
    g = f / scale
    out = np.array([1.0 + 0j])
    log_s = 0.0
    for _ in range(m):
        out = np.convolve(out, g)
        s = float(np.max(np.abs(out)))
        out /= s
        log_s += math.log(s)
    return out, log_s + m * math.log(scale)


def homogenize(norm_fn: Callable, f, k: int, kmax: int = K_MAX) -> Homogenization:
    """Sequence ``||f^m||^{1/m}`` for ``m k <= kmax``.

    ``norm_fn(d)`` returns a norm on degree ``d`` with a ``log_norm``
    method; ``f`` holds the coefficients of a degree-``k`` section.
    """
    f = np.asarray(f, dtype=complex)
    if f.size != k + 1:
        raise ValueError("coefficient vector must have length k + 1")
    if k == 0:
        ms = np.arange(1, kmax + 1)
        vals = np.array([math.exp(norm_fn(0).log_norm(f ** m) / m) for m in ms])
        return Homogenization(ms, vals, (float(vals[-1]), float(vals.min())), True)
    ms = np.arange(1, kmax // k + 1)
    vals = []
    for m in ms:
        coeffs, log_s = _poly_power_log(f, int(m))
        vals.append(math.exp((norm_fn(int(m * k)).log_norm(coeffs) + log_s) / m))
    vals = np.array(vals)
    dbl = [vals[2**j - 1] for j in range(int(math.log2(ms[-1])) + 1)]
    mono = bool(np.all(np.diff(dbl) <= 1e-10 * np.abs(np.array(dbl[1:]))))
    return Homogenization(ms, vals, (float(vals[-1]), float(vals.min())), mono)


def hilb_graded(h: MetricOnL) -> Callable:
    """Degree-indexed cached ``Hilb_k(h)`` as :class:`DiagonalNorm`."""

    @functools.lru_cache(maxsize=None)
    def fn(k):
        return DiagonalNorm(hilb_log_diag(h, k))

    return fn


def ban_graded(h: MetricOnL) -> Callable:
    @functools.lru_cache(maxsize=None)
    def fn(k):
        return BanNorm(h, k)

    return fn


def ray_graded(base_fn: Callable, filt: MonomialFiltration, t: float) -> Callable:
    """Graded norm ``k -> H_{t,k}`` for a diagonal base and monomial filtration."""

    def fn(k):
        return DiagonalNorm(base_fn(k).log_gram - 2.0 * t * filt.weights(k))

    return fn


# --------------------------------------------------------------------------
# Sym / L^2 identity on P(V*)
# --------------------------------------------------------------------------


def sym_l2_gram(h: HermNorm, k: int, n_s: int = 160, n_theta: int = 64) -> np.ndarray:
    """Gram of ``Hilb_k`` on ``P(V*)`` for the Fubini–Study metric of ``h``.

    ``V = C^2``; a point of ``P(V*)`` is a covector ``xi = (1, zeta)`` and the
    monomial ``e^alpha`` evaluates to ``zeta^{alpha_2}``.  The metric is
    ``|e(xi)| / ||xi||_*`` and the measure is its curvature form
    ``det(A) / (pi q^2) dArea`` with ``q = xi A xi^*``, ``A = G^{-1}``.
    Quadrature: Gauss–Legendre in ``s = t/(1+t)``, ``t = |zeta|^2``, and the
    trapezoid rule in the angle.
    """
    if h.dim != 2:
        raise ValueError("only dim V = 2 is supported")
    amat = np.linalg.inv(h.gram)
    det_a = float(np.real(np.linalg.det(amat)))
    nodes, wts = np.polynomial.legendre.leggauss(n_s)
    s = 0.5 * (nodes + 1)
    ws = 0.5 * wts
    t = s / (1 - s)
    dt = ws / (1 - s) ** 2
    th = np.linspace(0, 2 * np.pi, n_theta, endpoint=False)
    r = np.sqrt(t)[:, None]
    zeta = r * np.exp(1j * th)[None, :]
    q = np.real(amat[0, 0] + amat[0, 1] * zeta.conj() + amat[1, 0] * zeta + amat[1, 1] * np.abs(zeta) ** 2)
    meas = det_a / (np.pi * q**2) * 0.5 * dt[:, None] * (2 * np.pi / n_theta)
    mons = multi_indices(2, k)
    ev = np.stack([zeta ** al[1] for al in mons])  # (N, s, theta)
    weight = meas / q**k
    gram = np.einsum("ast,bst,st->ba", ev, ev.conj(), weight)
    return gram


def sym_l2_identity_check(h: HermNorm, k: int, **kw) -> float:
    """Relative residual between ``Sym^k H`` and ``(k+1) Hilb_k(FS(H))`` (squared norms).

    In norms the factor is ``sqrt((k + dim V - 1)!/k!) = sqrt(k + 1)``.
    """
    lhs = sym_power_norm(h, k).gram
    rhs = (k + 1) * sym_l2_gram(h, k, **kw)
    return float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(lhs)))


# --------------------------------------------------------------------------
# Quantized rays of metrics
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PhongSturmResult:
    metric: MetricOnL
    ls: np.ndarray
    potentials: dict
    tail_gaps: np.ndarray


def phong_sturm_ray(f: MonomialFiltration, h0: MetricOnL, t: float, kmax: int = K_MAX,
                    ls=None, x: np.ndarray | None = None) -> PhongSturmResult:
    """Quantized ray of metrics ``FS(H_{t,l})^{1/l}`` from ``Hilb_l(h0)``.

    ``H_{t,l}`` is the ray of norms of the degree-``l`` filtration started at
    ``Hilb_l(h0)``; everything is diagonal in monomials, so its potential is
    ``(1/l) log sum_a exp(a x + 2 t w_l(a)) / ||z^a||^2``.  The estimate of
    the limit is the last degree; ``tail_gaps`` lists log-norm ``d_inf``
    between consecutive degrees.
    """
    if not isinstance(f, (MonomialFiltration, CanonicalApprox)):
        raise TypeError("only torus-invariant (monomial) filtrations are supported")
    ls = np.arange(1, kmax + 1) if ls is None else np.asarray(ls)
    if x is None:
        # the ray moves the potential by up to 2 t max|w_l(a+1) - w_l(a)|;
        # widen the grid so the slopes still saturate at both ends
        steps = [np.max(np.abs(np.diff(f.weights(int(l))))) for l in ls if l > 0]
        shift = 2.0 * abs(t) * (max(steps) if steps else 0.0)
        x_max = float(h0.x[-1]) + shift
        n = int(len(h0.x) * x_max / float(h0.x[-1]))
        x = np.linspace(-x_max, x_max, n)
    hilb = hilb_graded(h0)
    pots = {}
    for l in ls:
        g = hilb(int(l)).log_gram
        w = f.weights(int(l))
        a = np.arange(int(l) + 1)
        pots[int(l)] = logsumexp(a[None, :] * x[:, None] + 2 * t * w[None, :] - g[None, :], axis=1) / l
    keys = sorted(pots)
    gaps = np.array([0.5 * np.max(np.abs(pots[b] - pots[a])) for a, b in zip(keys, keys[1:])])
    metric = from_grid(x, pots[keys[-1]], f"PS(t={t}, l={keys[-1]})")
    return PhongSturmResult(metric, np.array(keys), pots, gaps)
