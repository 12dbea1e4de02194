"""Canonical L^2 norms, Berezin–Toeplitz operators and trace asymptotics on P^1.

Sections of ``O(k) (x) E (x) K`` with ``E = O(2)`` are written
``z^a (x) e (x) dz`` in the chart ``w = 1``.  With the squared Fubini–Study
metric on ``E`` the pairing ``int s ^ conj(s)`` needs no volume form and
becomes, up to a constant factor,

    ||z^a||^2 = int exp((a + 1) x - k phi(x)) / (1 + e^x)^2 dx.

For smooth symplectic data this is evaluated in the moment coordinate
``y``; :func:`hilb_can_chart` computes the same integral in the other
chart (``x' = -x``) as an independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from .hermlab import HermNorm, dp_distance, log_spectrum, p_mean, vee_norm
from .secring import MetricOnL, SymplecticData, _log_quad

N_PANELS = 256
PANEL_ORDER = 20


def _require_smooth(h: MetricOnL) -> SymplecticData:
    if h.sym is None or h.sym.d2v is None:
        raise ValueError("canonical norms need a metric with smooth symplectic data")
    if h.sym.kinks:
        raise ValueError("canonical norms need a symplectic potential without kinks")
    return h.sym


def log_density_can(sym: SymplecticData, k: int, c: float) -> Callable:
    """Log density in ``y`` of ``|z|^{2c} e^{x - k phi} (1 + e^x)^{-2} dx``."""

    def fn(y):
        y = np.asarray(y, float)
        dv = sym.dv(y)
        with np.errstate(divide="ignore"):
            ly, l1y = np.log(y), np.log1p(-y)
            out = (c * ly if c else 0.0) + ((k - c) * l1y if k - c else 0.0)
            out = out + k * sym.v(y) + (c - k * y) * dv + dv
            out = out - 2.0 * np.logaddexp(l1y, dv + ly)
            out = out + np.log1p(y * (1 - y) * sym.d2v(y))
        return out

    return fn


def hilb_can_log_diag(h: MetricOnL, k: int) -> np.ndarray:
    """``log ||z^a||^2`` of the canonical ``L^2`` norm, ``a = 0..k``."""
    sym = _require_smooth(h)
    return np.array([_log_quad(log_density_can(sym, k, a), peak_hint=(a / k if k else 0.5)) for a in range(k + 1)])


def hilb_can(h: MetricOnL, k: int) -> HermNorm:
    """Canonical ``L^2`` norm on degree ``k`` (diagonal Gram)."""
    return HermNorm.diag(np.exp(hilb_can_log_diag(h, k)))


def hilb_can_chart(h: MetricOnL, k: int, chart: int = 1) -> np.ndarray:
    """The same Gram diagonal as :func:`hilb_can_log_diag` integrated in ``x``.

    ``chart=0`` integrates in ``x = log|z|^2``; ``chart=1`` in the opposite
    chart ``x' = log|1/z|^2`` where the section reads ``z'^{k-a}`` and the
    potential is ``phi(-x') + x'``.
    """
    out = np.empty(k + 1)
    for a in range(k + 1):
        if chart == 0:
            def logf(x, a=a):
                return (a + 1) * x - k * h.potential(x) - 2 * np.logaddexp(0.0, x)
        else:
            def logf(x, a=a):
                pt = h.potential(-x) + x
                return (k - a + 1) * x - k * pt - 2 * np.logaddexp(0.0, x)
        xs = np.linspace(-200, 200, 8001)
        lv = logf(xs)
        m = float(lv.max())
        peak = float(xs[np.argmax(lv)])
        pieces = [(-np.inf, peak - 30), (peak - 30, peak), (peak, peak + 30), (peak + 30, np.inf)]
        tot = 0.0
        for lo, hi in pieces:
            val, _ = integrate.quad(lambda x: math.exp(float(logf(np.array([x]))[0]) - m), lo, hi,
                                    limit=400, epsabs=0.0, epsrel=1e-12)
            tot += val
        out[a] = m + math.log(tot)
    return out


# --------------------------------------------------------------------------
# Toeplitz operators
# --------------------------------------------------------------------------


def _nodes(n_panels: int = N_PANELS, order: int = PANEL_ORDER):
    """Composite Gauss–Legendre rule on ``[0, 1]`` in ``y = (1 - cos(pi s)) / 2``."""
    g, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0, 1, n_panels + 1)
    s = (0.5 * (edges[:-1, None] + edges[1:, None]) + 0.5 * np.diff(edges)[:, None] * g[None, :]).ravel()
    ws = (0.5 * np.diff(edges)[:, None] * w[None, :]).ravel()
    y = 0.5 * (1 - np.cos(np.pi * s))
    wy = ws * 0.5 * np.pi * np.sin(np.pi * s)
    return y, wy


class ToeplitzQuantizer:
    """Berezin–Toeplitz operators of degree ``k`` for a smooth toric metric.

    Matrices are expressed in the orthonormal basis ``z^a / ||z^a||`` of the
    canonical ``L^2`` norm.  A function ``f`` of the moment coordinate ``y``
    (one argument) gives a diagonal operator; ``f(y, theta)`` is expanded in
    Fourier modes of the angle, the mode ``m`` contributing to entries with
    ``b - a = m``.

    Parameters
    ----------
    h : MetricOnL
        Metric with smooth symplectic data.
    k : int
    n_panels, order : int
        Composite quadrature in ``y``.
    """

    def __init__(self, h: MetricOnL, k: int, n_panels: int = N_PANELS, order: int = PANEL_ORDER):
        sym = _require_smooth(h)
        self.h, self.k = h, k
        self.y, wy = _nodes(n_panels, order)
        self.logw = np.log(wy)
        # log densities for half-integer exponents c = j/2, j = 0..2k
        self.logd = np.stack([log_density_can(sym, k, j / 2)(self.y) for j in range(2 * k + 1)])
        self.log_gram = logsumexp(self.logd[::2] + self.logw[None, :], axis=1)

    @property
    def dim(self) -> int:
        return self.k + 1

    def _kernel(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """``exp(L_{(a+b)/2}(y) - (log G_a + log G_b)/2) * weight`` per node."""
        return np.exp(self.logd[a + b] + self.logw[None, :] - 0.5 * (self.log_gram[a] + self.log_gram[b])[:, None])

    def matrix(self, f: Callable, n_theta: int | None = None) -> np.ndarray:
        k = self.k
        try:
            vals = np.asarray(f(self.y), float)
            radial = vals.shape == self.y.shape
        except TypeError:
            radial = False
        a = np.arange(k + 1)
        if radial:
            return np.diag(np.sum(self._kernel(a, a) * vals[None, :], axis=1)).astype(complex)
        m = n_theta or 2 * k + 2
        th = 2 * np.pi * np.arange(m) / m
        samples = np.asarray(f(self.y[:, None], th[None, :]), float)
        fhat = np.fft.fft(samples, axis=1) / m  # fhat[:, j] = mode j (mod m)
        out = np.zeros((k + 1, k + 1), complex)
        for d in range(-k, k + 1):
            aa = np.arange(max(0, -d), min(k, k - d) + 1)
            bb = aa + d
            ker = self._kernel(aa, bb)
            out[bb, aa] = np.sum(ker * fhat[:, d % m][None, :], axis=1)
        return 0.5 * (out + out.conj().T)

    def trace(self, f: Callable, **kw) -> float:
        return float(np.real(np.trace(self.matrix(f, **kw))))


def toeplitz_matrix(f: Callable, k: int, h: MetricOnL, **kw) -> np.ndarray:
    """Matrix of ``T_k(f)`` in the canonical orthonormal monomial basis."""
    return ToeplitzQuantizer(h, k).matrix(f, **kw)


def _mean_over_moment(f: Callable, n_theta: int = 64) -> float:
    """``int_0^1 (angle average of f) dy``."""
    try:
        val = f(np.array([0.5]))
        radial = np.shape(val) == (1,)
    except TypeError:
        radial = False
    if radial:
        return integrate.quad(lambda y: float(f(np.array([y]))[0]), 0, 1, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    return integrate.quad(lambda y: float(np.mean(f(np.array([[y]]), th[None, :]))), 0, 1, epsabs=1e-13, limit=200)[0]


@dataclass(frozen=True)
class TraceReport:
    """Rows ``(k, tau, f_id, deviation)`` and the largest absolute deviation."""

    rows: list
    max_deviation: float


def trace_asymptotics(fs: dict, ks, metrics: dict) -> TraceReport:
    """Deviation ``tr T_k(f) / (k + 1) - int f dMA`` over a grid.

    Parameters
    ----------
    fs : dict
        ``f_id -> f``; values marked with :func:`per_tau` are called with
        ``tau`` to produce the function for that metric.
    ks : iterable of int
    metrics : dict
        ``tau -> MetricOnL`` (smooth symplectic data).
    """
    rows = []
    worst = 0.0
    for tau, h in metrics.items():
        for k in ks:
            q = ToeplitzQuantizer(h, int(k))
            for fid, f in fs.items():
                fn = f(tau) if getattr(f, "per_tau", False) else f
                dev = q.trace(fn) / (k + 1) - _mean_over_moment(fn)
                rows.append({"k": int(k), "tau": float(tau), "f": fid, "deviation": float(dev)})
                worst = max(worst, abs(dev))
    return TraceReport(rows, worst)


def per_tau(fn: Callable) -> Callable:
    """Mark ``fn`` as a ``tau``-indexed family for :func:`trace_asymptotics`."""
    fn.per_tau = True
    return fn


# --------------------------------------------------------------------------
# Inequalities
# --------------------------------------------------------------------------


class OrderError(ValueError):
    """Inputs violate the required order of metrics or norms."""


@dataclass(frozen=True)
class MarginReport:
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def quantized_mp_check(h0: MetricOnL, h1: MetricOnL, p: float, k: int, order_tol: float = 1e-10) -> MarginReport:
    """Quantized maximum principle for ``h0 <= h1``.

    ``lhs = d_p(Hilb^can_k(h0), Hilb^can_k(h1))`` and
    ``rhs = k (tr T_k(|psi|^p) / (k + 1))^{1/p}`` with ``T_k`` built on
    ``h0`` and ``psi(y) = (u_1 - u_0)(y) / 2`` the initial velocity of the
    geodesic from ``h0`` to ``h1`` in log-norm units, read in the moment
    coordinate of ``h0``.
    """
    y = np.linspace(0, 1, 4097)
    u0, u1 = h0.symplectic(y), h1.symplectic(y)
    if np.min(u1 - u0) < -order_tol:
        raise OrderError("need h0 <= h1 (u_0 <= u_1)")
    lhs = p_mean(0.5 * (hilb_can_log_diag(h1, k) - hilb_can_log_diag(h0, k)), p)
    q = ToeplitzQuantizer(h0, k)
    psi = lambda yy: np.abs(0.5 * (h1.symplectic(yy) - h0.symplectic(yy))) ** p
    rhs = k * (q.trace(psi) / (k + 1)) ** (1.0 / p)
    return MarginReport(float(lhs), float(rhs))


def jensen_toeplitz_check(f: Callable, p: float, k: int, h: MetricOnL) -> MarginReport:
    """``Tr[T_k(|f|)^p] <= Tr[T_k(|f|^p)]``."""
    q = ToeplitzQuantizer(h, k)
    try:
        np.asarray(f(q.y), float)
        absf = lambda y: np.abs(f(y))
        powf = lambda y: np.abs(f(y)) ** p
    except TypeError:
        absf = lambda y, th: np.abs(f(y, th))
        powf = lambda y, th: np.abs(f(y, th)) ** p
    ev = np.linalg.eigvalsh(q.matrix(absf))
    lhs = float(np.sum(np.clip(ev, 0.0, None) ** p))
    return MarginReport(lhs, q.trace(powf))


@dataclass(frozen=True)
class VeeReport:
    lhs: float
    rhs: float
    d_vee: tuple

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def vee_pythagorean_check(h0: HermNorm, h1: HermNorm, h2: HermNorm, p: float = 2.0, order_tol: float = 1e-10) -> VeeReport:
    """``d_p(H0,H1)^p <= d_p(H0,H2)^p + d_p(H1,H2)^p`` for ``H0, H1 <= H2``.

    ``d_vee`` holds ``(d_p(H0, H0 v H1)^p, d_p(H1, H0 v H1)^p)``, whose sum
    equals the left side exactly.
    """
    for h in (h0, h1):
        if log_spectrum(h, h2).min() < -order_tol:
            raise OrderError("need H0 <= H2 and H1 <= H2")
    hv = vee_norm(h0, h1)
    lhs = dp_distance(h0, h1, p) ** p
    rhs = dp_distance(h0, h2, p) ** p + dp_distance(h1, h2, p) ** p
    return VeeReport(lhs, rhs, (dp_distance(h0, hv, p) ** p, dp_distance(h1, hv, p) ** p))


def random_vee_triple(n: int, rng: np.random.Generator, spread: float = 1.0):
    """``H0, H1`` random and ``H2`` above both (their maximum plus a positive part)."""
    from .hermlab import random_herm

    h0 = random_herm(n, rng, spread)
    h1 = random_herm(n, rng, spread)
    hv = vee_norm(h0, h1)
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    extra = z @ z.conj().T * rng.uniform(0, 0.5)
    h2 = HermNorm(hv.gram * math.exp(rng.uniform(0, 0.5)) + extra)
    return h0, h1, h2
