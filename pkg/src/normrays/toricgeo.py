"""Torus-invariant metrics on O(1) over the projective line, analytic side.

Everything is expressed through the symplectic potential ``u(y)`` on the
moment interval ``[0, 1]``.  Geodesics are linear in ``u``, the ``L^p``
distance between two metrics is the ``L^p(dy)`` norm of ``u_0 - u_1``
(potential units; halve it for log-norm units), and the rooftop envelope
has symplectic potential ``max(u_0, u_1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _convex
from .measures import DiscreteMeasure
from .secring import FS_DATA, MetricOnL, default_grid, from_grid, from_symplectic, fubini_study

N_MID = 20000


@dataclass(frozen=True, eq=False)
class SymplecticPotential:
    """Convex function ``u`` sampled on a grid of ``[0, 1]``."""

    y: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        if self.y[0] < 0 or self.y[-1] > 1:
            raise ValueError("grid must lie in [0, 1]")
        if not _convex.is_convex(self.y, self.u, tol=1e-8):
            raise ValueError("symplectic potential is not convex")


def legendre(h: MetricOnL, y: np.ndarray | None = None) -> SymplecticPotential:
    """``u(y) = sup_x (x y - phi(x))`` on a grid of ``[0, 1]``.

    Without ``y`` the transform of the grid potential is sampled at its
    breakpoints (the slopes of the lower hull, plus ``0`` and ``1``), so it
    is represented exactly and the inverse transform returns the convex
    hull of the input.  With ``y`` the exact symplectic data is used when
    present.
    """
    if y is None:
        hull = _convex.lower_hull(h.x, h.phi)
        slopes = np.diff(h.phi[hull]) / np.diff(h.x[hull])
        y = np.unique(np.clip(np.concatenate([[0.0], slopes, [1.0]]), 0.0, 1.0))
        y = y[np.concatenate([[True], np.diff(y) > 1e-12])]
        return SymplecticPotential(y, _convex.legendre(h.x, h.phi, y))
    y = np.asarray(y, float)
    return SymplecticPotential(y, h.symplectic(y))


def legendre_inverse(sp: SymplecticPotential, x: np.ndarray | None = None, label: str = "") -> MetricOnL:
    """Grid metric with potential ``phi(x) = max_j (x y_j - u_j)``."""
    x = default_grid() if x is None else np.asarray(x, float)
    return from_grid(x, _convex.legendre(sp.y, sp.u, x), label)


def biduality_error(h: MetricOnL, y: np.ndarray | None = None) -> float:
    """``max |phi - phi**|`` on the ``x``-grid, with ``**`` through a ``y``-grid."""
    back = legendre_inverse(legendre(h, y), h.x)
    return float(np.max(np.abs(back.phi - h.phi)))


def _sym_or_none(h: MetricOnL):
    return h.sym


def toric_geodesic(h0: MetricOnL, h1: MetricOnL, t: float) -> MetricOnL:
    """Metric with symplectic potential ``(1 - t) u_0 + t u_1``.

    For ``t`` outside ``[0, 1]`` the combination may fail to be convex, in
    which case a ``ValueError`` is raised.
    """
    if t == 0:
        return h0
    if t == 1:
        return h1
    s0, s1 = _sym_or_none(h0), _sym_or_none(h1)
    if s0 is not None and s1 is not None:
        return from_symplectic(s0.combine(s1, 1 - t, t), h0.x, f"geod({t})")
    y = np.linspace(0, 1, 8193)
    u = (1 - t) * h0.symplectic(y) + t * h1.symplectic(y)
    return legendre_inverse(SymplecticPotential(y, u), h0.x, f"geod({t})")


def _midpoints(n: int = N_MID) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


def potential_gap(h0: MetricOnL, h1: MetricOnL, n: int = N_MID) -> np.ndarray:
    """``u_0 - u_1`` at the midpoints of ``n`` equal cells of ``[0, 1]``."""
    y = _midpoints(n)
    return h0.symplectic(y) - h1.symplectic(y)


def toric_dp(h0: MetricOnL, h1: MetricOnL, p: float = 2.0, n: int = N_MID) -> float:
    """``(int_0^1 |u_0 - u_1|^p dy)^{1/p}`` by the midpoint rule (potential units).

    ``p = inf`` returns ``max |u_0 - u_1|`` over ``[0, 1]`` including the
    endpoints.
    """
    if math.isinf(p):
        y = np.concatenate([[0.0], _midpoints(n), [1.0]])
        return float(np.max(np.abs(h0.symplectic(y) - h1.symplectic(y))))
    d = np.abs(potential_gap(h0, h1, n))
    return float(np.mean(d**p) ** (1.0 / p))


def ma_measure(h: MetricOnL, coordinate: str = "y") -> DiscreteMeasure:
    """Monge–Ampère measure of ``h`` as a discrete measure.

    ``coordinate="x"`` places the slope jumps of the grid potential at the
    grid nodes, with the tail masses ``phi'(x_0)`` and ``1 - phi'(x_n)``
    at the two ends.  ``coordinate="y"`` pushes it forward by ``phi'``,
    which is the uniform distribution on the midpoints of ``[0, 1]``.
    """
    if coordinate == "y":
        y = _midpoints(4096)
        return DiscreteMeasure(y, np.full(y.size, 1.0 / y.size))
    if coordinate != "x":
        raise ValueError("coordinate must be 'x' or 'y'")
    slopes = np.diff(h.phi) / np.diff(h.x)
    slopes = np.clip(slopes, 0.0, 1.0)
    mass = np.concatenate([[slopes[0]], np.diff(slopes), [1.0 - slopes[-1]]])
    mass = np.clip(mass, 0.0, None)
    keep = mass > 0
    return DiscreteMeasure(h.x[keep], mass[keep] / mass.sum())


def berndtsson_measure(h0: MetricOnL, h1: MetricOnL, n: int = N_MID) -> DiscreteMeasure:
    """Distribution of ``u_0 - u_1`` under Lebesgue measure on ``[0, 1]``.

    Uses the same midpoint rule as :func:`toric_dp`, so the ``p``-th
    absolute moment equals ``toric_dp(h0, h1, p) ** p`` up to rounding.
    """
    d = potential_gap(h0, h1, n)
    return DiscreteMeasure(d, np.full(n, 1.0 / n)).merged()


def rooftop(h0: MetricOnL, h1: MetricOnL) -> MetricOnL:
    """Convex envelope of ``min(phi_0, phi_1)`` on the common grid."""
    if not np.array_equal(h0.x, h1.x):
        raise ValueError("metrics must share the x-grid")
    m = np.minimum(h0.phi, h1.phi)
    return from_grid(h0.x, _convex.convex_envelope(h0.x, m), "rooftop")


def rooftop_exact(h0: MetricOnL, h1: MetricOnL, y: np.ndarray | None = None) -> MetricOnL:
    """Rooftop through its symplectic potential ``max(u_0, u_1)``."""
    y = np.linspace(0, 1, 8193) if y is None else y
    u = np.maximum(h0.symplectic(y), h1.symplectic(y))
    return legendre_inverse(SymplecticPotential(y, u), h0.x, "rooftop")


def random_toric_metric(rng: np.random.Generator, scale: float = 1.0, x: np.ndarray | None = None) -> MetricOnL:
    """Smooth metric with ``u = u_FS + c0 + c1 y + c2 y^2 + c3 y^3``.

    The coefficients are drawn so that ``v'' >= -2 > -u_FS''``, which keeps
    ``u`` strictly convex.
    """
    c0, c1 = scale * rng.uniform(-1, 1, 2)
    # v'' = 2 c2 + 6 c3 y is affine; bounding both endpoints bounds it on [0, 1]
    c2 = rng.uniform(-1, scale)
    c3 = rng.uniform(-(2 + 2 * c2) / 6, scale)
    sym = FS_DATA.add(lambda y: c0 + c1 * y + c2 * y**2 + c3 * y**3,
                      lambda y: c1 + 2 * c2 * y + 3 * c3 * y**2,
                      lambda y: 2 * c2 + 6 * c3 * y)
    return from_symplectic(sym, x, "random")


def pythagorean_residual(h0: MetricOnL, h1: MetricOnL, p: float = 2.0) -> float:
    """Relative residual of ``d_p(h0,h1)^p = d_p(h0,P)^p + d_p(h1,P)^p`` for the grid rooftop."""
    pr = rooftop(h0, h1)
    lhs = toric_dp(h0, h1, p) ** p
    rhs = toric_dp(h0, pr, p) ** p + toric_dp(h1, pr, p) ** p
    return abs(lhs - rhs) / max(lhs, 1e-300)


# --------------------------------------------------------------------------
# Rays
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ToricRay:
    """Ray with symplectic potential ``u_0 - 2 t g``.

    ``g`` is a concave weight profile on ``[0, 1]``; the filtration with
    degree-``k`` weights ``k g(a/k)`` quantizes to this ray.
    """

    base: MetricOnL
    g: Callable
    dg: Callable
    d2g: Callable | None = None
    kinks: tuple = ()
    label: str = ""

    def at(self, t: float) -> MetricOnL:
        if t == 0:
            return self.base
        sym = self.base.sym
        if sym is None:
            raise ValueError("toric rays need a base with exact symplectic data")
        d2 = None if self.d2g is None else (lambda y, c=t: -2 * c * self.d2g(y))
        s = sym.add(lambda y, c=t: -2 * c * self.g(y), lambda y, c=t: -2 * c * self.dg(y), d2, self.kinks)
        return from_symplectic(s, self.base.x, f"{self.label}(t={t})")

    def velocity(self, y) -> np.ndarray:
        """``d u_t / dt = -2 g(y)``."""
        return -2.0 * np.asarray(self.g(y), float)


def toric_filtration_ray(g: Callable, dg: Callable, base: MetricOnL | None = None, d2g: Callable | None = None,
                         kinks=(), label: str = "") -> ToricRay:
    return ToricRay(fubini_study() if base is None else base, g, dg, d2g, tuple(kinks), label)


def trivial_ray(base: MetricOnL | None = None) -> ToricRay:
    z = lambda y: np.zeros_like(np.asarray(y, float))
    return toric_filtration_ray(z, z, base, z, label="trivial")


def linear_ray(base: MetricOnL | None = None) -> ToricRay:
    """Ray of the filtration with weights ``w_k(a) = a``: potential ``phi_0(x + 2t)``."""
    return toric_filtration_ray(lambda y: np.asarray(y, float), lambda y: np.ones_like(np.asarray(y, float)), base,
                                lambda y: np.zeros_like(np.asarray(y, float)), label="weights-a")


def reversed_linear_ray(base: MetricOnL | None = None) -> ToricRay:
    """Ray of the filtration with weights ``w_k(a) = k - a``."""
    return toric_filtration_ray(lambda y: 1 - np.asarray(y, float), lambda y: -np.ones_like(np.asarray(y, float)), base,
                                lambda y: np.zeros_like(np.asarray(y, float)), label="weights-(k-a)")


@dataclass(frozen=True)
class ToricSlopeTrace:
    """``d_p(ray0(t), ray1(t)) / t`` in log-norm units.

    Attributes
    ----------
    ts, slopes : ndarray
    limit : float
        Slope at the largest time.
    bracket : tuple
        ``slope(t_max) +- d_p(ray0(0), ray1(0)) / t_max`` (triangle inequality).
    converged : bool
        Last two slopes agree to ``tol`` (relative).
    """

    ts: np.ndarray
    slopes: np.ndarray
    limit: float
    bracket: tuple
    converged: bool

    def rows(self):
        for t, s in zip(self.ts, self.slopes):
            yield {"t": float(t), "slope": float(s)}


def chordal_dp_toric(ray0, ray1, p: float, t_grid, tol: float = 0.01) -> ToricSlopeTrace:
    """Chordal slope trace between two rays of toric metrics.

    ``ray0``/``ray1`` are :class:`ToricRay` objects or callables ``t -> MetricOnL``.
    Values are half the potential-unit distance divided by ``t``.
    """
    at0 = ray0.at if hasattr(ray0, "at") else ray0
    at1 = ray1.at if hasattr(ray1, "at") else ray1
    ts = np.asarray(t_grid, float)
    if np.any(ts <= 0):
        raise ValueError("times must be positive")
    slopes = np.array([0.5 * toric_dp(at0(t), at1(t), p) / t for t in ts])
    d0 = 0.5 * toric_dp(at0(0.0), at1(0.0), p)
    last = float(slopes[-1])
    conv = True
    if slopes.size >= 2:
        conv = abs(slopes[-1] - slopes[-2]) <= tol * max(abs(last), 1e-12) or abs(slopes[-1] - slopes[-2]) <= 1e-12
    return ToricSlopeTrace(ts, slopes, last, (last - d0 / ts[-1], last + d0 / ts[-1]), bool(conv))


def sup_velocity_bound(h0: MetricOnL, h1: MetricOnL, delta: float = 1e-4) -> tuple[float, float]:
    """``(sup_x |d phi_t / dt at t=0|, sup_y |u_1 - u_0|)`` along the geodesic.

    The velocity is a one-sided difference quotient of the geodesic
    potentials on the ``x``-grid.
    """
    ht = toric_geodesic(h0, h1, delta)
    vel = (ht.potential(h0.x) - h0.potential(h0.x)) / delta
    y = np.linspace(0, 1, 4097)
    return float(np.max(np.abs(vel))), float(np.max(np.abs(h1.symplectic(y) - h0.symplectic(y))))
