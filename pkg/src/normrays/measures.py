"""Relative spectral measures of filtration pairs and their convergence."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .filtrations import Filtration, joint_diagonalize

MASS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite positive measure on the real line.

    Parameters
    ----------
    atoms : array_like
    masses : array_like
        Positive masses.
    total : float, optional
        Declared total mass; checked to ``MASS_TOL``.
    """

    atoms: np.ndarray
    masses: np.ndarray
    total: float = 1.0

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=float).ravel()
        m = np.asarray(self.masses, dtype=float).ravel()
        if a.shape != m.shape:
            raise ValueError("one mass per atom")
        if np.any(m <= 0):
            raise ValueError("masses must be positive")
        if abs(m.sum() - self.total) > MASS_TOL * max(1.0, self.total) * max(1, m.size) ** 0.5:
            raise ValueError(f"total mass {m.sum()} differs from declared {self.total}")
        order = np.argsort(a, kind="stable")
        object.__setattr__(self, "atoms", a[order])
        object.__setattr__(self, "masses", m[order])

    @classmethod
    def uniform(cls, atoms) -> "DiscreteMeasure":
        a = np.asarray(atoms, dtype=float).ravel()
        return cls(a, np.full(a.size, 1.0 / a.size))

    @classmethod
    def dirac(cls, x: float) -> "DiscreteMeasure":
        return cls(np.array([float(x)]), np.array([1.0]))

    def moment(self, p: float) -> float:
        """``(int |x|^p dmu / total)^{1/p}``; ``p = inf`` gives the largest ``|atom|``."""
        if math.isinf(p):
            return float(np.max(np.abs(self.atoms)))
        return float((np.sum(self.masses * np.abs(self.atoms) ** p) / self.total) ** (1.0 / p))

    def mean(self) -> float:
        return float(np.sum(self.masses * self.atoms) / self.total)

    def pushforward(self, fn: Callable) -> "DiscreteMeasure":
        return DiscreteMeasure(fn(self.atoms), self.masses, self.total)

    def shifted(self, m: float) -> "DiscreteMeasure":
        """Pushforward by ``x -> x + m``."""
        return DiscreteMeasure(self.atoms + m, self.masses, self.total)

    def merged(self, tol: float = 0.0) -> "DiscreteMeasure":
        """Combine atoms closer than ``tol``."""
        if self.atoms.size == 0:
            return self
        brk = np.concatenate([[True], np.diff(self.atoms) > tol])
        idx = np.cumsum(brk) - 1
        masses = np.bincount(idx, weights=self.masses)
        atoms = self.atoms[brk]
        return DiscreteMeasure(atoms, masses, self.total)

    def cdf(self, x) -> np.ndarray:
        c = np.concatenate([[0.0], np.cumsum(self.masses)])
        return c[np.searchsorted(self.atoms, x, side="right")]

    def to_json(self) -> dict:
        return {"atoms": self.atoms.tolist(), "masses": self.masses.tolist(), "total": self.total}

    @classmethod
    def from_json(cls, data: dict) -> "DiscreteMeasure":
        return cls(np.array(data["atoms"]), np.array(data["masses"]), data.get("total", 1.0))


def relative_spectral_measure(f1, f2, k: int = 1) -> DiscreteMeasure:
    """Atoms ``(w1(e_i) - w2(e_i)) / k`` over a joint basis, masses ``1/dim``.

    ``f1`` and ``f2`` are :class:`Filtration` objects on the same space, or
    weight arrays of filtrations diagonal in the same basis.
    """
    if isinstance(f1, Filtration) and isinstance(f2, Filtration):
        jb = joint_diagonalize(f1, f2)
        gaps = jb.w1 - jb.w2
    else:
        w1 = np.asarray(f1.weights if isinstance(f1, Filtration) else f1, float)
        w2 = np.asarray(f2.weights if isinstance(f2, Filtration) else f2, float)
        if w1.shape != w2.shape:
            raise ValueError("filtrations live on different spaces")
        gaps = w1 - w2
    return DiscreteMeasure.uniform(gaps / k)


def graded_spectral_measure(f1, f2, k: int) -> DiscreteMeasure:
    """Relative measure of two monomial graded filtrations in degree ``k``."""
    return relative_spectral_measure(f1.weights(k), f2.weights(k), k)


def wasserstein1(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """``int |F_mu - F_nu| dx`` for probability measures (exact)."""
    x = np.union1d(mu.atoms, nu.atoms)
    if x.size < 2:
        return 0.0
    diff = np.abs(mu.cdf(x[:-1]) / mu.total - nu.cdf(x[:-1]) / nu.total)
    return float(np.sum(diff * np.diff(x)))


def _abs_antiderivative(c: float, x):
    # d/dx of this is |x - c|
    d = np.asarray(x, float) - c
    return 0.5 * np.sign(d) * d * d


def wasserstein1_uniform(mu: DiscreteMeasure) -> float:
    """``W_1(mu, Lebesgue on [0, 1])`` in closed form."""
    mu_n = mu.masses / mu.total
    c_after = np.cumsum(mu_n)
    pts = np.union1d(mu.atoms, [0.0, 1.0])
    total = 0.0
    # left of the first point the CDF difference vanishes; right of the last too
    for a, b in zip(pts[:-1], pts[1:]):
        fmu = float(c_after[np.searchsorted(mu.atoms, a, side="right") - 1]) if a >= mu.atoms[0] else 0.0
        if b <= 0.0:
            total += fmu * (b - a)
        elif a >= 1.0:
            total += abs(fmu - 1.0) * (b - a)
        else:
            total += float(_abs_antiderivative(fmu, b) - _abs_antiderivative(fmu, a))
    return total


@dataclass(frozen=True)
class W1Trace:
    """Successive Wasserstein distances along a family of measures.

    Attributes
    ----------
    ks : ndarray
    successive : ndarray
        ``W_1(mu_{k_i}, mu_{k_{i+1}})``.
    to_reference : ndarray or None
        ``W_1(mu_k, reference)`` when a reference was supplied.
    cauchy : bool
        Successive distances in the last quarter are below ``tol``.
    """

    ks: np.ndarray
    successive: np.ndarray
    to_reference: np.ndarray | None
    cauchy: bool

    def rows(self):
        for i, k in enumerate(self.ks):
            row = {"k": int(k)}
            if i < self.successive.size:
                row["w1_next"] = float(self.successive[i])
            if self.to_reference is not None:
                row["w1_reference"] = float(self.to_reference[i])
            yield row


def weak_convergence_trace(family: Callable, ks: Iterable[int], reference: str | DiscreteMeasure | None = None,
                           tol: float = 0.05) -> W1Trace:
    """W1 diagnostics for ``k -> family(k)``.

    ``reference="uniform"`` compares with Lebesgue measure on ``[0, 1]``.
    """
    ks = np.asarray(list(ks), dtype=int)
    mus = [family(int(k)) for k in ks]
    succ = np.array([wasserstein1(a, b) for a, b in zip(mus, mus[1:])])
    ref = None
    if reference is not None:
        if isinstance(reference, str):
            if reference != "uniform":
                raise ValueError("unknown reference measure")
            ref = np.array([wasserstein1_uniform(m) for m in mus])
        else:
            ref = np.array([wasserstein1(m, reference) for m in mus])
    tail = succ[-max(1, succ.size // 4):] if succ.size else succ
    return W1Trace(ks, succ, ref, bool(np.all(tail <= tol)))


@dataclass(frozen=True)
class EndpointSlopes:
    algebraic: tuple
    analytic: tuple

    @property
    def gaps(self) -> tuple:
        return (abs(self.algebraic[0] - self.analytic[0]), abs(self.algebraic[1] - self.analytic[1]))


def _ray_reach(ray, t: float) -> float:
    """How far ``ray`` moves slopes in ``x`` by time ``t`` (``2 t sup|g'|``)."""
    dg = getattr(ray, "dg", None)
    if dg is None:
        return 2.0 * t
    y = np.linspace(0, 1, 1025)[1:-1]
    return 2.0 * t * float(np.max(np.abs(dg(y))))


def endpoint_slopes(f1, f2, k: int, ray1, ray2, t: float, x: np.ndarray | None = None) -> EndpointSlopes:
    """Largest and smallest atoms, algebraic and analytic.

    Algebraic: ``max/min (w1 - w2)/k`` in degree ``k`` for monomial graded
    filtrations.  Analytic: ``max/min log(|.|_{h2,t} / |.|_{h1,t}) / t``
    over ``x``, i.e. half the potential difference ``phi_1 - phi_2``.  The
    default ``x``-grid extends the base grid by the distance the rays move
    the potentials, so both ends of the moment interval are seen.
    """
    mu = graded_spectral_measure(f1, f2, k)
    h1, h2 = ray1.at(t), ray2.at(t)
    if x is None:
        reach = float(h1.x[-1]) + max(_ray_reach(ray1, t), _ray_reach(ray2, t))
        x = np.linspace(-reach, reach, 2 * h1.x.size)
    d = 0.5 * (h1.potential(x) - h2.potential(x)) / t
    return EndpointSlopes((float(mu.atoms.max()), float(mu.atoms.min())), (float(d.max()), float(d.min())))
