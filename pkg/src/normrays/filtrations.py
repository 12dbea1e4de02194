"""Filtrations of finite-dimensional complex vector spaces.

A filtration is stored as a weighted basis ``(v_i, w_i)`` with
``F^lam = span{v_i : w_i >= lam}``.  The canonical form keeps weights
non-increasing and the basis orthonormal for the standard inner product,
with the flag of subspaces preserved.  The associated non-Archimedean norm
is ``chi(s) = exp(-w(s))`` where ``w(s)`` is the largest ``lam`` with
``s in F^lam``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .hermlab import multi_indices, p_mean, sym_power_matrix

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10
WEIGHT_TOL = 1e-12


def _orth_extend(q: np.ndarray, cand: np.ndarray, tol: float = RANK_TOL):
    """Orthonormal vectors completing ``span(q)`` to ``span(q, cand)``.

    Returns ``(new, coeffs)`` where ``new`` are orthonormal vectors
    orthogonal to ``q`` and ``coeffs`` expresses chosen directions inside
    ``span(cand)`` (``cand @ coeffs`` lies in ``span(cand)`` and its part
    orthogonal to ``q`` spans ``new``).
    """
    n = cand.shape[0]
    if cand.shape[1] == 0:
        return np.zeros((n, 0), complex), np.zeros((0, 0), complex)
    proj = cand - q @ (q.conj().T @ cand) if q.shape[1] else cand.copy()
    scale = max(1.0, np.linalg.norm(cand, 2))
    u, s, vh = np.linalg.svd(proj, full_matrices=False)
    r = int(np.sum(s > tol * scale))
    return u[:, :r], vh[:r].conj().T


@dataclass(frozen=True, eq=False)
class Filtration:
    """Weighted basis representation of a filtration.

    Parameters
    ----------
    vectors : ndarray, shape (n, n)
        Columns form a basis of ``V``.
    weights : ndarray, shape (n,)
        Weight of each column.

    Use :meth:`from_generators` to build the canonical form from arbitrary
    (possibly redundant) weighted generators.
    """

    vectors: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.array(self.vectors, dtype=complex))
        w = np.array(self.weights, dtype=float).ravel()
        if v.shape[0] != v.shape[1] or v.shape[1] != w.size:
            raise ValueError("need a square basis matrix with one weight per column")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.linalg.matrix_rank(v, tol=RANK_TOL * max(1.0, np.linalg.norm(v, 2))) < v.shape[0]:
            raise ValueError("vectors are not a basis")
        order = np.argsort(-w, kind="stable")
        v, w = v[:, order], w[order]
        # canonical form: orthonormal basis adapted to the flag
        q, r = np.linalg.qr(v)
        phase = np.diag(r) / np.abs(np.diag(r))
        q = q * phase
        q.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "vectors", q)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_generators(cls, gens, weights) -> "Filtration":
        """Filtration generated by weighted vectors.

        ``F^lam`` is the span of the generators with weight ``>= lam``;
        generators already in the span of higher-weight ones are absorbed.
        """
        g = np.atleast_2d(np.asarray(gens, dtype=complex))
        w = np.asarray(weights, dtype=float).ravel()
        if g.shape[1] != w.size:
            raise ValueError("one weight per generator column")
        n = g.shape[0]
        q = np.zeros((n, 0), complex)
        out_w: list[float] = []
        for lam in np.unique(w)[::-1]:
            cand = g[:, np.abs(w - lam) <= WEIGHT_TOL]
            new, _ = _orth_extend(q, cand)
            q = np.hstack([q, new])
            out_w.extend([lam] * new.shape[1])
        if q.shape[1] < n:
            raise ValueError("generators do not span V (filtration must exhaust V)")
        return cls(q, np.array(out_w))

    @classmethod
    def diagonal(cls, weights) -> "Filtration":
        """Filtration diagonal in the reference basis."""
        w = np.asarray(weights, dtype=float)
        return cls(np.eye(w.size), w)

    @property
    def dim(self) -> int:
        return self.weights.size

    @property
    def jumps(self) -> np.ndarray:
        """Distinct weights, decreasing."""
        return np.unique(self.weights)[::-1]

    def level_dim(self, lam: float) -> int:
        return int(np.sum(self.weights >= lam - WEIGHT_TOL))

    def subspace(self, lam: float) -> np.ndarray:
        """Orthonormal basis (columns) of ``F^lam``."""
        return self.vectors[:, : self.level_dim(lam)]

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "vectors": [[[float(z.real), float(z.imag)] for z in row] for row in self.vectors],
            "weights": [float(x) for x in self.weights],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Filtration":
        vec = np.array([[complex(a, b) for a, b in row] for row in data["vectors"]])
        weights = []
        for x in data["weights"]:
            if isinstance(x, (list, tuple)):
                weights.append(x[0] / x[1])
            else:
                weights.append(float(x))
        return cls(vec, np.array(weights))


def jumping_numbers(f: Filtration) -> np.ndarray:
    """``e(j) = sup{t : dim F^t >= j}`` for ``j = 1..n``, non-increasing."""
    return f.weights.copy()


def weight(f: Filtration, s) -> float:
    """``w(s) = sup{lam : s in F^lam}``; ``+inf`` for ``s = 0``."""
    s = np.asarray(s, dtype=complex)
    ns = np.linalg.norm(s)
    if ns <= 1e-300:
        return math.inf
    coeffs = f.vectors.conj().T @ s
    support = np.nonzero(np.abs(coeffs) > RANK_TOL * ns)[0]
    if support.size == 0:
        return math.inf
    return float(f.weights[support.max()])


def chi(f: Filtration, s) -> float:
    """Non-Archimedean norm ``exp(-w(s))``, zero at ``s = 0``."""
    w = weight(f, s)
    return 0.0 if math.isinf(w) else math.exp(-w)


def _intersect(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis of ``span(a) ∩ span(b)`` for orthonormal ``a``, ``b``."""
    n = a.shape[0]
    if a.shape[1] == 0 or b.shape[1] == 0:
        return np.zeros((n, 0), complex)
    u, s, vh = np.linalg.svd(a.conj().T @ b)
    r = int(np.sum(s > 1.0 - tol))
    return a @ u[:, :r]


@dataclass(frozen=True)
class JointBasis:
    """Basis adapted to two filtrations at once.

    Attributes
    ----------
    vectors : ndarray, shape (n, n)
    w1, w2 : ndarray
        Weights of each basis vector for the two filtrations.
    certificate : dict
        ``(a, b) -> dim(F1^a ∩ F2^b)`` for all pairs of jumping values.
    """

    vectors: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    certificate: dict


def joint_diagonalize(f1: Filtration, f2: Filtration) -> JointBasis:
    """Basis ``e`` adapted to both filtrations.

    For each jump ``a`` of ``F1`` (decreasing) and each jump ``b`` of
    ``F2`` (decreasing), vectors of ``F1^a ∩ F2^b`` are added until the
    chosen set spans ``F1^{>a} + F1^a ∩ F2^b``.  The resulting basis
    satisfies ``dim(F1^a ∩ F2^b) = #{i : w1(e_i) >= a, w2(e_i) >= b}``,
    which is checked for every pair of jumps.
    """
    if f1.dim != f2.dim:
        raise ValueError("dimension mismatch")
    n = f1.dim
    chosen = np.zeros((n, 0), complex)
    q = np.zeros((n, 0), complex)  # orthonormal basis of span(chosen)
    w1: list[float] = []
    w2: list[float] = []
    for a in f1.jumps:
        if q.shape[1] == n:
            break
        fa = f1.subspace(a)
        if q.shape[1] and np.linalg.norm(fa - q @ (q.conj().T @ fa)) <= RANK_TOL * max(1, fa.shape[1]):
            continue  # F1^a is already spanned
        for b in f2.jumps:
            inter = _intersect(fa, f2.subspace(b))
            if inter.shape[1] == 0:
                continue
            new_q, coeffs = _orth_extend(q, inter)
            if new_q.shape[1] == 0:
                continue
            vecs = inter @ coeffs
            vecs = vecs / np.linalg.norm(vecs, axis=0)
            chosen = np.hstack([chosen, vecs])
            q = np.hstack([q, new_q])
            w1.extend([a] * vecs.shape[1])
            w2.extend([b] * vecs.shape[1])
    w1a, w2a = np.array(w1), np.array(w2)
    if chosen.shape[1] != n:
        raise RuntimeError(f"joint basis has {chosen.shape[1]} vectors, expected {n}")
    cert = {}
    for a in f1.jumps:
        for b in f2.jumps:
            d = _intersect(f1.subspace(a), f2.subspace(b)).shape[1]
            count = int(np.sum((w1a >= a - WEIGHT_TOL) & (w2a >= b - WEIGHT_TOL)))
            if d != count:
                raise RuntimeError(
                    f"dimension certificate failed at ({a}, {b}): dim {d} vs count {count}"
                )
            cert[(float(a), float(b))] = d
    return JointBasis(chosen, w1a, w2a, cert)


def dp_filtrations(f1: Filtration, f2: Filtration, p: float = 2.0) -> float:
    """Spectral distance: p-mean of weight gaps on a joint basis."""
    jb = joint_diagonalize(f1, f2)
    return p_mean(jb.w1 - jb.w2, p)


def sym_filtration(f: Filtration, l: int) -> Filtration:
    """Induced filtration on ``Sym^l V``; monomials carry summed weights.

    Coordinates are the monomials of the reference basis, ordered as in
    :func:`normrays.hermlab.multi_indices`.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    if l == 1:
        return f
    mons = multi_indices(f.dim, l)
    gens = sym_power_matrix(f.vectors, l)
    w = np.array([float(np.dot(alpha, f.weights)) for alpha in mons])
    return Filtration.from_generators(gens, w)


def tensor_filtration(f: Filtration, g: Filtration) -> Filtration:
    """Filtration on ``V (x) W``; elementary tensors of adapted bases add weights."""
    gens = np.kron(f.vectors, g.vectors)
    w = (f.weights[:, None] + g.weights[None, :]).ravel()
    return Filtration.from_generators(gens, w)


def shift_scale(f: Filtration, r: float = 1.0, c: float = 0.0) -> Filtration:
    """Filtration with weights ``r * w + c``."""
    if r <= 0:
        raise ValueError("scale r must be positive")
    return Filtration(f.vectors, r * f.weights + c)


def random_filtration(n: int, rng: np.random.Generator, weights=None, integer: bool = False,
                      spread: float = 2.0) -> Filtration:
    """Random filtration with a Haar-random adapted basis."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if weights is None:
        if integer:
            weights = rng.integers(-int(spread), int(spread) + 1, n).astype(float)
        else:
            weights = rng.uniform(-spread, spread, n)
    return Filtration(z, np.asarray(weights, dtype=float))
