"""Dense complex linear algebra and a small subspace calculus.

Every subspace carries the tolerance it was computed with so that rank
decisions can be audited after the fact.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as spla

from .errors import (
    DimensionMismatch,
    NegativeEigenvalue,
    NotHermitian,
    RankDeficient,
)

__all__ = [
    "Tolerance",
    "Subspace",
    "default_tolerance",
    "as_matrix",
    "hermitian_sqrt",
    "kernel_space",
    "range_space",
    "subspace_intersect",
    "orthogonal_complement",
    "rank",
    "rank_sequence",
    "polar_unitary",
    "haar_unitary",
    "matrix_to_json",
    "matrix_from_json",
]


@dataclass(frozen=True)
class Tolerance:
    """Pair of cutoffs used throughout the package.

    ``rank_tol`` is a relative singular-value cutoff, ``eq_tol`` an absolute
    residual cutoff.
    """

    rank_tol: float = 1e-8
    eq_tol: float = 1e-9

    def __post_init__(self):
        for name in ("rank_tol", "eq_tol"):
            v = getattr(self, name)
            if not (0.0 < v <= 1e-2):
                raise ValueError(f"{name} must lie in (0, 1e-2], got {v!r}")


def default_tolerance() -> Tolerance:
    """Tolerances from ``CTRFN_TOL`` (``"rank,eq"`` or a single value) if set."""
    raw = os.environ.get("CTRFN_TOL")
    if not raw:
        return Tolerance()
    parts = [float(p) for p in raw.replace(";", ",").split(",") if p.strip()]
    if len(parts) == 1:
        return Tolerance(parts[0], parts[0])
    return Tolerance(parts[0], parts[1])


def as_matrix(a, rows=None, cols=None) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    m = np.atleast_2d(np.asarray(a, dtype=complex))
    if m.ndim != 2:
        raise ValueError("expected a 2-D array")
    if rows is not None and cols is not None:
        m = m.reshape(rows, cols)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


@dataclass(frozen=True)
class Subspace:
    """Orthonormal column frame of a subspace of ``C^ambient_dim``."""

    frame: np.ndarray
    tol: float = 1e-8
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def ambient_dim(self) -> int:
        return self.frame.shape[0]

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    @classmethod
    def zero(cls, ambient_dim: int, tol: float = 1e-8) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0), dtype=complex), tol)

    @classmethod
    def full(cls, ambient_dim: int, tol: float = 1e-8) -> "Subspace":
        return cls(np.eye(ambient_dim, dtype=complex), tol)

    @classmethod
    def span(cls, vectors, tol: float = 1e-8) -> "Subspace":
        """Orthonormal frame for the column span of ``vectors``."""
        return range_space(as_matrix(vectors), Tolerance(tol, default_tolerance().eq_tol))

    def projector(self) -> np.ndarray:
        return self.frame @ self.frame.conj().T

    def contains(self, other: "Subspace", tol: float | None = None) -> bool:
        tol = self.tol if tol is None else tol
        if other.dim == 0:
            return True
        resid = other.frame - self.frame @ (self.frame.conj().T @ other.frame)
        return bool(np.linalg.norm(resid, 2) <= tol)

    def same_as(self, other: "Subspace", tol: float | None = None) -> bool:
        tol = self.tol if tol is None else tol
        if self.dim != other.dim:
            return False
        return bool(np.linalg.norm(self.projector() - other.projector(), 2) <= tol)


def hermitian_sqrt(m, tol: Tolerance | None = None) -> np.ndarray:
    """Positive square root of a Hermitian positive semidefinite matrix.

    Eigenvalues in ``[-10 rank_tol, 0)`` are treated as roundoff and
    clamped to zero.
    """
    tol = tol or default_tolerance()
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"square matrix required, got {m.shape}")
    if m.size == 0:
        return m.copy()
    scale = max(1.0, np.linalg.norm(m, 2))
    if np.linalg.norm(m - m.conj().T, 2) > tol.eq_tol * scale:
        raise NotHermitian("matrix is not Hermitian within eq_tol")
    h = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(h)
    if w.min() < -10 * tol.rank_tol * scale:
        raise NegativeEigenvalue(f"min eigenvalue {w.min():.3e} is below -10*rank_tol")
    w = np.clip(w, 0.0, None)
    r = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (r + r.conj().T)


def _svd(m):
    if m.size == 0:
        return (np.zeros((m.shape[0], 0), complex), np.zeros(0),
                np.eye(m.shape[1], dtype=complex))
    return np.linalg.svd(m, full_matrices=True)


def rank(m, tol: Tolerance | None = None) -> int:
    """Numerical rank with the relative cutoff ``rank_tol * sigma_max``."""
    tol = tol or default_tolerance()
    m = as_matrix(m)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol.rank_tol * s[0]))


def kernel_space(m, tol: Tolerance | None = None, absolute: float | None = None) -> Subspace:
    """Orthonormal basis of the numerical kernel of ``m``.

    Singular directions with ``sigma <= rank_tol * ||m||`` count as kernel.
    ``absolute`` replaces the relative cutoff by a fixed one.
    """
    tol = tol or default_tolerance()
    m = as_matrix(m)
    n = m.shape[1]
    if m.shape[0] == 0 or n == 0:
        return Subspace(np.eye(n, dtype=complex), tol.rank_tol)
    _, s, vh = _svd(m)
    cut = absolute if absolute is not None else tol.rank_tol * (s[0] if s.size else 0.0)
    r = int(np.sum(s > cut))
    return Subspace(vh[r:].conj().T, tol.rank_tol if absolute is None else absolute)


def range_space(m, tol: Tolerance | None = None) -> Subspace:
    """Orthonormal basis of the numerical column range of ``m``."""
    tol = tol or default_tolerance()
    m = as_matrix(m)
    if m.size == 0:
        return Subspace.zero(m.shape[0], tol.rank_tol)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s[0] == 0.0:
        return Subspace.zero(m.shape[0], tol.rank_tol)
    r = int(np.sum(s > tol.rank_tol * s[0]))
    return Subspace(u[:, :r], tol.rank_tol)


def orthogonal_complement(u: Subspace, within: Subspace | None = None) -> Subspace:
    """``within ⊖ u`` (``within`` defaults to the whole ambient space)."""
    n = u.ambient_dim
    w = np.eye(n, dtype=complex) if within is None else within.frame
    if w.shape[1] == 0:
        return Subspace.zero(n, u.tol)
    rest = w - u.frame @ (u.frame.conj().T @ w)
    uu, s, _ = np.linalg.svd(rest, full_matrices=False)
    # singular values of the residual are ~1 on the complement, ~0 on u
    r = int(np.sum(s > 0.5))
    return Subspace(uu[:, :r], u.tol)


def subspace_intersect(u: Subspace, v: Subspace, tol: float | None = None) -> Subspace:
    """``U ∩ V`` as the kernel of the stacked complementary projections.

    ``tol`` is an absolute cutoff on the singular values of
    ``[I - P_U; I - P_V]``; it defaults to the larger subspace tolerance,
    floored at 1e-10.
    """
    if u.ambient_dim != v.ambient_dim:
        raise DimensionMismatch(f"ambient dims differ: {u.ambient_dim} vs {v.ambient_dim}")
    n = u.ambient_dim
    if u.dim == 0 or v.dim == 0:
        return Subspace.zero(n, max(u.tol, v.tol))
    cut = tol if tol is not None else max(u.tol, v.tol, 1e-10)
    eye = np.eye(n, dtype=complex)
    stacked = np.vstack([eye - u.projector(), eye - v.projector()])
    return kernel_space(stacked, absolute=cut)


def rank_sequence(n, kmax: int, tol: Tolerance | None = None) -> list[int]:
    """Ranks of ``N, N^2, ..., N^kmax``.

    The cutoff is relative to ``||N||`` (not to each power), so that a power
    that has collapsed to roundoff is reported as rank zero.
    """
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    tol = tol or default_tolerance()
    n = as_matrix(n)
    if n.shape[0] != n.shape[1]:
        raise DimensionMismatch("square matrix required")
    if n.size == 0:
        return [0] * kmax
    scale = max(np.linalg.norm(n, 2), 1.0)
    out = []
    p = np.eye(n.shape[0], dtype=complex)
    for _ in range(kmax):
        p = p @ n
        s = np.linalg.svd(p, compute_uv=False)
        out.append(int(np.sum(s > tol.rank_tol * scale ** len(out) * scale)))
    # enforce monotonicity against roundoff in long products
    for i in range(1, len(out)):
        out[i] = min(out[i], out[i - 1])
    return out


def polar_unitary(m, tol: Tolerance | None = None) -> np.ndarray:
    """Unitary factor ``U`` of the polar decomposition ``M = U P``."""
    tol = tol or default_tolerance()
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch("square matrix required")
    if m.size == 0:
        return m.copy()
    s = np.linalg.svd(m, compute_uv=False)
    if s[-1] <= tol.rank_tol:
        raise RankDeficient(f"sigma_min = {s[-1]:.3e} <= rank_tol")
    u, _ = spla.polar(m, side="right")
    return u


def procrustes_unitary(m) -> np.ndarray:
    """Closest unitary to ``m`` (allows rank deficiency)."""
    m = as_matrix(m)
    if m.size == 0:
        return m.copy()
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``n x n`` unitary."""
    if n == 0:
        return np.zeros((0, 0), complex)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def matrix_from_json(obj) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    entries = obj["entries"]
    if len(entries) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, got {len(entries)}")
    vals = [complex(e[0], e[1]) if isinstance(e, (list, tuple)) else complex(e) for e in entries]
    return as_matrix(np.array(vals, dtype=complex).reshape(rows, cols) if vals
                     else np.zeros((rows, cols), complex))
