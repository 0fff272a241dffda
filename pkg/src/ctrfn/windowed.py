"""Operators on ``⊕_n L_n`` that are a fibre-wise identity shift outside a window.

Fibre ``L_n`` has dimension ``left`` for ``n <= -1`` and ``right`` for
``n >= 0`` unless overridden inside the window.  Outside the window the
operator maps ``L_n`` identically onto ``L_{n+1}``; inside it is given by
explicit blocks.  Because everything interesting happens on finitely many
fibres, images of finitely supported vectors and both defect grams are
computed exactly, without truncation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import NotContraction, RadiusTooSmall
from .numlin import Tolerance, as_matrix, default_tolerance, matrix_from_json, matrix_to_json

__all__ = [
    "FiberProfile",
    "WindowVector",
    "WindowedShiftOperator",
    "Truncation",
    "apply",
    "adjoint_apply",
    "defect_grams",
    "truncate",
    "bilateral_shift",
    "unilateral_shift",
    "co_shift",
    "finite_operator",
    "flip_adjoint",
    "conjugate_fiberwise",
]


@dataclass(frozen=True)
class FiberProfile:
    left: int
    right: int
    overrides: tuple = ()

    def __post_init__(self):
        if self.left < 0 or self.right < 0:
            raise ValueError("fibre dimensions must be nonnegative")
        if self.left == 0 and self.right == 0 and not any(d for _, d in self.overrides):
            raise ValueError("profile has no nonzero fibre")
        object.__setattr__(self, "overrides", tuple(sorted((int(n), int(d)) for n, d in self.overrides)))

    def dim(self, n: int) -> int:
        for k, d in self.overrides:
            if k == n:
                return d
        return self.left if n <= -1 else self.right


class WindowVector:
    """Finitely supported element (or block of elements) of ``⊕ L_n``.

    ``coords`` maps a fibre index to an array of shape ``(dim_n,)`` or
    ``(dim_n, k)`` for a block of ``k`` vectors.
    """

    __slots__ = ("coords",)

    def __init__(self, coords: Mapping[int, np.ndarray] | None = None):
        self.coords = {int(n): np.asarray(v, dtype=complex) for n, v in (coords or {}).items()}

    @classmethod
    def basis(cls, n: int, j: int, dim: int) -> "WindowVector":
        v = np.zeros(dim, complex)
        v[j] = 1.0
        return cls({n: v})

    @property
    def support(self):
        live = [n for n, v in self.coords.items() if v.size and np.any(v != 0)]
        if not live:
            return None
        return min(live), max(live)

    def _add(self, n, v):
        if n in self.coords:
            self.coords[n] = self.coords[n] + v
        else:
            self.coords[n] = np.array(v, dtype=complex)

    def __add__(self, other):
        out = WindowVector(self.coords)
        for n, v in other.coords.items():
            out._add(n, v)
        return out

    def __sub__(self, other):
        return self + other * (-1.0)

    def __mul__(self, s):
        return WindowVector({n: v * s for n, v in self.coords.items()})

    __rmul__ = __mul__

    def inner(self, other) -> complex:
        """``<self, other>``, linear in ``self`` and conjugate-linear in ``other``."""
        total = 0j
        for n, v in self.coords.items():
            w = other.coords.get(n)
            if w is not None:
                total += np.vdot(w, v)
        return total

    def norm(self) -> float:
        return float(np.sqrt(sum(np.vdot(v, v).real for v in self.coords.values())))

    def __repr__(self):
        return f"WindowVector(support={self.support})"


@dataclass(frozen=True, eq=False)
class WindowedShiftOperator:
    profile: FiberProfile
    window: tuple
    blocks: Mapping[int, tuple] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        lo, hi = int(self.window[0]), int(self.window[1])
        if lo > hi:
            raise ValueError("window must satisfy lo <= hi")
        object.__setattr__(self, "window", (lo, hi))
        clean = {}
        for n, lst in self.blocks.items():
            n = int(n)
            if not lo <= n <= hi:
                raise ValueError(f"block source {n} outside window {self.window}")
            entries = []
            for t, b in lst:
                b = as_matrix(b) if np.size(b) else np.zeros((self.profile.dim(int(t)), self.profile.dim(n)), complex)
                if b.shape != (self.profile.dim(int(t)), self.profile.dim(n)):
                    raise ValueError(
                        f"block {n}->{t} has shape {b.shape}, expected "
                        f"{(self.profile.dim(int(t)), self.profile.dim(n))}")
                b.setflags(write=False)
                entries.append((int(t), b))
            clean[n] = tuple(entries)
        object.__setattr__(self, "blocks", clean)
        for k, _ in self.profile.overrides:
            if not lo <= k <= hi:
                raise ValueError(f"fibre override at {k} lies outside the window")
        for n in set(range(lo - 2, hi + 2)) | {-2, -1, 0}:
            if self.in_window(n):
                continue
            dn, dm = self.profile.dim(n), self.profile.dim(n + 1)
            if dn and dn != dm:
                raise ValueError(f"identity shift L_{n} -> L_{n+1} undefined ({dn} vs {dm})")
        incoming: dict[int, list] = {}
        for n, lst in clean.items():
            for t, b in lst:
                incoming.setdefault(t, []).append((n, b))
        object.__setattr__(self, "_incoming", {t: tuple(v) for t, v in incoming.items()})
        jumps = [t - n for n, lst in clean.items() for t, _ in lst] or [1]
        object.__setattr__(self, "max_jump", max(1, max(jumps)))
        object.__setattr__(self, "min_jump", min(1, min(jumps)))

    # structural queries -------------------------------------------------
    def in_window(self, n: int) -> bool:
        return self.window[0] <= n <= self.window[1]

    def dim(self, n: int) -> int:
        return self.profile.dim(n)

    def targets(self, n: int):
        if self.in_window(n):
            return [t for t, _ in self.blocks.get(n, ())]
        return [n + 1] if self.dim(n) else []

    def sources(self, t: int):
        out = [n for n, _ in self._incoming.get(t, ())]
        if not self.in_window(t - 1) and self.dim(t - 1):
            out.append(t - 1)
        return out

    @property
    def reach(self) -> int:
        return max(self.max_jump, -self.min_jump, 1)

    # JSON ---------------------------------------------------------------
    def to_json(self) -> dict:
        out = {
            "profile": {"left": self.profile.left, "right": self.profile.right},
            "window": list(self.window),
            "blocks": [
                {"from": n, "to": t, "matrix": matrix_to_json(b)}
                for n in sorted(self.blocks) for t, b in self.blocks[n]
            ],
        }
        if self.profile.overrides:
            out["profile"]["overrides"] = [list(p) for p in self.profile.overrides]
        return out

    @classmethod
    def from_json(cls, obj) -> "WindowedShiftOperator":
        p = obj["profile"]
        prof = FiberProfile(int(p["left"]), int(p["right"]), tuple(tuple(x) for x in p.get("overrides", ())))
        lo, hi = obj["window"]
        blocks: dict[int, list] = {n: [] for n in range(int(lo), int(hi) + 1)}
        for b in obj.get("blocks", []):
            blocks.setdefault(int(b["from"]), []).append((int(b["to"]), matrix_from_json(b["matrix"])))
        return cls(prof, (int(lo), int(hi)), blocks)


def apply(op: WindowedShiftOperator, x: WindowVector) -> WindowVector:
    """Exact image ``T x``."""
    out = WindowVector()
    for n, v in x.coords.items():
        if op.in_window(n):
            for t, b in op.blocks.get(n, ()):
                out._add(t, b @ v)
        elif op.dim(n):
            out._add(n + 1, v)
    return out


def adjoint_apply(op: WindowedShiftOperator, x: WindowVector) -> WindowVector:
    """Exact image ``T* x``."""
    out = WindowVector()
    for t, v in x.coords.items():
        for n, b in op._incoming.get(t, ()):
            out._add(n, b.conj().T @ v)
        if not op.in_window(t - 1) and op.dim(t - 1):
            out._add(t - 1, v)
    return out


def _closure(op, seed, forward: bool):
    """Smallest fibre set containing ``seed`` on which the Gram of ``T`` (or ``T*``) is closed."""
    fibres = set(seed)
    changed = True
    while changed:
        changed = False
        for n in list(fibres):
            out = op.targets(n) if forward else op.sources(n)
            for t in out:
                back = op.sources(t) if forward else op.targets(t)
                for s in back:
                    if s not in fibres and op.dim(s):
                        fibres.add(s)
                        changed = True
    return sorted(f for f in fibres if op.dim(f))


def _fibre_basis(op, fibres):
    cols = []
    for n in fibres:
        for j in range(op.dim(n)):
            cols.append((n, j))
    return cols


def _gram_on(op, fibres, forward: bool):
    """``I - T*T`` (forward) or ``I - TT*`` on the listed fibres, exactly."""
    cols = _fibre_basis(op, fibres)
    images = []
    for n, j in cols:
        e = WindowVector.basis(n, j, op.dim(n))
        images.append(apply(op, e) if forward else adjoint_apply(op, e))
    k = len(cols)
    g = np.eye(k, dtype=complex)
    for a in range(k):
        for b in range(a, k):
            ip = images[b].inner(images[a])  # <T e_b, T e_a> = (T*T)_{ab}
            g[a, b] -= ip
            if a != b:
                g[b, a] -= np.conj(ip)
    return g, cols


@dataclass(frozen=True)
class DefectGram:
    """Finite Hermitian block of a defect square together with its support."""

    matrix: np.ndarray
    fibres: tuple
    coords: tuple  # (fibre, index) for every row

    def embed(self, fibre_offsets, size):
        """Place the block into a dense ``size x size`` coordinate space."""
        m = np.zeros((size, size), complex)
        idx = [fibre_offsets[n] + j for n, j in self.coords]
        m[np.ix_(idx, idx)] = self.matrix
        return m


def _trim(g, cols, tol=None):
    # roundoff rows (e.g. D_{A*}^2 + A A^* - I) are not part of the support
    tol = 64 * np.finfo(float).eps * max(1.0, np.abs(g).max(initial=0.0)) if tol is None else tol
    keep_fibres = sorted({n for (n, _), row in zip(cols, g) if np.any(np.abs(row) > tol)})
    idx = [i for i, (n, _) in enumerate(cols) if n in keep_fibres]
    return DefectGram(g[np.ix_(idx, idx)], tuple(keep_fibres), tuple(cols[i] for i in idx))


def defect_grams(op: WindowedShiftOperator, tol: Tolerance | None = None):
    """Return ``(I - T*T, I - TT*)`` as finite blocks with their exact fibre supports.

    Raises :class:`NotContraction` if either block has an eigenvalue below
    ``-eq_tol`` (outside the window ``T`` is an isometry, so this is an
    exact contraction test).
    """
    tol = tol or default_tolerance()
    lo, hi = op.window
    seed = set(range(lo, hi + 1))
    seed |= {t - 1 for n in range(lo, hi + 1) for t in op.targets(n) if not op.in_window(t - 1)}
    dfib = _closure(op, seed, forward=True)
    g, cols = _gram_on(op, dfib, forward=True)
    cseed = {t for n in range(lo, hi + 1) for t in op.targets(n)}
    cseed |= set(range(lo, hi + 2))
    cseed |= {t for t in (0, lo, hi + 1, hi + 2) if op.dim(t) and not op.dim(t - 1)}
    cfib = _closure(op, cseed, forward=False)
    gs, cols_s = _gram_on(op, cfib, forward=False)
    for m in (g, gs):
        if m.size and np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() < -tol.eq_tol:
            raise NotContraction("operator is not a contraction (defect gram has a negative eigenvalue)")
    return _trim(g, cols), _trim(gs, cols_s)


@dataclass(frozen=True)
class Truncation:
    """Dense compression of an operator to the fibres ``-radius .. radius``."""

    matrix: np.ndarray
    radius: int
    offsets: dict  # fibre -> first coordinate
    dims: dict  # fibre -> fibre dimension
    reach_forward: int
    reach_backward: int

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def fibre_slice(self, n: int) -> slice:
        return slice(self.offsets[n], self.offsets[n] + self.dims[n])

    def coords_of(self, lo: int, hi: int) -> np.ndarray:
        """Coordinate indices of fibres ``lo..hi`` clipped to the truncation."""
        lo, hi = max(lo, -self.radius), min(hi, self.radius)
        idx = [i for n in range(lo, hi + 1) for i in range(self.offsets[n], self.offsets[n] + self.dims[n])]
        return np.array(idx, dtype=int)

    def interior(self, depth: int):
        """Fibres on which ``T^k`` and ``T*^k`` agree with the truncation for ``k <= depth``."""
        lo = -self.radius + depth * self.reach_backward
        hi = self.radius - depth * self.reach_forward
        return lo, hi

    def to_dense(self, x: WindowVector) -> np.ndarray:
        sup = x.support
        sample = next(iter(x.coords.values()), np.zeros(0))
        shape = (self.size,) + sample.shape[1:]
        out = np.zeros(shape, complex)
        if sup is None:
            return out
        if sup[0] < -self.radius or sup[1] > self.radius:
            raise RadiusTooSmall(f"vector support {sup} exceeds radius {self.radius}")
        for n, v in x.coords.items():
            if self.dims.get(n, 0):
                out[self.fibre_slice(n)] = v
        return out

    def from_dense(self, v: np.ndarray) -> WindowVector:
        return WindowVector({n: v[self.fibre_slice(n)] for n in self.offsets if self.dims[n]})


def truncate(op: WindowedShiftOperator, radius: int) -> Truncation:
    """Compression of ``op`` to fibres ``-radius..radius``."""
    lo, hi = op.window
    need = max(abs(lo), abs(hi), *(abs(t) for n in op.blocks for t, _ in op.blocks[n]), 0) + 1
    if radius < need:
        raise RadiusTooSmall(f"radius {radius} < {need} required by the window and block targets")
    fibres = list(range(-radius, radius + 1))
    offsets, dims, pos = {}, {}, 0
    for n in fibres:
        offsets[n], dims[n] = pos, op.dim(n)
        pos += dims[n]
    m = np.zeros((pos, pos), complex)
    for n in fibres:
        if not dims[n]:
            continue
        cs = slice(offsets[n], offsets[n] + dims[n])
        if op.in_window(n):
            for t, b in op.blocks.get(n, ()):
                if -radius <= t <= radius:
                    m[offsets[t]:offsets[t] + dims[t], cs] += b
        elif n + 1 <= radius:
            m[offsets[n + 1]:offsets[n + 1] + dims[n + 1], cs] += np.eye(dims[n])
    return Truncation(m, radius, offsets, dims, op.max_jump, max(1, -op.min_jump))


# ---------------------------------------------------------------------------
# elementary operators

def bilateral_shift(dim: int = 1) -> WindowedShiftOperator:
    return WindowedShiftOperator(FiberProfile(dim, dim), (0, 0), {0: [(1, np.eye(dim))]}, "bilateral")


def unilateral_shift(dim: int = 1) -> WindowedShiftOperator:
    """Shift of multiplicity ``dim`` on ``⊕_{n>=0} L_n``."""
    return WindowedShiftOperator(FiberProfile(0, dim), (-1, -1), {-1: []}, "unilateral")


def co_shift(dim: int = 1) -> WindowedShiftOperator:
    """Adjoint of a unilateral shift, living on ``⊕_{n<=-1} L_n``."""
    return WindowedShiftOperator(FiberProfile(dim, 0), (-1, -1), {-1: []}, "co_shift")


def finite_operator(m, name: str = "finite") -> WindowedShiftOperator:
    """A matrix on ``C^d`` placed in a single fibre, with no shift part."""
    m = as_matrix(m)
    d = m.shape[0]
    return WindowedShiftOperator(FiberProfile(0, 0, ((0, d),)), (0, 0), {0: [(0, m)]}, name)


def flip_adjoint(op: WindowedShiftOperator, name: str = "") -> WindowedShiftOperator:
    """``T*`` re-indexed by ``n -> -n-1`` so that it is again a shift outside a window."""
    lo, hi = op.window
    new_lo = -(hi + 1) - 1 - (op.max_jump - 1)
    new_hi = -lo - 1 + max(0, -op.min_jump)
    new_lo = min(new_lo, new_hi)
    prof = FiberProfile(op.profile.right, op.profile.left,
                        tuple((-n - 1, d) for n, d in op.profile.overrides))
    blocks: dict[int, list] = {k: [] for k in range(new_lo, new_hi + 1)}
    # adjoint maps L_t -> L_n with B^H for each block n -> t; in new indices t' = -t-1 -> n' = -n-1
    for n, lst in op.blocks.items():
        for t, b in lst:
            src = -t - 1
            if not new_lo <= src <= new_hi:
                raise ValueError("flip window does not cover a block")
            blocks[src].append((-n - 1, b.conj().T))
    # identity part of the original that becomes window-internal
    for k in range(new_lo, new_hi + 1):
        t = -k - 1  # original fibre whose adjoint image lives at k
        n = t - 1
        if not op.in_window(n) and op.dim(n):
            blocks[k].append((-n - 1, np.eye(op.dim(n))))
    # fibres at the window edges that only shift identically belong outside the window
    def plain(k):
        lst = blocks[k]
        return (len(lst) == 1 and lst[0][0] == k + 1 and prof.dim(k) == prof.dim(k + 1)
                and np.allclose(lst[0][1], np.eye(prof.dim(k)), rtol=0, atol=0))

    while new_lo < new_hi and plain(new_lo):
        del blocks[new_lo]
        new_lo += 1
    while new_hi > new_lo and plain(new_hi):
        del blocks[new_hi]
        new_hi -= 1
    return WindowedShiftOperator(prof, (new_lo, new_hi), blocks, name or f"flip({op.name})")


def conjugate_fiberwise(op: WindowedShiftOperator, u_left, u_right) -> WindowedShiftOperator:
    """``U T U*`` for ``U`` acting as ``u_left`` on fibres ``n<=-1`` and ``u_right`` on ``n>=0``."""
    if op.profile.overrides:
        raise ValueError("fibre-wise conjugation needs a profile without overrides")
    ul, ur = as_matrix(u_left), as_matrix(u_right)

    def u(n):
        return ul if n <= -1 else ur

    blocks = {n: [(t, u(t) @ b @ u(n).conj().T) for t, b in lst] for n, lst in op.blocks.items()}
    return WindowedShiftOperator(op.profile, op.window, blocks, op.name)

