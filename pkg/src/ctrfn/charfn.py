"""Defect spaces and the characteristic function of a windowed contraction.

``Theta_T(z) = -T + sum_{k>=1} z^k D_{T*} T*^{k-1} D_T`` restricted to the
defect space of ``T``.  Matrices are expressed in stored orthonormal frames of
the two defect spaces, so results are meaningful only up to coincidence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, OutsideDisk
from .numlin import (
    Subspace,
    Tolerance,
    default_tolerance,
    matrix_from_json,
    matrix_to_json,
)
from .windowed import (
    WindowVector,
    WindowedShiftOperator,
    adjoint_apply,
    apply,
    defect_grams,
    truncate,
)

__all__ = [
    "MatrixPolynomial",
    "DefectData",
    "AtLeast",
    "defect_data",
    "theta_at",
    "theta_coeffs",
    "poly_degree",
    "in_disk_spectrum",
    "MAX_BUDGET",
]

MAX_BUDGET = 4096


@dataclass(frozen=True, eq=False)
class MatrixPolynomial:
    """``Theta_0 + Theta_1 z + ... + Theta_n z^n`` with common shape ``cod x dom``."""

    coeffs: tuple
    dom_dim: int
    cod_dim: int

    def __post_init__(self):
        cs = tuple(np.asarray(c, dtype=complex).reshape(self.cod_dim, self.dom_dim) for c in self.coeffs)
        if not cs:
            cs = (np.zeros((self.cod_dim, self.dom_dim), complex),)
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def from_coeffs(cls, coeffs, tol: Tolerance | None = None, trim: bool = True) -> "MatrixPolynomial":
        """Build from a coefficient list, dropping trailing coefficients below ``rank_tol * max``."""
        tol = tol or default_tolerance()
        cs = [np.atleast_2d(np.asarray(c, dtype=complex)) for c in coeffs]
        if not cs:
            raise ValueError("need at least one coefficient")
        shape = cs[0].shape
        if any(c.shape != shape for c in cs):
            raise ValueError("coefficients must share dimensions")
        if trim:
            norms = [np.linalg.norm(c, 2) if c.size else 0.0 for c in cs]
            cut = tol.rank_tol * max(max(norms), 0.0)
            while len(cs) > 1 and norms[len(cs) - 1] <= cut:
                cs.pop()
        return cls(tuple(cs), shape[1], shape[0])

    @classmethod
    def scalar(cls, *coeffs) -> "MatrixPolynomial":
        return cls(tuple(np.array([[c]], dtype=complex) for c in coeffs), 1, 1)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z: complex) -> np.ndarray:
        out = np.zeros((self.cod_dim, self.dom_dim), complex)
        for c in reversed(self.coeffs):
            out = out * z + c
        return out

    def padded(self, n: int) -> list:
        """Coefficients ``0..n`` with zero padding."""
        zero = np.zeros((self.cod_dim, self.dom_dim), complex)
        return [self.coeffs[k] if k < len(self.coeffs) else zero for k in range(n + 1)]

    def to_json(self) -> dict:
        return {"dom": self.dom_dim, "cod": self.cod_dim,
                "coeffs": [matrix_to_json(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj) -> "MatrixPolynomial":
        dom, cod = int(obj["dom"]), int(obj["cod"])
        cs = [matrix_from_json(c) if c["rows"] * c["cols"] else np.zeros((cod, dom), complex)
              for c in obj["coeffs"]]
        return cls(tuple(cs), dom, cod)


@dataclass(frozen=True)
class AtLeast:
    """Degree not certified; it is at least ``n``."""

    n: int


@dataclass(frozen=True, eq=False)
class DefectData:
    """Defect operators on their exact fibre supports and orthonormal bases of their ranges.

    ``DT_frame`` lives in the coordinates ``DT_coords`` (pairs ``(fibre, index)``),
    likewise for the starred data.
    """

    DT_op: np.ndarray
    DTstar_op: np.ndarray
    DT_frame: Subspace
    DTstar_frame: Subspace
    DT_coords: tuple
    DTstar_coords: tuple

    @property
    def dom_dim(self) -> int:
        return self.DT_frame.dim

    @property
    def cod_dim(self) -> int:
        return self.DTstar_frame.dim

    def dt_vectors(self) -> WindowVector:
        """``D_T`` applied to the frame of the defect space, as a block vector."""
        return _scatter(self.DT_op @ self.DT_frame.frame, self.DT_coords)

    def dt_frame_vectors(self) -> WindowVector:
        return _scatter(self.DT_frame.frame, self.DT_coords)

    def dtstar_frame_vectors(self) -> WindowVector:
        return _scatter(self.DTstar_frame.frame, self.DTstar_coords)

    def dtstar_generators(self) -> WindowVector:
        """``D_{T*}`` applied to the starred frame."""
        return _scatter(self.DTstar_op @ self.DTstar_frame.frame, self.DTstar_coords)

    def project_star(self, x: WindowVector, k: int) -> np.ndarray:
        """``F*^H D_{T*} x`` for a block vector ``x`` of ``k`` columns."""
        return self.DTstar_frame.frame.conj().T @ (self.DTstar_op @ _gather(x, self.DTstar_coords, k))


def _scatter(mat: np.ndarray, coords) -> WindowVector:
    k = mat.shape[1]
    out: dict[int, np.ndarray] = {}
    dims: dict[int, int] = {}
    for n, j in coords:
        dims[n] = max(dims.get(n, 0), j + 1)
    for n, d in dims.items():
        out[n] = np.zeros((d, k), complex)
    for row, (n, j) in enumerate(coords):
        out[n][j] = mat[row]
    return WindowVector(out)


def _gather(x: WindowVector, coords, k: int) -> np.ndarray:
    out = np.zeros((len(coords), k), complex)
    for row, (n, j) in enumerate(coords):
        v = x.coords.get(n)
        if v is not None and v.size:
            out[row] = v.reshape(v.shape[0], -1)[j]
    return out


def _defect_root(g: np.ndarray, tol: Tolerance):
    """Square root of a defect gram and its range.

    Rank is decided on the gram itself: eigenvalue dust of size 1e-16 would
    otherwise become 1e-8 after the root and pass the cutoff.
    """
    if not g.size:
        return np.zeros((0, 0), complex), Subspace.zero(0, tol.rank_tol)
    h = 0.5 * (g + g.conj().T)
    w, v = np.linalg.eigh(h)
    keep = w > tol.rank_tol * max(1.0, abs(w).max())
    w = np.where(keep, w, 0.0)
    root = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (root + root.conj().T), Subspace(v[:, keep][:, ::-1], tol.rank_tol)


def defect_data(op: WindowedShiftOperator, tol: Tolerance | None = None) -> DefectData:
    tol = tol or default_tolerance()
    g, gs = defect_grams(op, tol)
    dt, f = _defect_root(g.matrix, tol)
    dts, fs = _defect_root(gs.matrix, tol)
    return DefectData(dt, dts, f, fs, g.coords, gs.coords)


def _block_norm(x: WindowVector) -> float:
    return float(np.sqrt(sum(np.sum(np.abs(v) ** 2) for v in x.coords.values())))


def _escaped(op: WindowedShiftOperator, x: WindowVector, dd: DefectData) -> bool:
    """True once ``T*`` can only carry ``x`` further left, away from ``D_{T*}``."""
    sup = x.support
    if sup is None:
        return True
    floor = op.window[0]
    for t in op._incoming:
        floor = min(floor, t)
    for n, _ in dd.DTstar_coords:
        floor = min(floor, n)
    return sup[1] < floor


def _coefficients(op, dd: DefectData, kmax: int, tol: Tolerance):
    """Raw coefficients ``Theta_0..Theta_K`` plus a flag: True if all later ones vanish exactly."""
    k = dd.dom_dim
    frame = dd.dt_frame_vectors()
    cs = [-(dd.DTstar_frame.frame.conj().T @ _gather(apply(op, frame), dd.DTstar_coords, k))]
    x = dd.dt_vectors()
    scale = max(1.0, _block_norm(x))
    for _ in range(1, kmax + 1):
        if _escaped(op, x, dd) or _block_norm(x) <= 1e-15 * scale:
            return cs, True
        cs.append(dd.project_star(x, k))
        x = adjoint_apply(op, x)
    return cs, _escaped(op, x, dd) or _block_norm(x) <= 1e-15 * scale


def theta_coeffs(op: WindowedShiftOperator, kmax: int, tol: Tolerance | None = None,
                 dd: DefectData | None = None) -> MatrixPolynomial:
    """Taylor coefficients ``Theta_0..Theta_kmax`` by exact support propagation.

    The result is trimmed of trailing (relatively) zero coefficients.
    """
    if not 0 <= kmax <= MAX_BUDGET:
        raise BudgetExceeded(f"kmax={kmax} outside [0, {MAX_BUDGET}]")
    tol = tol or default_tolerance()
    dd = dd or defect_data(op, tol)
    cs, _ = _coefficients(op, dd, kmax, tol)
    return MatrixPolynomial.from_coeffs(cs, tol)


def poly_degree(op: WindowedShiftOperator, bound: int, tol: Tolerance | None = None,
                dd: DefectData | None = None):
    """Degree of ``Theta_T`` if it is certified to be at most ``bound``, else ``AtLeast``.

    A degree is certified when the propagated defect generators have become
    zero or have moved permanently out of reach of ``D_{T*}``.
    """
    if not 0 <= bound <= MAX_BUDGET:
        raise BudgetExceeded(f"bound={bound} outside [0, {MAX_BUDGET}]")
    tol = tol or default_tolerance()
    dd = dd or defect_data(op, tol)
    cs, done = _coefficients(op, dd, bound, tol)
    norms = [np.linalg.norm(c, 2) if c.size else 0.0 for c in cs]
    top = max(norms) if norms else 0.0
    nz = [k for k, v in enumerate(norms) if v > tol.rank_tol * top] if top > 0 else []
    deg = nz[-1] if nz else 0
    if not done:
        return AtLeast(max(deg, bound))
    return deg


def _budget_radius(op: WindowedShiftOperator, budget: int) -> int:
    lo, hi = op.window
    span = max(abs(lo), abs(hi), *(abs(t) for n in op.blocks for t, _ in op.blocks[n]), 1)
    return span + 2 + (budget + 1) * op.reach


def theta_at(op: WindowedShiftOperator, z: complex, budget: int = 64, tol: Tolerance | None = None,
             dd: DefectData | None = None) -> np.ndarray:
    """``Theta_T(z)`` in the stored defect frames.

    Evaluated on a dense truncation with the Neumann series cut after
    ``budget`` terms; this path shares only the defect frames with
    :func:`theta_coeffs`.  It is exact when the degree is at most ``budget``.
    """
    z = complex(z)
    if abs(z) >= 1:
        raise OutsideDisk(f"|z| = {abs(z):.6g} >= 1")
    tol = tol or default_tolerance()
    dd = dd or defect_data(op, tol)
    k = dd.dom_dim
    if k == 0 or dd.cod_dim == 0:
        return np.zeros((dd.cod_dim, k), complex)
    tr = truncate(op, _budget_radius(op, budget))
    m = tr.matrix
    f = tr.to_dense(dd.dt_frame_vectors())
    fs = tr.to_dense(dd.dtstar_frame_vectors())
    dt = np.zeros((tr.size, tr.size), complex)
    idx = [tr.offsets[n] + j for n, j in dd.DT_coords]
    dt[np.ix_(idx, idx)] = dd.DT_op
    dts = np.zeros_like(dt)
    sidx = [tr.offsets[n] + j for n, j in dd.DTstar_coords]
    dts[np.ix_(sidx, sidx)] = dd.DTstar_op
    mh = m.conj().T
    x = dt @ f
    acc = np.zeros_like(x)
    zk = z
    for _ in range(budget):
        acc += zk * x
        x = mh @ x
        zk *= z
    return fs.conj().T @ (-(m @ f) + dts @ acc)


def in_disk_spectrum(op: WindowedShiftOperator, z: complex, budget: int = 64,
                     tol: Tolerance | None = None, dd: DefectData | None = None) -> bool:
    """``z`` lies in the spectrum iff ``Theta_T(z)`` is not boundedly invertible."""
    tol = tol or default_tolerance()
    dd = dd or defect_data(op, tol)
    th = theta_at(op, z, budget, tol, dd)
    if th.shape[0] != th.shape[1]:
        return True
    if th.size == 0:
        return False
    return bool(np.linalg.svd(th, compute_uv=False)[-1] <= tol.rank_tol)
