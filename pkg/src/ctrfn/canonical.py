"""Canonical triangular decompositions ``T = [S * *; 0 N *; 0 0 C]`` and their invariants.

All canonical subspaces are obtained from kernels of stacked constraints.
With ``g`` ranging over a basis of a defect space,

* ``h`` lies in ``M_{-1}`` iff ``<h, T^k g> = 0`` for ``g`` in ``D_{T*}`` and all ``k >= 0``;
* the canonical ``H_1`` is the orthogonal complement of ``{h : <h, T^k g> = 0, k >= n}``;
* ``M_1`` and the star-canonical ``H_{-1*}`` are the mirror images with ``T*`` and ``D_T``.

The vectors ``T^k g`` are propagated exactly on the windowed structure.
Kernels are taken over an *interior* fibre range that the constraints with
``k > steps`` never reach, so a finitely supported ``h`` in the interior
satisfies all constraints iff it satisfies the first ``steps``.  Kernel
vectors with geometrically decaying tails show up as near-kernel vectors and
are accepted at relative level ``interior_tol``; ``margin`` fibres at each
end of the interior leave room for those tails.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .charfn import AtLeast, DefectData, defect_data, poly_degree
from .errors import (
    BudgetExceeded,
    DegreeUndetected,
    ExactnessTooShallow,
    HypothesisViolated,
    NotNilpotent,
)
from .numlin import (
    Subspace,
    Tolerance,
    default_tolerance,
    kernel_space,
    matrix_to_json,
    orthogonal_complement,
    rank,
    rank_sequence,
    subspace_intersect,
)
from .windowed import WindowVector, WindowedShiftOperator, adjoint_apply, apply, truncate

__all__ = [
    "CanonicalDecomposition",
    "QuasiAffinityWitness",
    "Injection",
    "NoInjection",
    "Classification",
    "Workspace",
    "workspace",
    "isometric_subspace",
    "canonical_decomposition",
    "fibre_splitting",
    "user_decomposition",
    "multiplicities",
    "minimal_decompositions",
    "minimal_nilpotents",
    "injection_intertwiner",
    "jordan_unitary",
    "quasi_affinity_witness",
    "classify_degenerate",
    "unitary_part_dim",
]

MAX_STEPS = 4096
INTERIOR_TOL = 1e-6


# ---------------------------------------------------------------------------
# workspace: truncation, propagated defect generators, interior

@dataclass(eq=False)
class Workspace:
    """Everything the subspace computations for one ``(op, radius, steps)`` share."""

    op: WindowedShiftOperator
    radius: int
    steps: int
    margin: int
    tol: Tolerance
    interior_tol: float
    tr: object
    dd: DefectData
    degree: int
    interior: tuple
    icoords: np.ndarray
    back: list  # T^k D_{T*}-frame restricted to interior coordinates, k = 0..steps
    fwd: list  # T*^k D_T-frame restricted to interior coordinates
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return self.tr.size

    def embed(self, local: np.ndarray) -> Subspace:
        """Lift a frame in interior coordinates to the full truncation."""
        full = np.zeros((self.size, local.shape[1]), complex)
        full[self.icoords] = local
        return Subspace(full, self.interior_tol)

    def fibres(self, lo: int, hi: int) -> Subspace:
        """Coordinate subspace of fibres ``lo..hi`` clipped to the interior."""
        lo, hi = max(lo, self.interior[0]), min(hi, self.interior[1])
        idx = self.tr.coords_of(lo, hi) if lo <= hi else np.zeros(0, int)
        frame = np.zeros((self.size, idx.size), complex)
        frame[idx, np.arange(idx.size)] = 1.0
        return Subspace(frame, self.interior_tol)

    @property
    def interior_space(self) -> Subspace:
        return self.fibres(*self.interior)

    def kernel(self, side: str, k0: int) -> Subspace:
        """Interior vectors orthogonal to the propagated generators with ``k0 <= k <= steps``."""
        key = (side, k0)
        if key not in self._cache:
            rows = [blk.conj().T for blk in (self.back if side == "backward" else self.fwd)[k0:]]
            n = self.icoords.size
            c = np.vstack(rows) if rows else np.zeros((0, n), complex)
            smax = np.linalg.norm(c, 2) if c.size else 0.0
            if smax == 0.0:
                local = np.eye(n, dtype=complex)
            else:
                local = kernel_space(c, absolute=self.interior_tol * smax).frame
            self._cache[key] = self.embed(local)
        return self._cache[key]


def _support_bounds(x: WindowVector):
    sup = x.support
    return sup if sup is not None else None


def _restrict(x: WindowVector, tr, icoords, k: int) -> np.ndarray:
    """Interior coordinates of a block vector (components elsewhere are dropped)."""
    full = np.zeros((tr.size, k), complex)
    for n, v in x.coords.items():
        if -tr.radius <= n <= tr.radius and tr.dims[n]:
            full[tr.fibre_slice(n)] = v.reshape(tr.dims[n], -1)
    return full[icoords]


def workspace(op: WindowedShiftOperator, radius: int, steps: int | None = None, margin: int | None = None,
              tol: Tolerance | None = None, interior_tol: float = INTERIOR_TOL,
              require_degree: bool = True) -> Workspace:
    """Build the shared data; the interior is the intersection of both constraint horizons."""
    tol = tol or default_tolerance()
    steps = radius // 2 if steps is None else steps
    if not 0 <= steps <= MAX_STEPS:
        raise BudgetExceeded(f"steps={steps} outside [0, {MAX_STEPS}]")
    margin = max(2, steps // 4) if margin is None else margin
    tr = truncate(op, radius)
    dd = defect_data(op, tol)
    deg = poly_degree(op, steps, tol, dd)
    if isinstance(deg, AtLeast):
        if require_degree:
            raise DegreeUndetected(f"degree not certified within {steps} steps")
        deg = steps
    extra = op.window[1] - op.window[0] + op.reach + 2
    # backward generators T^k g move right; forward ones T*^k g move left
    gb = dd.dtstar_frame_vectors()
    gf = dd.dt_frame_vectors()
    back_vecs, fwd_vecs = [], []
    low_next, high_next = np.inf, -np.inf
    for k in range(steps + extra + 1):
        if k <= steps:
            back_vecs.append(gb)
            fwd_vecs.append(gf)
        else:
            sb, sf = _support_bounds(gb), _support_bounds(gf)
            if sb is not None:
                low_next = min(low_next, sb[0])
            if sf is not None:
                high_next = max(high_next, sf[1])
        gb = apply(op, gb)
        gf = adjoint_apply(op, gf)
    reach = op.reach
    hi = min(radius - reach, low_next - 1) - margin
    lo = max(-radius + reach, high_next + 1) + margin
    lo, hi = int(lo), int(hi)
    lo_w = op.window[0] - 1
    hi_w = max([op.window[1] + 1] + [t for n in op.blocks for t, _ in op.blocks[n]])
    if lo > lo_w or hi < hi_w:
        raise ExactnessTooShallow(
            f"interior [{lo}, {hi}] does not cover the window [{lo_w}, {hi_w}]; raise radius or steps")
    icoords = tr.coords_of(lo, hi)
    back = [_restrict(v, tr, icoords, dd.cod_dim) for v in back_vecs]
    fwd = [_restrict(v, tr, icoords, dd.dom_dim) for v in fwd_vecs]
    if require_degree and steps < deg + 1:
        raise ExactnessTooShallow(f"steps={steps} must exceed the degree {deg}")
    return Workspace(op, radius, steps, margin, tol, interior_tol, tr, dd, int(deg), (lo, hi),
                     icoords, back, fwd)


def _ws(op, radius, steps, tol, ws):
    return ws if ws is not None else workspace(op, radius, steps, tol=tol)


def isometric_subspace(op: WindowedShiftOperator, side: str, steps: int, radius: int,
                       tol: Tolerance | None = None, ws: Workspace | None = None) -> Subspace:
    """``M_1`` (``side="forward"``) or ``M_{-1}`` (``side="backward"``) on the interior."""
    if side not in ("forward", "backward"):
        raise ValueError("side must be 'forward' or 'backward'")
    ws = ws if ws is not None else workspace(op, radius, steps, tol=tol, require_degree=False)
    sub = ws.kernel(side, 0)
    return Subspace(sub.frame, sub.tol, {"interior": ws.interior, "steps": ws.steps, "side": side})


# ---------------------------------------------------------------------------
# decompositions

@dataclass(eq=False)
class CanonicalDecomposition:
    variant: str
    H1: Subspace
    H0: Subspace
    Hm1: Subspace
    S_block: np.ndarray
    N_block: np.ndarray
    C_block: np.ndarray
    nilpotent_order: int
    mult_S: int
    mult_C: int
    degree: int
    exactness: dict
    checks: dict
    ws: Workspace = field(repr=False)

    @property
    def dims(self):
        return (self.H1.dim, self.H0.dim, self.Hm1.dim)

    def to_json(self, frames: bool = False) -> dict:
        out = {
            "variant": self.variant,
            "dims": list(self.dims),
            "nilpotent_order": self.nilpotent_order,
            "mult_S": self.mult_S,
            "mult_C": self.mult_C,
            "degree": self.degree,
            "exactness_depth": self.exactness["steps"],
            "exactness": self.exactness,
            "checks": self.checks,
            "tolerance": {"rank_tol": self.ws.tol.rank_tol, "eq_tol": self.ws.tol.eq_tol,
                          "interior_tol": self.ws.interior_tol},
            "N_block": matrix_to_json(self.N_block),
        }
        if frames:
            out["frames"] = {k: matrix_to_json(getattr(self, k).frame) for k in ("H1", "H0", "Hm1")}
        return out


def _small_singular(m: np.ndarray) -> int:
    if m.size == 0:
        return 0
    return int(np.sum(np.linalg.svd(m, compute_uv=False) < 0.5)) + max(0, m.shape[0] - m.shape[1])


def _edge_free(ws: Workspace, frame: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """Combinations of ``frame`` columns with (near) no mass outside fibres ``lo..hi``."""
    if frame.shape[1] == 0:
        return frame
    inner = set(ws.tr.coords_of(lo, hi).tolist())
    outer = [i for i in ws.icoords.tolist() if i not in inner]
    if not outer:
        return frame
    _, s, vh = np.linalg.svd(frame[outer], full_matrices=True)
    s = np.concatenate([s, np.zeros(vh.shape[0] - s.size)])
    return frame @ vh[s <= ws.interior_tol].conj().T


def _nilpotent_order(n: np.ndarray, tol: Tolerance) -> int:
    if n.size == 0:
        return 0
    seq = rank_sequence(n, n.shape[0], tol)
    return next((k + 1 for k, r in enumerate(seq) if r == 0), n.shape[0] + 1)


def _assemble(ws: Workspace, variant: str, h1: Subspace, h0: Subspace, hm1: Subspace) -> CanonicalDecomposition:
    t = ws.tr.matrix
    f1, f0, fm = h1.frame, h0.frame, hm1.frame
    s_blk = f1.conj().T @ t @ f1
    n_blk = f0.conj().T @ t @ f0
    c_blk = fm.conj().T @ t @ fm
    upper = np.hstack([f1, f0])
    tri = max(
        np.linalg.norm(f0.conj().T @ t @ f1, 2) if f0.size and f1.size else 0.0,
        np.linalg.norm(fm.conj().T @ t @ upper, 2) if fm.size and upper.size else 0.0,
    )
    lo, hi = ws.interior
    reach = ws.op.reach
    x = _edge_free(ws, f1, lo, hi - reach)
    tx = t @ x
    s_iso = float(np.linalg.norm(tx.conj().T @ tx - x.conj().T @ x, 2)) if x.size else 0.0
    w = _edge_free(ws, fm, lo + reach, hi)
    tw = t.conj().T @ w
    c_iso = float(np.linalg.norm(tw.conj().T @ tw - w.conj().T @ w, 2)) if w.size else 0.0
    gram = np.hstack([f1, f0, fm])
    ortho = float(np.linalg.norm(gram.conj().T @ gram - np.eye(gram.shape[1]), 2)) if gram.size else 0.0
    checks = {
        "triangularity": float(tri),
        "S_isometry_defect": s_iso,
        "C_coisometry_defect": c_iso,
        "orthogonality": ortho,
        "spans_interior": bool(gram.shape[1] == ws.icoords.size),
    }
    exactness = {"radius": ws.radius, "steps": ws.steps, "margin": ws.margin,
                 "interior": list(ws.interior)}
    return CanonicalDecomposition(
        variant, h1, h0, hm1, s_blk, n_blk, c_blk,
        _nilpotent_order(n_blk, ws.tol),
        _small_singular(s_blk.conj().T), _small_singular(c_blk),
        ws.degree, exactness, checks, ws)


def canonical_decomposition(op: WindowedShiftOperator, variant: str = "canonical", radius: int = 48,
                            steps: int | None = None, tol: Tolerance | None = None,
                            ws: Workspace | None = None) -> CanonicalDecomposition:
    """Canonical (``H_1`` minimal) or star-canonical (``H_1`` maximal) splitting on the interior."""
    ws = _ws(op, radius, steps, tol, ws)
    n = ws.degree
    vi = ws.interior_space
    if variant == "canonical":
        kbn = ws.kernel("backward", n)
        hm1 = ws.kernel("backward", 0)
        h1 = orthogonal_complement(kbn, vi)
        h0 = orthogonal_complement(hm1, kbn)
    elif variant == "star_canonical":
        kfn = ws.kernel("forward", n)
        h1 = ws.kernel("forward", 0)
        hm1 = orthogonal_complement(kfn, vi)
        h0 = orthogonal_complement(h1, kfn)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return _assemble(ws, variant, h1, h0, hm1)


def user_decomposition(ws: Workspace, h1: Subspace, h0: Subspace, hm1: Subspace,
                       variant: str = "user") -> CanonicalDecomposition:
    """Compress ``T`` along a caller-supplied splitting of the interior."""
    return _assemble(ws, variant, h1, h0, hm1)


def fibre_splitting(op: WindowedShiftOperator, h1_from: int, h0_range: tuple, radius: int = 48,
                    steps: int | None = None, tol: Tolerance | None = None,
                    ws: Workspace | None = None) -> CanonicalDecomposition:
    """Splitting by fibre ranges: ``H_1`` = fibres ``>= h1_from``, ``H_0`` = ``h0_range``, rest below."""
    ws = _ws(op, radius, steps, tol, ws)
    lo0, hi0 = h0_range
    if not (hi0 < h1_from and lo0 <= hi0 + 1):
        raise ValueError("need h0_range below h1_from")
    return _assemble(ws, "user", ws.fibres(h1_from, 10 ** 9), ws.fibres(lo0, hi0),
                     ws.fibres(-10 ** 9, lo0 - 1))


def multiplicities(d: CanonicalDecomposition) -> tuple:
    """``(dim ker S*, dim ker C)``: the unitary invariants of the shift and co-shift parts."""
    return d.mult_S, d.mult_C


# ---------------------------------------------------------------------------
# minimal nilpotents and intertwiners

def minimal_decompositions(op: WindowedShiftOperator, radius: int = 48, steps: int | None = None,
                           tol: Tolerance | None = None, ws: Workspace | None = None):
    """The splittings with ``H_00 = H_0 ⊖ (M_1 ∩ H_0)`` and ``H_0*0 = H_0* ⊖ (H_0* ∩ M_{-1})``."""
    ws = _ws(op, radius, steps, tol, ws)
    can = canonical_decomposition(op, "canonical", ws=ws)
    star = canonical_decomposition(op, "star_canonical", ws=ws)
    m1 = ws.kernel("forward", 0)
    mm1 = ws.kernel("backward", 0)
    cut = ws.interior_tol
    x = subspace_intersect(m1, can.H0, cut)
    h10 = Subspace(np.hstack([can.H1.frame, x.frame]), cut)
    h00 = orthogonal_complement(x, can.H0)
    d0 = _assemble(ws, "minimal", h10, h00, can.Hm1)
    y = subspace_intersect(star.H0, mm1, cut)
    h0s0 = orthogonal_complement(y, star.H0)
    hm1s0 = Subspace(np.hstack([star.Hm1.frame, y.frame]), cut)
    d1 = _assemble(ws, "star_minimal", star.H1, h0s0, hm1s0)
    return d0, d1


def minimal_nilpotents(op: WindowedShiftOperator, radius: int = 48, steps: int | None = None,
                       tol: Tolerance | None = None, ws: Workspace | None = None):
    """``(N_0, N_*0)``, the central entries of the two minimal splittings."""
    d0, d1 = minimal_decompositions(op, radius, steps, tol, ws)
    return d0.N_block, d1.N_block


@dataclass(frozen=True, eq=False)
class Injection:
    X: np.ndarray
    rank: int
    residual: float
    draws: int

    def __bool__(self):
        return True


@dataclass(frozen=True)
class NoInjection:
    reason: str
    best_rank: int = 0

    def __bool__(self):
        return False


def _check_nilpotent(n: np.ndarray, tol: Tolerance, name: str):
    if n.shape[0] != n.shape[1]:
        raise ValueError(f"{name} must be square")
    if n.size and rank_sequence(n, n.shape[0], tol)[-1] != 0:
        raise NotNilpotent(f"{name} is not nilpotent within rank_tol")


def injection_intertwiner(n1, n2, seed: int | None = 0, draws: int = 50,
                          tol: Tolerance | None = None):
    """An injective ``X`` with ``X N1 = N2 X``, found as a generic point of the solution space."""
    tol = tol or default_tolerance()
    n1 = np.atleast_2d(np.asarray(n1, complex))
    n2 = np.atleast_2d(np.asarray(n2, complex))
    _check_nilpotent(n1, tol, "N1")
    _check_nilpotent(n2, tol, "N2")
    d1, d2 = n1.shape[0], n2.shape[0]
    if d1 == 0:
        return Injection(np.zeros((d2, 0), complex), 0, 0.0, 0)
    if d1 > d2:
        return NoInjection(f"dim {d1} > dim {d2}")
    # vec(X N1 - N2 X) = (N1^T ⊗ I - I ⊗ N2) vec(X), column-major vec
    system = np.kron(n1.T, np.eye(d2)) - np.kron(np.eye(d1), n2)
    scale = max(1.0, np.linalg.norm(n1, 2), np.linalg.norm(n2, 2))
    basis = kernel_space(system, absolute=tol.rank_tol * scale).frame
    if basis.shape[1] == 0:
        return NoInjection("only X = 0 intertwines")
    rng = np.random.default_rng(seed)
    best = 0
    for i in range(draws):
        w = rng.standard_normal(basis.shape[1]) + 1j * rng.standard_normal(basis.shape[1])
        x = (basis @ w).reshape((d2, d1), order="F")
        x /= np.linalg.norm(x, 2)
        r = rank(x, tol)
        best = max(best, r)
        if r == d1:
            res = float(np.linalg.norm(x @ n1 - n2 @ x, 2))
            return Injection(x, r, res, i + 1)
    return NoInjection(f"generic rank {best} < {d1} after {draws} draws", best)


def _jordan_chains(n: np.ndarray, tol: Tolerance):
    """Orthonormal chain basis ``[t, N t, ..., N^{j-1} t]`` grouped by chain length.

    Exact for graded partial isometries (such as block Jordan operators);
    for other nilpotents the chain vectors need not be orthonormal and the
    caller sees it in the unitarity defect.
    """
    d = n.shape[0]
    order = _nilpotent_order(n, tol)
    kers = [Subspace.zero(d)]
    p = np.eye(d, dtype=complex)
    scale = max(1.0, np.linalg.norm(n, 2)) if d else 1.0
    for j in range(1, order + 1):
        p = p @ n
        kers.append(kernel_space(p, absolute=tol.rank_tol * scale ** j))
    chains = {}
    used = Subspace.zero(d)
    for j in range(order, 0, -1):
        level = orthogonal_complement(kers[j - 1], kers[j])
        tops = orthogonal_complement(used, level) if used.dim else level
        if tops.dim:
            chains[j] = tops.frame
            vecs = [tops.frame]
            for _ in range(j - 1):
                vecs.append(n @ vecs[-1])
            used = Subspace(np.hstack([used.frame] + vecs), tol.rank_tol)
    return chains


def jordan_unitary(n1, n2, tol: Tolerance | None = None):
    """A unitary ``U`` with ``U N1 = N2 U`` assembled from aligned Jordan chains.

    Returns ``(U, residual, unitarity_defect)``; raises ``ValueError`` when the
    chain structures differ.
    """
    tol = tol or default_tolerance()
    n1 = np.atleast_2d(np.asarray(n1, complex))
    n2 = np.atleast_2d(np.asarray(n2, complex))
    c1, c2 = _jordan_chains(n1, tol), _jordan_chains(n2, tol)
    if {j: v.shape[1] for j, v in c1.items()} != {j: v.shape[1] for j, v in c2.items()}:
        raise ValueError("Jordan structures differ")
    b1, b2 = [], []
    for j in sorted(c1):
        for t1, t2 in zip(c1[j].T, c2[j].T):
            v1, v2 = t1, t2
            for _ in range(j):
                b1.append(v1)
                b2.append(v2)
                v1, v2 = n1 @ v1, n2 @ v2
    if not b1:
        u = np.eye(n1.shape[0], dtype=complex)
    else:
        u = np.array(b2).T @ np.array(b1).conj()
    res = float(np.linalg.norm(u @ n1 - n2 @ u, 2)) if u.size else 0.0
    uni = float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[1]), 2)) if u.size else 0.0
    return u, res, uni


# ---------------------------------------------------------------------------
# quasi-affinity between two splittings

@dataclass(frozen=True, eq=False)
class QuasiAffinityWitness:
    Y_tilde: np.ndarray
    ker_dim: int
    range_codim: int
    intertwining_residual: float
    T_tilde: np.ndarray
    T_tilde_prime: np.ndarray

    def to_json(self) -> dict:
        return {"ker_dim": self.ker_dim, "range_codim": self.range_codim,
                "intertwining_residual": self.intertwining_residual,
                "Y_tilde": matrix_to_json(self.Y_tilde)}


def _hypotheses(ws: Workspace, d: CanonicalDecomposition, label: str):
    cut = ws.interior_tol
    a = subspace_intersect(ws.kernel("forward", 0), d.H0, cut).dim
    if a:
        raise HypothesisViolated(f"{label}: M_1 ∩ H_0 has dimension {a}", a)
    b = subspace_intersect(d.H0, ws.kernel("backward", 0), cut).dim
    if b:
        raise HypothesisViolated(f"{label}: H_0 ∩ M_-1 has dimension {b}", b)


def quasi_affinity_witness(op: WindowedShiftOperator, dA: CanonicalDecomposition,
                           dB: CanonicalDecomposition, tol: Tolerance | None = None) -> QuasiAffinityWitness:
    """``Y~ = P_{H'_0 ⊕ H'_-1}`` restricted to ``L_1 ⊕ H_0``, with its intertwining residual."""
    ws = dA.ws
    if dB.ws is not ws:
        raise ValueError("both decompositions must share one workspace")
    tol = tol or ws.tol
    _hypotheses(ws, dA, "first splitting")
    _hypotheses(ws, dB, "second splitting")
    cut = ws.interior_tol
    l1 = orthogonal_complement(subspace_intersect(dA.H1, dB.H1, cut), dA.H1)
    lm1 = orthogonal_complement(subspace_intersect(dA.Hm1, dB.Hm1, cut), dB.Hm1)
    fd = np.hstack([l1.frame, dA.H0.frame])
    fc = np.hstack([dB.H0.frame, lm1.frame])
    t = ws.tr.matrix
    y = fc.conj().T @ fd
    tt = fd.conj().T @ t @ fd
    ttp = fc.conj().T @ t @ fc
    r = rank(y, tol) if y.size else 0
    res = float(np.linalg.norm(y @ tt - ttp @ y, 2)) if y.size else 0.0
    return QuasiAffinityWitness(y, fd.shape[1] - r, fc.shape[1] - r, res, tt, ttp)


# ---------------------------------------------------------------------------
# classification and unitary part

@dataclass(frozen=True)
class Classification:
    form: str
    cls: str
    degree: int
    dims: tuple

    def to_json(self) -> dict:
        return {"form": self.form, "class": self.cls, "degree": self.degree,
                "defect_dims": list(self.dims)}


_CLASS = {"SNC": "-", "SN": "C.0", "NC": "C0.", "N": "C00", "S": "C10", "C": "C01", "SC": "-"}


def classify_degenerate(op: WindowedShiftOperator, radius: int = 48, steps: int | None = None,
                        tol: Tolerance | None = None) -> Classification:
    """Which of ``S``, ``N``, ``C`` are present in the canonical triangular form."""
    tol = tol or default_tolerance()
    steps = radius // 2 if steps is None else steps
    dd = defect_data(op, tol)
    deg = poly_degree(op, steps, tol, dd)
    if isinstance(deg, AtLeast):
        raise DegreeUndetected(f"degree not certified within {steps} steps")
    dims = (dd.dom_dim, dd.cod_dim)
    if deg == 0:
        if dd.dom_dim == 0 and dd.cod_dim == 0:
            return Classification("SC", "C11", 0, dims)  # unitary, outside the c.n.u. setting
        if dd.dom_dim == 0:
            return Classification("S", _CLASS["S"], 0, dims)
        if dd.cod_dim == 0:
            return Classification("C", _CLASS["C"], 0, dims)
        return Classification("SC", _CLASS["SC"], 0, dims)
    d = canonical_decomposition(op, "canonical", radius, steps, tol)
    has_s, has_c = d.H1.dim > 0, d.Hm1.dim > 0
    form = ("S" if has_s else "") + "N" + ("C" if has_c else "")
    return Classification(form, _CLASS[form], int(deg), dims)


def unitary_part_dim(op: WindowedShiftOperator, steps: int, radius: int,
                     tol: Tolerance | None = None, ws: Workspace | None = None) -> int:
    """Dimension of the interior vectors surviving both defect-constraint families up to ``steps``.

    Zero certifies that no interior-supported vector spans a unitary part.
    """
    ws = ws if ws is not None else workspace(op, radius, steps, tol=tol, require_degree=False)
    rows = [blk.conj().T for blk in ws.back] + [blk.conj().T for blk in ws.fwd]
    c = np.vstack(rows) if rows else np.zeros((0, ws.icoords.size), complex)
    if not c.size or np.linalg.norm(c, 2) == 0:
        return int(ws.icoords.size)
    return kernel_space(c, absolute=ws.interior_tol * np.linalg.norm(c, 2)).dim
