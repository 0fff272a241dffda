"""Coincidence of matrix polynomials: unitaries ``tau``, ``tau*`` with ``tau* P_k = Q_k tau``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charfn import MatrixPolynomial
from .errors import DegreeMismatch, DimensionMismatch, RankDeficient
from .numlin import (
    Tolerance,
    default_tolerance,
    haar_unitary,
    matrix_to_json,
    polar_unitary,
    procrustes_unitary,
)

__all__ = [
    "CoincidenceCertificate",
    "NoCoincidence",
    "NoCertificate",
    "coincide_scalar",
    "coincide_monomial",
    "coincide_general",
    "coincide",
    "residual",
]


@dataclass(frozen=True, eq=False)
class CoincidenceCertificate:
    tau: np.ndarray
    tau_star: np.ndarray
    residual: float
    method: str = ""

    def __bool__(self):
        return True

    def inverse(self) -> "CoincidenceCertificate":
        """Certificate for the reversed pair ``(Q, P)``."""
        return CoincidenceCertificate(self.tau.conj().T, self.tau_star.conj().T, self.residual, self.method)

    def to_json(self) -> dict:
        return {"coincide": True, "residual": self.residual, "method": self.method,
                "tau": matrix_to_json(self.tau), "tau_star": matrix_to_json(self.tau_star)}


@dataclass(frozen=True)
class NoCoincidence:
    """A proof of non-coincidence (an invariant differs)."""

    reason: str

    def __bool__(self):
        return False

    def to_json(self) -> dict:
        return {"coincide": False, "reason": self.reason}


@dataclass(frozen=True)
class NoCertificate:
    """The heuristic search failed; this is not a proof of non-coincidence."""

    reason: str
    best_residual: float = float("inf")

    def __bool__(self):
        return False

    def to_json(self) -> dict:
        return {"coincide": "no-certificate", "reason": self.reason,
                "residual": None if not np.isfinite(self.best_residual) else self.best_residual}


def residual(p: MatrixPolynomial, q: MatrixPolynomial, tau, tau_star) -> float:
    """``max_k ||tau* P_k - Q_k tau||_F``."""
    n = max(p.degree, q.degree)
    return max((float(np.linalg.norm(tau_star @ a - b @ tau)) for a, b in zip(p.padded(n), q.padded(n))),
               default=0.0)


def _scale(p: MatrixPolynomial, q: MatrixPolynomial) -> float:
    return max([1.0] + [np.linalg.norm(c) for c in p.coeffs + q.coeffs])


def coincide_scalar(p: MatrixPolynomial, q: MatrixPolynomial, tol: Tolerance | None = None):
    """Exact decision for scalar polynomials: ``Q = lambda P`` with ``|lambda| = 1``."""
    tol = tol or default_tolerance()
    if (p.dom_dim, p.cod_dim, q.dom_dim, q.cod_dim) != (1, 1, 1, 1):
        raise DimensionMismatch("coincide_scalar needs 1x1 polynomials")
    n = max(p.degree, q.degree)
    pc = np.array([c[0, 0] for c in p.padded(n)])
    qc = np.array([c[0, 0] for c in q.padded(n)])
    bad = np.abs(np.abs(pc) - np.abs(qc)) > tol.eq_tol * _scale(p, q)
    if np.any(bad):
        k = int(np.argmax(bad))
        return NoCoincidence(f"|P_{k}| = {abs(pc[k]):.6g} differs from |Q_{k}| = {abs(qc[k]):.6g}")
    k = int(np.argmax(np.abs(pc)))
    lam = 1.0 + 0j if abs(pc[k]) == 0 else qc[k] / pc[k]
    lam /= abs(lam) if lam != 0 else 1.0
    tau, tau_star = np.eye(1, dtype=complex), np.array([[lam]])
    r = residual(p, q, tau, tau_star)
    if r > tol.eq_tol * _scale(p, q):
        return NoCoincidence(f"no unimodular factor fits (residual {r:.3e})")
    return CoincidenceCertificate(tau, tau_star, r, "scalar")


def _single_coefficient(p: MatrixPolynomial, tol: Tolerance):
    norms = [np.linalg.norm(c, 2) for c in p.coeffs]
    top = max(norms)
    live = [k for k, v in enumerate(norms) if v > tol.rank_tol * max(top, 1e-300)]
    if len(live) > 1:
        raise ValueError(f"not a monomial: nonzero coefficients at {live}")
    return (live[0] if live else p.degree), p.coeffs[live[0] if live else p.degree]


def _alternate(p, q, tau, tau_star, tol, iters=500):
    """Alternating unitary Procrustes from a starting pair; returns the best pair seen."""
    n = max(p.degree, q.degree)
    ps, qs = p.padded(n), q.padded(n)
    best = (residual(p, q, tau, tau_star), tau, tau_star)
    for _ in range(iters):
        m = sum(b @ tau @ a.conj().T for a, b in zip(ps, qs))
        tau_star = _unitary_factor(m, tol)
        m = sum(b.conj().T @ tau_star @ a for a, b in zip(ps, qs))
        tau = _unitary_factor(m, tol)
        r = residual(p, q, tau, tau_star)
        if r < best[0] - 1e-15:
            best = (r, tau, tau_star)
        elif r >= best[0]:
            break
        if r <= 1e-3 * tol.eq_tol:
            break
    return best


def _unitary_factor(m, tol):
    try:
        return polar_unitary(m, tol)
    except RankDeficient:
        return procrustes_unitary(m)


def coincide_monomial(p: MatrixPolynomial, q: MatrixPolynomial, tol: Tolerance | None = None):
    """Exact decision for ``A z^k`` against ``B z^k``: equal shapes and singular values."""
    tol = tol or default_tolerance()
    kp, a = _single_coefficient(p, tol)
    kq, b = _single_coefficient(q, tol)
    if kp != kq:
        raise DegreeMismatch(f"monomial degrees differ: {kp} vs {kq}")
    if a.shape != b.shape:
        return NoCoincidence(f"shapes differ: {a.shape} vs {b.shape}")
    if a.size == 0:
        return CoincidenceCertificate(np.eye(a.shape[1], dtype=complex), np.eye(a.shape[0], dtype=complex),
                                      0.0, "monomial")
    ua, sa, vha = np.linalg.svd(a)
    ub, sb, vhb = np.linalg.svd(b)
    gap = np.abs(sa - sb).max()
    if gap > tol.rank_tol * max(1.0, sa[0], sb[0]):
        return NoCoincidence(f"singular values differ (max gap {gap:.3e})")
    # aligned singular frames: tau* A = U_B S V_A^H = B tau
    tau = vhb.conj().T @ vha
    tau_star = ub @ ua.conj().T
    r, tau, tau_star = _alternate(p, q, tau, tau_star, tol, iters=20)
    return CoincidenceCertificate(tau, tau_star, r, "monomial")


def coincide_general(p: MatrixPolynomial, q: MatrixPolynomial, restarts: int = 20,
                     seed: int | None = 0, tol: Tolerance | None = None, iters: int = 2000):
    """Sound-but-incomplete search by alternating Procrustes from random starts."""
    tol = tol or default_tolerance()
    if (p.dom_dim, p.cod_dim) != (q.dom_dim, q.cod_dim):
        return NoCertificate(f"dimensions differ: {(p.cod_dim, p.dom_dim)} vs {(q.cod_dim, q.dom_dim)}")
    if p.degree != q.degree:
        return NoCertificate(f"degrees differ: {p.degree} vs {q.degree}")
    scale = _scale(p, q)
    for k, (a, b) in enumerate(zip(p.coeffs, q.coeffs)):
        if a.size:
            gap = np.abs(np.linalg.svd(a, compute_uv=False) - np.linalg.svd(b, compute_uv=False)).max()
            if gap > max(tol.rank_tol, tol.eq_tol) * scale:
                return NoCertificate(f"singular values of coefficient {k} differ by {gap:.3e}")
    fp = sum(np.linalg.norm(c) ** 2 for c in p.coeffs)
    fq = sum(np.linalg.norm(c) ** 2 for c in q.coeffs)
    if abs(fp - fq) > tol.eq_tol * scale:
        return NoCertificate(f"Frobenius invariants differ: {fp:.6g} vs {fq:.6g}")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, restarts)):
        tau = haar_unitary(p.dom_dim, rng)
        tau_star = haar_unitary(p.cod_dim, rng)
        cand = _alternate(p, q, tau, tau_star, tol, iters)
        if best is None or cand[0] < best[0]:
            best = cand
        if best[0] <= tol.eq_tol:
            break
    r, tau, tau_star = best
    if r <= tol.eq_tol:
        return CoincidenceCertificate(tau, tau_star, r, "alternating_procrustes")
    return NoCertificate(f"best residual {r:.3e} after {restarts} restarts", r)


def coincide(p: MatrixPolynomial, q: MatrixPolynomial, restarts: int = 20, seed: int | None = 0,
             tol: Tolerance | None = None):
    """Dispatch to the exact procedures when they apply, otherwise the heuristic search."""
    tol = tol or default_tolerance()
    if (p.dom_dim, p.cod_dim) != (q.dom_dim, q.cod_dim):
        return NoCoincidence(f"dimensions differ: {(p.cod_dim, p.dom_dim)} vs {(q.cod_dim, q.dom_dim)}")
    if p.dom_dim == p.cod_dim == 1:
        return coincide_scalar(p, q, tol)
    try:
        kp, _ = _single_coefficient(p, tol)
        kq, _ = _single_coefficient(q, tol)
    except ValueError:
        return coincide_general(p, q, restarts, seed, tol)
    if kp != kq:
        return NoCoincidence(f"monomial degrees differ: {kp} vs {kq}")
    return coincide_monomial(p, q, tol)
