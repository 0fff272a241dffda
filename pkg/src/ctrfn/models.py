"""Constructors for the explicit contraction models.

* ``T_{a,b,c}`` on scalar ``l^2(Z)`` (degree-one scalar characteristic function),
* the block Jordan nilpotent ``J_m``,
* ``T_A`` and its flipped adjoint companion for a pure contraction ``A``
  (monomial characteristic function ``A z^m``),
* pure shifts and co-shifts used by the degenerate-form classifier.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, Inconclusive, NotContraction, NotPureContraction, NotRealizable
from .numlin import Tolerance, as_matrix, default_tolerance, hermitian_sqrt
from .windowed import (
    FiberProfile,
    WindowedShiftOperator,
    co_shift,
    defect_grams,
    finite_operator,
    flip_adjoint,
    unilateral_shift,
    bilateral_shift,
)

__all__ = [
    "BilateralShiftWarning",
    "TabcParams",
    "MonomialParams",
    "JordanParams",
    "DegreeOnePoly",
    "make_Tabc",
    "make_Jm",
    "make_jordan",
    "make_TA",
    "make_TA_star",
    "realize_degree_one",
    "is_purely_contractive",
    "build_model",
]


class BilateralShiftWarning(UserWarning):
    """``|a| = |b| = 1`` and ``c = 0``: the operator is the bilateral shift."""


@dataclass(frozen=True)
class TabcParams:
    a: complex
    b: complex
    c: complex
    gamma: complex = 1.0

    @classmethod
    def from_gamma(cls, a, b, gamma) -> "TabcParams":
        a, b, gamma = complex(a), complex(b), complex(gamma)
        c = gamma * math.sqrt(max(0.0, 1 - abs(a) ** 2)) * math.sqrt(max(0.0, 1 - abs(b) ** 2))
        return cls(a, b, c, gamma)

    def q_matrix(self) -> np.ndarray:
        return np.array([[self.a, self.c], [0, self.b]], dtype=complex)

    def validate(self, tol: Tolerance | None = None) -> None:
        tol = tol or default_tolerance()
        a, b, c = abs(self.a), abs(self.b), abs(self.c)
        if a ** 2 + c ** 2 > 1 + tol.eq_tol or b ** 2 + c ** 2 > 1 + tol.eq_tol:
            raise NotContraction(f"|a|^2+|c|^2 = {a*a + c*c:.6g}, |b|^2+|c|^2 = {b*b + c*c:.6g}")
        # c = gamma (1-|a|^2)^(1/2) (1-|b|^2)^(1/2) with |gamma| <= 1
        bound = math.sqrt(max(0.0, 1 - a * a)) * math.sqrt(max(0.0, 1 - b * b))
        if c > bound + tol.eq_tol:
            raise NotContraction(f"|c| = {c:.6g} exceeds (1-|a|^2)^(1/2)(1-|b|^2)^(1/2) = {bound:.6g}")


@dataclass(frozen=True, eq=False)
class MonomialParams:
    A: np.ndarray
    m: int

    def __post_init__(self):
        object.__setattr__(self, "A", as_matrix(self.A))
        if self.m < 1:
            raise ValueError("m must be >= 1")

    def validate(self, tol: Tolerance | None = None) -> None:
        tol = tol or default_tolerance()
        s = np.linalg.svd(self.A, compute_uv=False)
        if s.size and s[0] >= 1 - tol.rank_tol:
            raise NotPureContraction(f"sigma_max(A) = {s[0]:.12g} >= 1 - rank_tol")


@dataclass(frozen=True)
class JordanParams:
    m: int
    dim: int = 1


@dataclass(frozen=True)
class DegreeOnePoly:
    """``alpha + beta z``."""

    alpha: complex
    beta: complex

    @property
    def purely_contractive(self) -> bool:
        return abs(self.alpha) + abs(self.beta) <= 1 + 1e-12 and abs(self.alpha) < 1


def make_Tabc(p: TabcParams, tol: Tolerance | None = None) -> WindowedShiftOperator:
    """``e_0 -> a e_1``, ``e_{-1} -> b e_0 + c e_1``, ``e_n -> e_{n+1}`` otherwise."""
    p.validate(tol)
    if abs(abs(p.a) - 1) < 1e-12 and abs(abs(p.b) - 1) < 1e-12 and abs(p.c) < 1e-12:
        warnings.warn("T_{a,b,c} is the bilateral shift", BilateralShiftWarning, stacklevel=2)
    op = WindowedShiftOperator(
        FiberProfile(1, 1),
        (-1, 0),
        {0: [(1, [[p.a]])], -1: [(0, [[p.b]]), (1, [[p.c]])]},
        "tabc",
    )
    defect_grams(op, tol)  # exact contraction check
    return op


def make_Jm(m: int, dim: int) -> np.ndarray:
    """Block Jordan nilpotent of order ``m`` with identity superdiagonal blocks."""
    if m < 1 or dim < 1:
        raise ValueError("m and dim must be >= 1")
    j = np.zeros((m * dim, m * dim), complex)
    for k in range(m - 1):
        j[k * dim:(k + 1) * dim, (k + 1) * dim:(k + 2) * dim] = np.eye(dim)
    return j


def make_jordan(m: int, dim: int = 1) -> WindowedShiftOperator:
    """``J_m`` as a finite operator (no shift part)."""
    return finite_operator(make_Jm(m, dim), name="jordan")


def make_TA(p: MonomialParams, tol: Tolerance | None = None) -> WindowedShiftOperator:
    """The operator ``T_A`` whose characteristic function coincides with ``A z^m``.

    Fibres ``L_n`` are ``N = C^{rows(A)}`` for ``n >= 0`` and
    ``M = C^{cols(A)}`` for ``n <= -1``.  ``L_{m-1} -> L_m`` is ``D_{A*}``,
    ``L_{-1} -> L_m`` is ``-A``; every other fibre is shifted identically.
    """
    p.validate(tol)
    a, m = p.A, p.m
    dn, dm = a.shape
    d_astar = hermitian_sqrt(np.eye(dn) - a @ a.conj().T, tol)
    blocks: dict[int, list] = {n: [(n + 1, np.eye(dn))] for n in range(0, m - 1)}
    blocks[m - 1] = [(m, d_astar)]
    blocks[-1] = [(m, -a)]
    return WindowedShiftOperator(FiberProfile(dm, dn), (-1, m - 1), blocks, "monomial")


def make_TA_star(p: MonomialParams, tol: Tolerance | None = None) -> WindowedShiftOperator:
    """Companion of ``T_A`` built as the re-indexed adjoint of ``T_{A*}``.

    Its block display has ``-A: L_{-m-1} -> L_0``, ``D_A: L_{-m-1} -> L_{-m}``
    and a zero map ``L_{-1} -> L_0``.
    """
    p.validate(tol)
    op = flip_adjoint(make_TA(MonomialParams(p.A.conj().T, p.m), tol), name="monomial_star")
    return op


def realize_degree_one(p: DegreeOnePoly, tol: Tolerance | None = None):
    """Model parameters whose characteristic function coincides with ``alpha + beta z``.

    Returns :class:`TabcParams` for ``|beta| < 1`` and ``JordanParams(1, 1)``
    (the zero operator on ``C``, characteristic function ``z``) for
    ``|beta| = 1``.
    """
    tol = tol or default_tolerance()
    alpha, beta = complex(p.alpha), complex(p.beta)
    al, be = abs(alpha), abs(beta)
    if not (al < 1 and al + be <= 1 + tol.eq_tol):
        raise NotRealizable(f"|alpha| = {al:.6g}, |alpha|+|beta| = {al + be:.6g}")
    if be >= 1 - tol.eq_tol:
        return JordanParams(1, 1)
    # x = |a|^2, y = |b|^2 are the roots of t^2 - (1+|alpha|^2-|beta|^2) t + |alpha|^2;
    # u = 1 - t solves u^2 - (1-|alpha|^2+|beta|^2) u + |beta|^2, which is stable near t = 1
    q = 1 - al * al + be * be
    u_big = (q + math.sqrt(max(0.0, q * q - 4 * be * be))) / 2
    u_small = be * be / u_big if u_big > 0 else 0.0
    x = 1 - u_small
    y = al * al / x
    phase = cmath.exp(1j * cmath.phase(-alpha)) if al > 0 else 1.0
    a = complex(math.sqrt(x))
    b = math.sqrt(y) * phase
    # Θ_{T_abc}(z) = -ab - cz, so c = -beta; (1-x)(1-y) = |beta|^2 makes |gamma| = 1
    gamma = cmath.exp(1j * cmath.phase(-beta)) if be > 0 else 1.0
    return TabcParams(a, b, -beta, gamma)


def is_purely_contractive(poly, grid: int = 4096, tol: Tolerance | None = None):
    """Decide pure contractivity of a matrix polynomial.

    Returns ``(flag, certificate)``.  Scalar degree-one input uses the closed
    form ``|alpha| + |beta| <= 1 and |alpha| < 1``.  Otherwise the boundary
    norm is sampled on ``grid`` points and padded by the Lipschitz slack
    ``sum_k k ||P_k|| 2 pi / grid``; :class:`Inconclusive` is raised if the
    padded bound straddles 1.
    """
    tol = tol or default_tolerance()
    coeffs = [as_matrix(c) for c in poly.coeffs]
    if poly.dom_dim * poly.cod_dim == 0:
        return True, {"method": "trivial"}
    if poly.dom_dim == poly.cod_dim == 1 and len(coeffs) <= 2:
        al = abs(coeffs[0][0, 0])
        be = abs(coeffs[1][0, 0]) if len(coeffs) > 1 else 0.0
        flag = al + be <= 1 + tol.eq_tol and al < 1
        return flag, {"method": "closed_form", "alpha_abs": al, "beta_abs": be}
    norms = [np.linalg.norm(c, 2) for c in coeffs]
    slack = sum(k * nk for k, nk in enumerate(norms)) * 2 * math.pi / grid
    theta = np.linspace(0, 2 * math.pi, grid, endpoint=False)
    zs = np.exp(1j * theta)
    best = 0.0
    for z in zs:
        val = sum(c * z ** k for k, c in enumerate(coeffs))
        best = max(best, np.linalg.norm(val, 2))
    p0 = np.linalg.svd(coeffs[0], compute_uv=False)[0]
    cert = {"method": "boundary_grid", "grid": grid, "slack": slack,
            "boundary_max": best, "theta0_norm": p0}
    if best > 1 + tol.eq_tol or p0 >= 1 - tol.rank_tol:
        return False, cert
    if best + slack <= 1 + tol.eq_tol:
        return True, cert
    raise Inconclusive(f"boundary max {best:.6g} + slack {slack:.3g} straddles 1; raise grid")


def _cx(v):
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1] if len(v) > 1 else 0.0)
    return complex(v)


def _cx_matrix(v):
    if isinstance(v, dict):
        from .numlin import matrix_from_json
        return matrix_from_json(v)
    arr = np.asarray(v, dtype=object)
    if arr.ndim == 3:  # rows x cols x [re, im]
        return np.array([[complex(e[0], e[1]) for e in row] for row in v], dtype=complex)
    return as_matrix(np.asarray(v, dtype=complex))


def build_model(spec: dict, tol: Tolerance | None = None) -> WindowedShiftOperator:
    """Build an operator from the model-config JSON ``{"model": ..., "params": {...}}``."""
    try:
        kind = spec["model"]
        params = spec.get("params", {})
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed model spec: {spec!r}") from exc
    try:
        if kind == "tabc":
            a, b = _cx(params["a"]), _cx(params["b"])
            if "c" in params:
                p = TabcParams(a, b, _cx(params["c"]), _cx(params.get("gamma", 1.0)))
            else:
                p = TabcParams.from_gamma(a, b, _cx(params.get("gamma", 1.0)))
            return make_Tabc(p, tol)
        if kind == "jordan":
            return make_jordan(int(params["m"]), int(params.get("dim", 1)))
        if kind in ("monomial", "monomial_star"):
            p = MonomialParams(_cx_matrix(params["A"]), int(params["m"]))
            return make_TA(p, tol) if kind == "monomial" else make_TA_star(p, tol)
        if kind == "unilateral_shift":
            return unilateral_shift(int(params.get("dim", 1)))
        if kind == "co_shift":
            return co_shift(int(params.get("dim", 1)))
        if kind == "bilateral_shift":
            return bilateral_shift(int(params.get("dim", 1)))
        if kind == "operator":
            return WindowedShiftOperator.from_json(params)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (NotContraction, NotPureContraction)):
            raise
        raise ConfigError(f"bad parameters for model {kind!r}: {exc}") from exc
    raise ConfigError(f"unknown model {kind!r}")
