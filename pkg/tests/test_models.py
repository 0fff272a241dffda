import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctrfn import (
    BilateralShiftWarning,
    DegreeOnePoly,
    JordanParams,
    MatrixPolynomial,
    MonomialParams,
    TabcParams,
    build_model,
    coincide_scalar,
    is_purely_contractive,
    make_Jm,
    make_TA,
    make_TA_star,
    make_Tabc,
    make_jordan,
    realize_degree_one,
    theta_coeffs,
)
from ctrfn.errors import ConfigError, Inconclusive, NotContraction, NotPureContraction, NotRealizable
from ctrfn.numlin import rank_sequence
from ctrfn.windowed import WindowVector, apply, defect_grams, truncate


def test_make_tabc_examples():
    p = TabcParams.from_gamma(0.6, 0.5, np.exp(0.3j))
    assert abs(abs(p.c) - 0.8 * np.sqrt(0.75)) < 1e-15
    y = apply(make_Tabc(p), WindowVector.basis(0, 0, 1))
    assert np.allclose(y.coords[1], [0.6])
    with pytest.warns(BilateralShiftWarning):
        make_Tabc(TabcParams(1, 1, 0))
    with pytest.raises(NotContraction):
        make_Tabc(TabcParams(0.9, 0, 0.9))


def test_make_Jm_examples():
    assert not np.any(make_Jm(1, 3)) and make_Jm(1, 3).shape == (3, 3)
    assert rank_sequence(make_Jm(3, 1), 3) == [2, 1, 0]
    j = make_Jm(2, 2)
    assert rank_sequence(j, 2) == [2, 0] and np.allclose(j[:2, 2:], np.eye(2))


@pytest.mark.parametrize("m,d", [(1, 1), (2, 3), (4, 2)])
def test_Jm_rank_profile(m, d):
    assert rank_sequence(make_Jm(m, d), m) == [(m - k) * d for k in range(1, m + 1)]


def test_make_TA_scalar_m1():
    tr = truncate(make_TA(MonomialParams([[0.5]], 1)), 4)
    s = tr.fibre_slice
    assert np.isclose(tr.matrix[s(1), s(0)][0, 0], np.sqrt(0.75))
    assert np.isclose(tr.matrix[s(1), s(-1)][0, 0], -0.5)


def test_make_TA_defects_and_partial_isometry(rng):
    a = rng.standard_normal((3, 2)) * 0.3
    for op in (make_TA(MonomialParams(a, 2)), make_TA_star(MonomialParams(a, 2))):
        g, gs = defect_grams(op)
        for m in (g.matrix, gs.matrix):
            assert np.linalg.norm(m @ m - m) < 1e-10
    g, gs = defect_grams(make_TA(MonomialParams(a, 2)))
    assert gs.fibres == (0,) and np.allclose(gs.matrix, np.eye(3), atol=1e-12)


def test_make_TA_star_blocks():
    a = np.array([[0.3, 0.1], [0.0, 0.2]])
    op = make_TA_star(MonomialParams(a, 2))
    tr = truncate(op, 8)
    s = tr.fibre_slice
    w, v = np.linalg.eigh(np.eye(2) - a.conj().T @ a)
    d_a = (v * np.sqrt(w)) @ v.conj().T
    assert np.allclose(tr.matrix[s(0), s(-3)], -a)
    assert np.allclose(tr.matrix[s(-2), s(-3)], d_a)
    assert not np.any(tr.matrix[:, s(-1)])


def test_pure_contraction_check():
    with pytest.raises(NotPureContraction):
        make_TA(MonomialParams(np.diag([1.0, 0.2]), 2))


def test_realize_examples():
    p = realize_degree_one(DegreeOnePoly(0.5, 0.5))
    assert np.isclose(p.a, np.sqrt(0.5)) and np.isclose(p.b, -np.sqrt(0.5))
    # the derived sign rule: Θ_{T_abc} = -ab - cz, hence c = -beta
    assert np.isclose(p.c, -0.5) and np.isclose(p.gamma, -1)
    assert realize_degree_one(DegreeOnePoly(0, 1)) == JordanParams(1, 1)
    with pytest.raises(NotRealizable):
        realize_degree_one(DegreeOnePoly(0.6, 0.6))


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 0.99), st.floats(0, 1), st.floats(0, 6.3), st.floats(0, 6.3))
def test_realize_roundtrip(ra, frac, pa, pb):
    alpha = ra * np.exp(1j * pa)
    beta = frac * (1 - ra) * np.exp(1j * pb)
    p = realize_degree_one(DegreeOnePoly(alpha, beta))
    if isinstance(p, JordanParams):
        op = make_jordan(p.m, p.dim)
    else:
        assert abs(abs(p.gamma) - 1) < 1e-12
        op = make_Tabc(p)
    cert = coincide_scalar(theta_coeffs(op, 4), MatrixPolynomial.scalar(alpha, beta))
    assert cert and cert.residual < 1e-8


def test_purely_contractive_examples():
    assert is_purely_contractive(MatrixPolynomial.scalar(0.3, 0.7))[0]
    assert not is_purely_contractive(MatrixPolynomial.scalar(1.0, 0.0))[0]
    z = np.zeros((2, 2))
    poly = MatrixPolynomial((z, z, 0.5 * np.eye(2)), 2, 2)
    flag, cert = is_purely_contractive(poly)
    assert flag and cert["method"] == "boundary_grid"
    th = np.linspace(0, 2 * np.pi, 10 ** 4)
    assert max(np.linalg.norm(poly(np.exp(1j * t)), 2) for t in th) <= 1


def test_purely_contractive_inconclusive():
    z = np.zeros((2, 2))
    poly = MatrixPolynomial((z, np.diag([0.999999, 0.1]), z), 2, 2)
    with pytest.raises(Inconclusive):
        is_purely_contractive(poly, grid=64)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1.2), st.floats(0, 6.3))
def test_contraction_iff_Q_contraction(ma, mb, mc, pc):
    p = TabcParams(ma, mb, mc * np.exp(1j * pc))
    q_ok = np.linalg.norm(p.q_matrix(), 2) <= 1 + 1e-9
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            make_Tabc(p)
            built = True
        except NotContraction:
            built = False
    if abs(np.linalg.norm(p.q_matrix(), 2) - 1) > 1e-6:
        assert built == q_ok


def test_build_model_config():
    op = build_model({"model": "tabc", "params": {"a": [0.6, 0], "b": [0.5, 0], "gamma": [1, 0]}})
    assert op.name == "tabc"
    op = build_model({"model": "monomial", "params": {"A": [[[0.2, 0], [0.1, 0.1]]], "m": 2}})
    assert op.profile.left == 2 and op.profile.right == 1
    assert build_model({"model": "jordan", "params": {"m": 3, "dim": 2}}).name == "jordan"
    for bad in ({"model": "nope"}, {"params": {}}, {"model": "jordan", "params": {"m": "x"}}, []):
        with pytest.raises(ConfigError):
            build_model(bad)
