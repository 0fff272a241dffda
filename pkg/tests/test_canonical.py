import numpy as np
import pytest

from ctrfn import (
    HypothesisViolated,
    MonomialParams,
    NotNilpotent,
    TabcParams,
    bilateral_shift,
    canonical_decomposition,
    classify_degenerate,
    co_shift,
    conjugate_fiberwise,
    fibre_splitting,
    injection_intertwiner,
    isometric_subspace,
    jordan_unitary,
    make_Jm,
    make_TA,
    make_TA_star,
    make_Tabc,
    make_jordan,
    minimal_decompositions,
    minimal_nilpotents,
    multiplicities,
    quasi_affinity_witness,
    unilateral_shift,
    unitary_part_dim,
    workspace,
)
from ctrfn.numlin import Subspace, haar_unitary, hermitian_sqrt, rank_sequence
from ctrfn.canonical import Injection, NoInjection

from conftest import random_pure

TRICHOTOMY = [(0.8, 0.3), (0.3, 0.8), (0.5, 0.5)]


def tabc(a, b, gamma=1.0):
    return make_Tabc(TabcParams.from_gamma(a, b, gamma))


def proj(frame):
    return frame @ frame.conj().T


def contained(small, big, tol=1e-8):
    if small.dim == 0:
        return True
    rest = small.frame - big.frame @ (big.frame.conj().T @ small.frame)
    return np.linalg.norm(rest, 2) < tol


def check_valid(d, tri=1e-9):
    assert d.checks["triangularity"] < tri
    assert d.checks["orthogonality"] < 1e-9
    assert d.checks["spans_interior"]
    assert d.checks["S_isometry_defect"] < 1e-9
    assert d.checks["C_coisometry_defect"] < 1e-9


@pytest.mark.parametrize("a,b", TRICHOTOMY)
@pytest.mark.parametrize("variant", ["canonical", "star_canonical"])
def test_tabc_decompositions_valid(a, b, variant):
    d = canonical_decomposition(tabc(a, b, np.exp(0.7j)), variant, radius=48, steps=24)
    check_valid(d)
    assert multiplicities(d) == (1, 1)
    assert d.nilpotent_order == d.degree == 1


@pytest.mark.parametrize("a,b", TRICHOTOMY)
def test_trichotomy(a, b):
    op = tabc(a, b)
    ws = workspace(op, 48, 24)
    can = canonical_decomposition(op, "canonical", ws=ws)
    star = canonical_decomposition(op, "star_canonical", ws=ws)
    window_hm1 = ws.fibres(-10 ** 9, -1)
    window_h1 = ws.fibres(1, 10 ** 9)
    # canonical iff |a| >= |b|: M_-1 equals the window H_-1, else strictly contains it
    assert contained(window_hm1, can.Hm1)
    assert (can.Hm1.dim > window_hm1.dim) == (a < b)
    assert (star.H1.dim > window_h1.dim) == (a > b)
    if a >= b:
        assert can.dims == (window_h1.dim, 1, window_hm1.dim)


def test_extra_generator_is_geometric():
    a, b = 0.3, 0.8
    op = tabc(a, b)
    ws = workspace(op, 48, 24)
    can = canonical_decomposition(op, "canonical", ws=ws)
    extra = can.Hm1.frame - ws.fibres(-10 ** 9, -1).frame @ (ws.fibres(-10 ** 9, -1).frame.conj().T @ can.Hm1.frame)
    u, s, _ = np.linalg.svd(extra)
    v = u[:, 0]
    amps = [abs(v[ws.tr.fibre_slice(n)][0]) for n in range(0, 6)]
    ratio = np.sqrt((1 - b * b) / (1 - a * a)) * a / b
    for k in range(1, 5):
        assert abs(amps[k + 1] / amps[k] - ratio) < 1e-6


def test_monomial_display_is_canonical(rng):
    for shape, m in [((2, 2), 1), ((3, 2), 3), ((2, 3), 2)]:
        a = random_pure(rng, *shape)
        op = make_TA(MonomialParams(a, m))
        ws = workspace(op, 48)
        can = canonical_decomposition(op, "canonical", ws=ws)
        check_valid(can)
        h1 = ws.fibres(m, 10 ** 9)
        assert can.H1.dim == h1.dim and contained(h1, can.H1)
        assert can.Hm1.dim == ws.fibres(-10 ** 9, -1).dim
        assert multiplicities(can) == (shape[0], shape[1])


def test_jordan_is_all_nilpotent():
    op = make_jordan(3, 2)
    d = canonical_decomposition(op, "canonical", radius=16, steps=6)
    assert d.H1.dim == 0 and d.Hm1.dim == 0
    assert d.nilpotent_order == 3
    assert multiplicities(d) == (0, 0)


def test_monomial_M1_description(rng):
    a = random_pure(rng, 3, 2)
    m = 2
    op = make_TA(MonomialParams(a, m))
    ws = workspace(op, 48)
    m1 = isometric_subspace(op, "forward", ws.steps, 48, ws=ws)
    # members vanish far left and satisfy A* h_{m-k-1} + D_A h_{-k-1} = 0 near the window
    d_a = hermitian_sqrt(np.eye(2) - a.conj().T @ a)
    f = m1.frame
    lo = ws.interior[0]
    for n in range(lo, -m - 1):
        assert np.linalg.norm(f[ws.tr.fibre_slice(n)]) < 1e-8
    for k in range(0, m):
        lhs = a.conj().T @ f[ws.tr.fibre_slice(m - k - 1)] + d_a @ f[ws.tr.fibre_slice(-k - 1)]
        assert np.linalg.norm(lhs) < 1e-8


def test_bilateral_isometric_everywhere():
    op = bilateral_shift(1)
    for side in ("forward", "backward"):
        s = isometric_subspace(op, side, 8, 24)
        e0 = np.zeros((s.frame.shape[0], 1))
        e0[s.frame.shape[0] // 2] = 1
        assert contained(Subspace(e0), s)


def test_extremality_against_fibre_splittings():
    op = make_Tabc(TabcParams.from_gamma(0.0, 0.6, 1.0))
    ws = workspace(op, 48, 24)
    can = canonical_decomposition(op, "canonical", ws=ws)
    star = canonical_decomposition(op, "star_canonical", ws=ws)
    for h1_from, h0 in [(1, (0, 0)), (2, (0, 1))]:
        u = fibre_splitting(op, h1_from, h0, ws=ws)
        check_valid(u)
        assert contained(can.H1, u.H1) and contained(u.Hm1, can.Hm1)
        assert contained(u.H1, star.H1) and contained(star.Hm1, u.Hm1)
        assert multiplicities(u) == multiplicities(can) == multiplicities(star)


def test_two_splittings_of_T0bc():
    op = make_Tabc(TabcParams.from_gamma(0.0, 0.6, 1.0))
    ws = workspace(op, 48, 24)
    d1 = fibre_splitting(op, 1, (0, 0), ws=ws)
    d2 = fibre_splitting(op, 2, (0, 1), ws=ws)
    n1, n2 = d1.N_block, d2.N_block
    assert n1.shape == (1, 1) and n2.shape == (2, 2)
    inj = injection_intertwiner(n1, n2)
    assert isinstance(inj, Injection) and inj.rank == 1 and inj.residual < 1e-12
    n0, ns0 = minimal_nilpotents(op, ws=ws)
    assert n0.shape[0] == 1 == ns0.shape[0]


def test_minimal_nilpotents_monomial(rng):
    for shape, m in [((2, 2), 2), ((3, 2), 3), ((1, 2), 4)]:
        a = random_pure(rng, *shape)
        r = np.linalg.matrix_rank(a)
        for mk in (make_TA, make_TA_star):
            op = mk(MonomialParams(a, m))
            n0, ns0 = minimal_nilpotents(op, 48)
            s0 = rank_sequence(n0, m + 1)
            assert s0 == rank_sequence(ns0, m + 1)
            assert s0 == rank_sequence(make_Jm(m, r), m + 1)
            u, res, uni = jordan_unitary(n0, ns0)
            assert res < 1e-9 and uni < 1e-9


def test_minimal_tabc_quasi_similar():
    for a, b in TRICHOTOMY:
        n0, ns0 = minimal_nilpotents(tabc(a, b, 1j), 48, 24)
        k = max(n0.shape[0], ns0.shape[0]) + 1
        assert rank_sequence(n0, k) == rank_sequence(ns0, k)


def test_injection_examples():
    j2 = make_Jm(2, 1)
    inj = injection_intertwiner(j2, j2)
    assert inj and inj.rank == 2
    assert injection_intertwiner(np.zeros((1, 1)), np.zeros((2, 2)))
    out = injection_intertwiner(j2, np.zeros((1, 1)))
    assert isinstance(out, NoInjection)
    # order cannot grow under injection even with room to spare
    assert not injection_intertwiner(make_Jm(3, 1), make_Jm(2, 2))
    with pytest.raises(NotNilpotent):
        injection_intertwiner(np.eye(2), make_Jm(2, 1))


def test_injection_chain_T0bc():
    op = make_Tabc(TabcParams.from_gamma(0.0, 0.6, 1.0))
    ws = workspace(op, 48, 24)
    _, ns0 = minimal_nilpotents(op, ws=ws)
    can = canonical_decomposition(op, "canonical", ws=ws)
    star = canonical_decomposition(op, "star_canonical", ws=ws)
    ok = 0
    for d in (can, star, fibre_splitting(op, 1, (0, 0), ws=ws), fibre_splitting(op, 2, (0, 1), ws=ws)):
        try:
            quasi_affinity_witness(op, d, d)
        except HypothesisViolated:
            continue
        ok += 1
        assert injection_intertwiner(ns0, d.N_block)
        assert injection_intertwiner(d.N_block, star.N_block)
    assert ok >= 2


def test_jordan_unitary_rejects_mismatch():
    with pytest.raises(ValueError):
        jordan_unitary(make_Jm(2, 2), make_Jm(4, 1))


def test_quasi_affinity_monomial(rng):
    a = random_pure(rng, 3, 2)
    op = make_TA(MonomialParams(a, 2))
    ws = workspace(op, 48)
    d0, d1 = minimal_decompositions(op, ws=ws)
    w = quasi_affinity_witness(op, d0, d1)
    assert w.ker_dim == 0 and w.range_codim == 0 and w.intertwining_residual < 1e-9
    same = quasi_affinity_witness(op, d0, d0)
    assert same.ker_dim == 0 and same.intertwining_residual < 1e-12
    y = same.Y_tilde
    assert np.linalg.norm(y.conj().T @ y - np.eye(y.shape[1])) < 1e-9


def test_quasi_affinity_hypothesis_violated():
    op = make_Tabc(TabcParams.from_gamma(0.0, 0.6, 1.0))
    ws = workspace(op, 48, 24)
    can = canonical_decomposition(op, "canonical", ws=ws)
    bad = fibre_splitting(op, 2, (0, 1), ws=ws)
    with pytest.raises(HypothesisViolated) as err:
        quasi_affinity_witness(op, bad, can)
    assert err.value.dim == 1


def test_remark_equivariance(rng):
    a = random_pure(rng, 2, 2)
    op = make_TA(MonomialParams(a, 2))
    ul, ur = haar_unitary(2, rng), haar_unitary(2, rng)
    op2 = conjugate_fiberwise(op, ul, ur)
    ws1, ws2 = workspace(op, 40), workspace(op2, 40)
    assert ws1.interior == ws2.interior
    u = np.zeros((ws1.size, ws1.size), complex)
    for n in range(-40, 41):
        sl = ws1.tr.fibre_slice(n)
        u[sl, sl] = ul if n <= -1 else ur
    for variant in ("canonical", "star_canonical"):
        d1 = canonical_decomposition(op, variant, ws=ws1)
        d2 = canonical_decomposition(op2, variant, ws=ws2)
        for name in ("H1", "H0", "Hm1"):
            p1 = u @ proj(getattr(d1, name).frame) @ u.conj().T
            p2 = proj(getattr(d2, name).frame)
            assert np.linalg.norm(p1 - p2, 2) < 1e-8


def test_classifier():
    c = classify_degenerate(make_jordan(3, 2), radius=16, steps=6)
    assert (c.form, c.cls) == ("N", "C00")
    c = classify_degenerate(unilateral_shift(1), radius=16)
    assert (c.form, c.cls) == ("S", "C10") and c.dims[0] == 0
    c = classify_degenerate(co_shift(1), radius=16)
    assert (c.form, c.cls) == ("C", "C01")
    for a in (0.0, 0.3, 0.9):
        c = classify_degenerate(make_Tabc(TabcParams(a, 1.0, 0.0)), radius=16)
        assert c.form == "SC" and c.degree == 0
    c = classify_degenerate(tabc(0.5, 0.5), radius=32)
    assert c.form == "SNC"


def test_classifier_json():
    js = classify_degenerate(make_jordan(2, 1), radius=16, steps=6).to_json()
    assert js["form"] == "N" and js["class"] == "C00"


def test_unitary_part(rng):
    assert unitary_part_dim(make_Tabc(TabcParams(0.0, 0.0, 1.0)), 16, 48) >= 1
    for a, b in TRICHOTOMY:
        assert unitary_part_dim(tabc(a, b, np.exp(1j)), 16, 48) == 0
    assert unitary_part_dim(make_TA(MonomialParams(random_pure(rng, 3, 2), 3)), 16, 48) == 0


def test_decomposition_json():
    d = canonical_decomposition(tabc(0.8, 0.3), radius=32)
    js = d.to_json(frames=True)
    assert js["dims"] == list(d.dims) and js["mult_S"] == 1
    assert set(js["frames"]) == {"H1", "H0", "Hm1"}
    assert js["exactness_depth"] == d.exactness["steps"]


def test_flipped_matches_display(rng):
    a = random_pure(rng, 2, 3)
    m = 2
    op = make_TA_star(MonomialParams(a, m))
    d = canonical_decomposition(op, "star_canonical", radius=48)
    check_valid(d)
    assert multiplicities(d) == (2, 3)
