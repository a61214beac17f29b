import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from cspoly.cones import (
    MEMBER,
    SEPARATED,
    VIOLATED,
    AffineAt,
    AffineBt,
    ZeroEntry,
    boundary_witness,
    build_generators,
    cached_generators,
    check_separation,
    conic_membership,
    gram,
    in_dual_certified,
    member_C,
    member_D,
    member_O,
    member_Ostar,
    pairing,
    quad_form,
)
from cspoly.errors import PreconditionError
from cspoly.exact import PsdTuple, SymMatrix, is_psd_exact, trace_inner
from cspoly.gridgen import enum_tuples

HORN = SymMatrix.from_rows(
    [
        [1, -1, 1, 1, -1],
        [-1, 1, -1, 1, 1],
        [1, -1, 1, -1, 1],
        [1, 1, -1, 1, -1],
        [-1, 1, 1, -1, 1],
    ]
)


def m(rows):
    return SymMatrix.from_rows(rows)


def test_gram_examples():
    assert gram(PsdTuple(1, (m([[1]]),))) == m([[1]])
    t = PsdTuple(2, (SymMatrix.diag(["1/2", 0]), SymMatrix.diag([0, "1/2"])))
    assert gram(t) == m([["1/4", 0], [0, "1/4"]])


def test_gram_matches_double_loop():
    for t in enum_tuples(3, 2):
        rows = [[[x for x in row] for row in a.rows()] for a in t.mats]
        assert gram(t).rows() == oracles.gram_rows(rows)
        assert is_psd_exact(gram(t))


def test_generator_examples():
    assert build_generators(1, 1).grams == [m([[1]])]
    assert set(build_generators(2, 1).grams) == {SymMatrix.diag([1, 0]), SymMatrix.diag([0, 1])}


@pytest.mark.parametrize("n, r, tuples, grams", [(4, 2, 44, 20), (6, 3, 2037, 316), (8, 2, 152, 72)])
def test_generator_counts(n, r, tuples, grams):
    gs = build_generators(n, r)
    assert (gs.tuples_seen, len(gs)) == (tuples, grams)
    assert len(set(gs.grams)) == len(gs.grams)
    assert all(gram(t) == g for t, g in zip(gs.provenance, gs.grams))


def test_threaded_generators_match_serial():
    a, b = build_generators(3, 3), build_generators(3, 3, threads=3)
    assert a.grams == b.grams and a.provenance == b.provenance


def test_member_c_examples():
    assert member_C(SymMatrix.diag([1, 2]), 1).member
    assert not member_C(m([[1, 1], [1, 1]]), 1).member
    assert member_C(m([[1, 1], [1, 1]]), 2).member
    v = [1, F(1, 3)]
    assert member_C(SymMatrix.outer(v), 2).status == SEPARATED


def test_member_c_certificates_check():
    for a in [m([[1, 1], [1, 1]]), m([[2, 1], [1, 1]]), m([[1, 2], [2, 1]]), m([[1, -1], [-1, 1]])]:
        for r in (1, 2):
            res = member_C(a, r)
            assert check_separation(res, a)
            if res.member:
                assert res.reconstruct() == a


def test_member_d_examples():
    assert member_D(SymMatrix.identity(2), 2).member
    nd = m([[0, -1], [-1, 0]])
    assert member_D(nd, 1).member
    res = member_D(nd, 2)
    assert res.status == VIOLATED and res.value == F(-1, 2)
    assert pairing(nd, res.witness) == F(-1, 2)
    assert all(member_D(SymMatrix.ones(2), r).member for r in (1, 2, 3))


def test_member_d_find_min_scans_everything():
    nd = m([[0, -1], [-1, 0]])
    res = member_D(nd, 2, find_min=True)
    assert res.checked == enum_tuples(2, 2).count
    assert res.min_value == F(-1, 2)


def test_member_o_examples():
    assert member_O(m([[1, -1], [-1, 1]]), 3).member
    res = member_O(m([[0, -1], [-1, 0]]), 2)
    assert res.status == VIOLATED and res.witness == (F(1, 2), F(1, 2)) and res.value == F(-1, 2)


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_horn_matrix_is_copositive_on_grid(r):
    assert member_O(HORN, r).member
    # oracle: direct evaluation at every grid point
    rows = HORN.rows()
    for x in oracles.simplex_points(5, r):
        assert sum(rows[i][j] * x[i] * x[j] for i in range(5) for j in range(5)) >= 0


def test_member_ostar_examples():
    assert member_Ostar(SymMatrix.identity(2), 1).member
    assert member_Ostar(m([[1, 1], [1, 1]]), 1).status == SEPARATED
    res = member_Ostar(m([[1, 1], [1, 1]]), 2)
    assert res.member and res.reconstruct() == m([[1, 1], [1, 1]])
    assert all(member_Ostar(m([[2, -1], [-1, 2]]), r).status == SEPARATED for r in (1, 2, 3))


def test_separator_is_normalized_and_separates():
    res = member_Ostar(m([[2, -1], [-1, 2]]), 2)
    assert res.separator.max_abs() == 1
    assert check_separation(res, m([[2, -1], [-1, 2]]))
    assert member_O(res.separator, 2).member


def _rand_sym(rng, n, lo=-3, hi=3):
    return SymMatrix.from_entries(n, {(i, j): F(rng.randint(lo, hi), rng.randint(1, 3)) for i in range(n) for j in range(i, n)})


def test_dual_scan_agrees_with_generator_pairing():
    rng = random.Random(5)
    gens = cached_generators(3, 2)
    for _ in range(25):
        mm = _rand_sym(rng, 3)
        expected = all(trace_inner(mm, g) >= 0 for g in gens)
        assert member_D(mm, 2).member is expected


@pytest.mark.parametrize("n", [2, 3])
def test_c1_is_diagonal_nonnegative(n):
    rng = random.Random(n)
    for _ in range(20):
        a = _rand_sym(rng, n, 0, 3)
        if rng.random() < 0.5:
            a = SymMatrix.diag([a[i, i] for i in range(n)])
        assert member_C(a, 1).member is (a.is_diagonal() and a.is_nonnegative())


def test_c2_hull_description_both_directions():
    n = 3
    basis = [SymMatrix.elementary(n, i, i) for i in range(n)]
    basis += [
        SymMatrix.elementary(n, i, i) + SymMatrix.elementary(n, j, j) + SymMatrix.elementary(n, i, j)
        for i in range(n)
        for j in range(i + 1, n)
    ]
    for b in basis:
        assert member_C(b, 2).member
    for g in cached_generators(n, 2):
        assert conic_membership(g, basis).member


def test_dual_certified_matrices_are_in_d():
    rng = random.Random(9)
    for _ in range(15):
        mm = _rand_sym(rng, 2)
        if in_dual_certified(mm):
            assert member_D(mm, 2).member


def test_zero_entry_witness():
    a = m([[1, 0], [0, 1]])
    w = boundary_witness(a, ZeroEntry(0, 1))
    assert w == SymMatrix.elementary(2, 0, 1) and trace_inner(a, w) == 0
    with pytest.raises(PreconditionError):
        boundary_witness(m([[1, 1], [1, 1]]), ZeroEntry(0, 1))


def test_affine_witness_is_psd_and_annihilates():
    t = 2
    a = SymMatrix.ones(2 * t).scale(F(1, t * t))
    for kind in (AffineAt(0, 1, t), AffineBt(1, 0, t)):
        w = boundary_witness(a, kind)
        assert is_psd_exact(w) and not w.is_zero()
        assert trace_inner(a, w) == 0
    with pytest.raises(PreconditionError):
        boundary_witness(SymMatrix.identity(4), AffineAt(0, 1, 2))
    with pytest.raises(PreconditionError):
        boundary_witness(a, AffineAt(1, 1, 2))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.fractions(0, 1, max_denominator=3), min_size=2, max_size=2))
def test_quad_form_matches_direct(x):
    mm = HORN.submatrix([0, 1])
    rows = mm.rows()
    assert quad_form(mm, x) == sum(rows[i][j] * x[i] * x[j] for i in range(2) for j in range(2))


@pytest.mark.parametrize("r", [1, 2])
def test_rank_one_obstruction_for_small_second_coordinate(r):
    # vv^T with v = (1, 1/(r+1)) is rank one, so every tuple in a representation has
    # X_2 = X_1/(r+1) and Tr X_1 = (r+1)/(r+2); no level-(r+1) tuple does that
    a = SymMatrix.outer([1, F(1, r + 1)])
    scaled = [g for g in cached_generators(2, r + 1) if g[0, 0] and g.scale(1 / g[0, 0]) == a]
    assert scaled == []
    assert member_C(a, r + 1).status == SEPARATED


def test_vvt_with_third_enters_at_level_four():
    a = SymMatrix.outer([1, F(1, 3)])
    assert [member_C(a, r).member for r in (2, 3, 4)] == [False, False, True]
