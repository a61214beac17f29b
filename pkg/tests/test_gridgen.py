from fractions import Fraction as F
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from cspoly.errors import ResourceCapExceeded
from cspoly.exact import SymMatrix
from cspoly.gridgen import (
    count_bound,
    enum_psd_matrices,
    enum_scalar_grid,
    enum_tuples,
    gamma,
    merge_partitions,
    tuple_sort_key,
)


@pytest.mark.parametrize("n, r", [(1, 1), (2, 1), (2, 2), (3, 2), (3, 3), (4, 2)])
def test_scalar_grid_matches_oracle(n, r):
    pts = enum_scalar_grid(n, r)
    assert set(pts) == oracles.simplex_points(n, r)
    assert pts == sorted(pts)


def test_scalar_grid_single_level_count():
    # Δ(n, 1) are the n unit vectors
    assert len(enum_scalar_grid(5, 1)) == 5
    assert len(enum_scalar_grid(3, 2)) == 3 + comb(4, 2) - 3


@pytest.mark.parametrize("r, expected", [(1, 2), (2, 8)])
def test_gamma_small(r, expected):
    assert gamma(r) == expected
    assert gamma(r) == len(oracles.psd_matrices(r))


def test_gamma_three_matches_oracle():
    got = {tuple(tuple(row) for row in m.rows()) for m in enum_psd_matrices(3)}
    assert got == set(oracles.psd_matrices(3))
    assert gamma(3) == 84


@pytest.mark.parametrize("n, r", [(1, 1), (2, 1), (3, 1), (2, 2), (3, 2), (4, 2), (2, 3)])
def test_tuple_grid_matches_cross_product(n, r):
    grid = enum_tuples(n, r)
    got = [tuple(tuple(tuple(row) for row in m.rows()) for m in t.mats) for t in grid]
    want = oracles.grid_tuples(n, r)
    assert len(got) == len(set(got)) == grid.count == len(want)
    assert set(got) == set(want)


@pytest.mark.parametrize("n, r", [(1, 1), (2, 1), (2, 2), (3, 2), (4, 2), (5, 2), (3, 3)])
def test_count_respects_bound(n, r):
    assert enum_tuples(n, r).count <= count_bound(n, r)


def test_known_counts():
    assert [enum_tuples(n, 2).count for n in (2, 3, 4)] == [14, 27, 44]
    assert enum_tuples(9, 3).count == 5607


def test_stream_is_sorted_and_valid():
    tuples = list(enum_tuples(3, 2))
    keys = [tuple_sort_key(t) for t in tuples]
    assert keys == sorted(keys)
    assert all(t.problems() == [] for t in tuples)


@pytest.mark.parametrize("n, r", [(2, 2), (3, 2), (3, 3)])
def test_partitions_reproduce_full_stream(n, r):
    grid = enum_tuples(n, r)
    parts = [list(grid.stream(tr)) for tr in grid.partitions()]
    assert [len(p) for p in parts] == [grid.partition_count(tr) for tr in grid.partitions()]
    assert merge_partitions(parts) == list(enum_tuples(n, r))


def test_padding_is_monotone():
    # every level-r tuple padded to r+1 is a level-(r+1) tuple
    bigger = set(enum_tuples(2, 3))
    for t in enum_tuples(2, 2):
        assert t.pad(3) in bigger


def test_cap_is_checked_before_streaming():
    grid = enum_tuples(3, 2, max_tuples=10)
    with pytest.raises(ResourceCapExceeded):
        next(iter(grid))
    assert grid.emitted == 0


def test_common_denominator_mode_is_smaller():
    assert gamma(3, "common") < gamma(3, "reduced")
    common = {m for m in enum_psd_matrices(3, mode="common")}
    assert common <= set(enum_psd_matrices(3))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3))
def test_scalar_grid_points_are_in_simplex(n, r):
    for x in enum_scalar_grid(n, r):
        assert sum(x) == 1 and min(x) >= 0
        assert any(all((v * s).denominator == 1 for v in x) for s in range(1, r + 1))
