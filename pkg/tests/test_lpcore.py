import json
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from cspoly.errors import ResourceCapExceeded
from cspoly.lpcore import (
    EQ,
    GE,
    LE,
    LpCertificate,
    LpProblem,
    solve_feasibility,
    verify_certificate,
)


def lp(nvars, rows, nonneg=None, objective=None):
    p = LpProblem(nvars, nonneg=nonneg)
    for coeffs, rel, rhs in rows:
        p.add(coeffs, rel, rhs)
    if objective is not None:
        p.objective = tuple(F(c) for c in objective)
    return p


def test_single_equality():
    c = solve_feasibility(lp(1, [([1], EQ, 1)]))
    assert c.feasible and c.primal == [1]


def test_negative_upper_bound_is_infeasible():
    c = solve_feasibility(lp(1, [([1], LE, -1)]))
    assert not c.feasible
    assert c.farkas == [1]


def test_simplex_point():
    p = lp(2, [([1, 1], EQ, 1), ([1, -1], EQ, 0)])
    assert solve_feasibility(p).primal == [F(1, 2), F(1, 2)]


def test_contradictory_bounds():
    p = lp(2, [([1, 1], GE, 3), ([1, 0], LE, 1), ([0, 1], LE, 1)])
    c = solve_feasibility(p)
    assert not c.feasible and verify_certificate(p, c)


def test_free_variable_objective():
    p = lp(2, [([1, 1], EQ, -3), ([1, 0], GE, -2), ([0, 1], GE, -5)], nonneg=[False, False], objective=[2, 1])
    c = solve_feasibility(p)
    assert c.feasible and c.objective_value == -5 and c.primal == [-2, -1]


def test_unbounded_objective_is_flagged():
    p = lp(1, [([1], GE, 0)], objective=[-1])
    c = solve_feasibility(p)
    assert c.feasible and c.unbounded and c.objective_value is None


def test_no_constraints():
    c = solve_feasibility(LpProblem(3))
    assert c.feasible and c.primal == [0, 0, 0]


def test_degenerate_cycling_example_terminates():
    # Beale's classic cycling instance, as a feasibility problem with an objective
    p = lp(
        4,
        [
            (["1/4", -8, -1, 9], LE, 0),
            (["1/2", -12, "-1/2", 3], LE, 0),
            ([0, 0, 1, 0], LE, 1),
        ],
        objective=["-3/4", 20, "-1/2", 6],
    )
    c = solve_feasibility(p)
    assert c.feasible and c.objective_value == F(-5, 4)


def test_pivot_cap():
    p = lp(2, [([1, 1], EQ, 1), ([1, -1], EQ, 0)])
    with pytest.raises(ResourceCapExceeded):
        solve_feasibility(p, max_pivots=1)


def _random_lp(rng, feasible_by_construction):
    n = rng.randint(1, 5)
    m = rng.randint(1, 5)
    nonneg = [rng.random() < 0.8 for _ in range(n)]
    x0 = [F(rng.randint(0 if nn else -3, 3), rng.randint(1, 3)) for nn in nonneg]
    p = LpProblem(n, nonneg=nonneg)
    for _ in range(m):
        a = [F(rng.randint(-4, 4), rng.randint(1, 2)) for _ in range(n)]
        rel = rng.choice([LE, EQ, GE])
        val = sum(ai * xi for ai, xi in zip(a, x0))
        if feasible_by_construction:
            slack = F(rng.randint(0, 2))
            rhs = val + slack if rel == LE else val - slack if rel == GE else val
        else:
            rhs = F(rng.randint(-5, 5), rng.randint(1, 3))
        p.add(a, rel, rhs)
    if not feasible_by_construction and rng.random() < 0.3:
        # plant a contradiction on a random row
        c = p.constraints[rng.randrange(m)]
        p.add(c.coeffs, LE, c.rhs - 1) if c.relation != LE else p.add(c.coeffs, GE, c.rhs + 1)
    return p


def test_fuzzed_lps_all_verify():
    rng = random.Random(11)
    feasible = infeasible = 0
    for i in range(500):
        planted = i % 2 == 0
        p = _random_lp(rng, planted)
        c = solve_feasibility(p, check=False)
        assert verify_certificate(p, c), p.dumps()
        if planted:
            assert c.feasible
        feasible += c.feasible
        infeasible += not c.feasible
    assert feasible > 250 and infeasible > 30


def test_solver_is_deterministic():
    rng = random.Random(3)
    for _ in range(20):
        p = _random_lp(rng, False)
        assert solve_feasibility(p).to_json() == solve_feasibility(p).to_json()


def test_mutated_certificates_are_rejected():
    p = lp(2, [([1, 1], EQ, 1), ([1, -1], EQ, 0)])
    c = solve_feasibility(p)
    bad = LpCertificate.from_json({**c.to_json(), "primal": ["1/2", "1/3"]})
    assert not verify_certificate(p, bad)
    q = lp(2, [([1, 1], GE, 3), ([1, 0], LE, 1), ([0, 1], LE, 1)])
    d = solve_feasibility(q)
    assert not verify_certificate(q, LpCertificate("infeasible", farkas=[-y for y in d.farkas]))
    assert not verify_certificate(q, LpCertificate("infeasible", farkas=d.farkas[:-1]))
    assert not verify_certificate(q, LpCertificate("feasible", primal=[1, 1]))
    assert not verify_certificate(q, LpCertificate("unknown"))


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_json_roundtrip(data):
    n = data.draw(st.integers(1, 3))
    rows = data.draw(
        st.lists(
            st.tuples(
                st.lists(st.fractions(-3, 3, max_denominator=4), min_size=n, max_size=n),
                st.sampled_from([LE, EQ, GE]),
                st.fractions(-3, 3, max_denominator=4),
            ),
            max_size=4,
        )
    )
    p = lp(n, rows)
    q = LpProblem.from_json(json.loads(p.dumps()))
    assert q.to_json() == p.to_json()
    c = solve_feasibility(p)
    assert LpCertificate.from_json(json.loads(json.dumps(c.to_json()))) == c
