"""Exact rational LP feasibility: two-phase simplex with Bland's rule.

Every answer carries a certificate.  Feasible problems return a primal point
satisfying all constraints exactly; infeasible ones return Farkas multipliers
``y`` (one per constraint) with

* ``y_i >= 0`` on ``<=`` rows, ``y_i <= 0`` on ``>=`` rows, free on ``=`` rows,
* ``c = sum_i y_i a_i`` nonnegative on sign-constrained variables and zero on
  free ones,
* ``d = sum_i y_i b_i < 0``.

Any feasible ``x`` would give ``0 <= c.x <= d < 0``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .errors import ResourceCapExceeded
from .exact import format_rational, to_rational

LE, EQ, GE = "<=", "=", ">="
RELATIONS = (LE, EQ, GE)
DEFAULT_MAX_PIVOTS = 10**6

_ZERO = Fraction(0)


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[Fraction, ...]
    relation: str
    rhs: Fraction

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}, got {self.relation!r}")

    def lhs(self, x: Sequence[Fraction]) -> Fraction:
        return sum((a * v for a, v in zip(self.coeffs, x) if a), _ZERO)

    def holds(self, x: Sequence[Fraction]) -> bool:
        v = self.lhs(x)
        if self.relation == LE:
            return v <= self.rhs
        if self.relation == GE:
            return v >= self.rhs
        return v == self.rhs


@dataclass
class LpProblem:
    num_vars: int
    constraints: list[Constraint] = field(default_factory=list)
    nonneg: list[bool] | None = None
    objective: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        if self.nonneg is None:
            self.nonneg = [True] * self.num_vars
        if len(self.nonneg) != self.num_vars:
            raise ValueError("nonneg mask length must equal the number of variables")
        for c in self.constraints:
            if len(c.coeffs) != self.num_vars:
                raise ValueError("constraint coefficient vector has the wrong length")
        if self.objective is not None and len(self.objective) != self.num_vars:
            raise ValueError("objective has the wrong length")

    def add(self, coeffs: Sequence[Any], relation: str, rhs: Any) -> None:
        coeffs = tuple(to_rational(a) for a in coeffs)
        if len(coeffs) != self.num_vars:
            raise ValueError(f"expected {self.num_vars} coefficients, got {len(coeffs)}")
        self.constraints.append(Constraint(coeffs, relation, to_rational(rhs)))

    def to_json(self) -> dict:
        out = {
            "vars": self.num_vars,
            "nonneg": list(self.nonneg),
            "constraints": [
                {
                    "coeffs": [format_rational(a) for a in c.coeffs],
                    "rel": c.relation,
                    "rhs": format_rational(c.rhs),
                }
                for c in self.constraints
            ],
        }
        if self.objective is not None:
            out["objective"] = [format_rational(a) for a in self.objective]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "LpProblem":
        p = cls(int(data["vars"]), nonneg=[bool(b) for b in data.get("nonneg", [True] * int(data["vars"]))])
        for c in data["constraints"]:
            p.add(c["coeffs"], c["rel"], c["rhs"])
        if data.get("objective") is not None:
            p.objective = tuple(to_rational(a) for a in data["objective"])
        return p

    def dumps(self) -> str:
        return json.dumps(self.to_json())


FEASIBLE = "feasible"
INFEASIBLE = "infeasible"


@dataclass
class LpCertificate:
    status: str
    primal: list[Fraction] | None = None
    farkas: list[Fraction] | None = None
    pivots: int = 0
    objective_value: Fraction | None = None
    unbounded: bool = False

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE

    def to_json(self) -> dict:
        out: dict[str, Any] = {"status": self.status, "pivots": self.pivots}
        if self.primal is not None:
            out["primal"] = [format_rational(v) for v in self.primal]
        if self.farkas is not None:
            out["farkas"] = [format_rational(v) for v in self.farkas]
        if self.objective_value is not None:
            out["objective_value"] = format_rational(self.objective_value)
        if self.unbounded:
            out["unbounded"] = True
        return out

    @classmethod
    def from_json(cls, data: dict) -> "LpCertificate":
        def vec(key):
            v = data.get(key)
            return None if v is None else [to_rational(a) for a in v]

        ov = data.get("objective_value")
        return cls(
            status=data["status"],
            primal=vec("primal"),
            farkas=vec("farkas"),
            pivots=int(data.get("pivots", 0)),
            objective_value=None if ov is None else to_rational(ov),
            unbounded=bool(data.get("unbounded", False)),
        )


class UnverifiedCertificate(RuntimeError):
    """The solver produced a certificate that failed its own exact re-check."""


def verify_certificate(p: LpProblem, c: LpCertificate) -> bool:
    """Re-check ``c`` against ``p`` using only exact arithmetic on the problem data."""
    if c.status == FEASIBLE:
        x = c.primal
        if x is None or len(x) != p.num_vars:
            return False
        if any(nn and v < 0 for nn, v in zip(p.nonneg, x)):
            return False
        return all(con.holds(x) for con in p.constraints)
    if c.status == INFEASIBLE:
        y = c.farkas
        if y is None or len(y) != len(p.constraints):
            return False
        for yi, con in zip(y, p.constraints):
            if con.relation == LE and yi < 0:
                return False
            if con.relation == GE and yi > 0:
                return False
        agg = [_ZERO] * p.num_vars
        d = _ZERO
        for yi, con in zip(y, p.constraints):
            if not yi:
                continue
            d += yi * con.rhs
            for j, a in enumerate(con.coeffs):
                if a:
                    agg[j] += yi * a
        for nn, cj in zip(p.nonneg, agg):
            if nn and cj < 0:
                return False
            if not nn and cj != 0:
                return False
        return d < 0
    return False


class _Tableau:
    """Dense simplex tableau over Fractions in equality standard form."""

    def __init__(self, rows: list[list[Fraction]], rhs: list[Fraction], basis: list[int], max_pivots: int):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.ncols = len(rows[0]) if rows else 0
        self.max_pivots = max_pivots
        self.pivots = 0

    def set_costs(self, costs: list[Fraction]) -> None:
        # reduced costs d_j = c_j - c_B . T[:, j] and current value c_B . b
        d = list(costs)
        val = _ZERO
        for row, b, bv in zip(self.rows, self.rhs, self.basis):
            cb = costs[bv]
            if cb:
                val += cb * b
                for j, a in enumerate(row):
                    if a:
                        d[j] -= cb * a
        self.d = d
        self.value = val

    def pivot(self, pr: int, pc: int) -> None:
        self.pivots += 1
        if self.pivots > self.max_pivots:
            raise ResourceCapExceeded(f"simplex pivot limit of {self.max_pivots} exceeded")
        prow = self.rows[pr]
        piv = prow[pc]
        if piv != 1:
            inv = 1 / piv
            prow = [a * inv if a else a for a in prow]
            self.rows[pr] = prow
            self.rhs[pr] *= inv
        nz = [j for j, a in enumerate(prow) if a]
        b = self.rhs[pr]
        for i, row in enumerate(self.rows):
            if i == pr:
                continue
            f = row[pc]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
                self.rhs[i] -= f * b
        f = self.d[pc]
        if f:
            d = self.d
            for j in nz:
                d[j] -= f * prow[j]
            self.value += f * b
        self.basis[pr] = pc

    def run(self, allowed: Sequence[bool]) -> bool:
        """Bland's-rule minimization; returns False if unbounded."""
        while True:
            pc = next((j for j, dj in enumerate(self.d) if dj < 0 and allowed[j]), None)
            if pc is None:
                return True
            best = None
            for i, row in enumerate(self.rows):
                a = row[pc]
                if a > 0:
                    key = (self.rhs[i] / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return False
            self.pivot(best[1], pc)


def solve_feasibility(p: LpProblem, max_pivots: int = DEFAULT_MAX_PIVOTS, check: bool = True) -> LpCertificate:
    """Decide feasibility of ``p`` exactly; the certificate is verified before return.

    If ``p.objective`` is set, a second phase minimizes it over the feasible set
    (diagnostics only).
    """
    m = len(p.constraints)
    # column layout: original variables (free ones split in two), slacks, artificials
    col_of: list[tuple[int, int]] = []  # (original var, sign)
    for j in range(p.num_vars):
        col_of.append((j, 1))
        if not p.nonneg[j]:
            col_of.append((j, -1))
    n_struct = len(col_of)
    slack_rows = [i for i, c in enumerate(p.constraints) if c.relation != EQ]
    n_slack = len(slack_rows)
    art0 = n_struct + n_slack
    ncols = art0 + m

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    signs: list[int] = []
    slack_col = {i: n_struct + k for k, i in enumerate(slack_rows)}
    for i, con in enumerate(p.constraints):
        row = [_ZERO] * ncols
        for c, (j, s) in enumerate(col_of):
            a = con.coeffs[j]
            if a:
                row[c] = a if s > 0 else -a
        if con.relation == LE:
            row[slack_col[i]] = Fraction(1)
        elif con.relation == GE:
            row[slack_col[i]] = Fraction(-1)
        b = con.rhs
        sign = 1
        if b < 0:
            sign = -1
            row = [-a for a in row]
            b = -b
        row[art0 + i] = Fraction(1)
        rows.append(row)
        rhs.append(b)
        signs.append(sign)

    if m == 0:
        primal = [_ZERO] * p.num_vars
        cert = LpCertificate(FEASIBLE, primal=primal)
        if p.objective is not None:
            cert = _phase_two_empty(p, cert)
        return cert

    tab = _Tableau(rows, rhs, list(range(art0, ncols)), max_pivots)
    tab.set_costs([_ZERO] * art0 + [Fraction(1)] * m)
    tab.run([True] * ncols)

    if tab.value > 0:
        # simplex multipliers pi = c_B B^-1; B^-1 sits in the artificial columns
        pi = [_ZERO] * m
        for row, bv in zip(tab.rows, tab.basis):
            if bv >= art0:
                for i in range(m):
                    a = row[art0 + i]
                    if a:
                        pi[i] += a
        farkas = [-pi[i] * signs[i] for i in range(m)]
        cert = LpCertificate(INFEASIBLE, farkas=farkas, pivots=tab.pivots)
    else:
        cert = LpCertificate(FEASIBLE, primal=_extract(tab, col_of, p.num_vars), pivots=tab.pivots)
        if p.objective is not None:
            cert = _phase_two(p, tab, col_of, art0, cert)

    if check and not verify_certificate(p, cert):
        raise UnverifiedCertificate("solver certificate failed exact verification")
    return cert


def _extract(tab: _Tableau, col_of, nvars: int) -> list[Fraction]:
    x = [_ZERO] * nvars
    for bv, b in zip(tab.basis, tab.rhs):
        if bv < len(col_of) and b:
            j, s = col_of[bv]
            x[j] += b if s > 0 else -b
    return x


def _phase_two(p: LpProblem, tab: _Tableau, col_of, art0: int, cert: LpCertificate) -> LpCertificate:
    # drive zero-level artificials out of the basis where possible
    for i, bv in enumerate(tab.basis):
        if bv >= art0:
            pc = next((j for j in range(art0) if tab.rows[i][j]), None)
            if pc is not None:
                tab.d = [_ZERO] * tab.ncols
                tab.value = _ZERO
                tab.pivot(i, pc)
    costs = [_ZERO] * tab.ncols
    for c, (j, s) in enumerate(col_of):
        costs[c] = p.objective[j] if s > 0 else -p.objective[j]
    tab.set_costs(costs)
    bounded = tab.run([j < art0 for j in range(tab.ncols)])
    x = _extract(tab, col_of, p.num_vars)
    val = sum((a * v for a, v in zip(p.objective, x)), _ZERO)
    return LpCertificate(
        FEASIBLE, primal=x, pivots=tab.pivots, objective_value=None if not bounded else val, unbounded=not bounded
    )


def _phase_two_empty(p: LpProblem, cert: LpCertificate) -> LpCertificate:
    # no constraints: bounded only if every coefficient keeps x = 0 optimal
    unbounded = any(
        (c < 0) if nn else (c != 0) for c, nn in zip(p.objective, p.nonneg)
    )
    return LpCertificate(
        FEASIBLE, primal=cert.primal, objective_value=None if unbounded else _ZERO, unbounded=unbounded
    )
