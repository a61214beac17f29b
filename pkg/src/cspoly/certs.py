"""JSON certificates (schema 1) and their solver-independent verification."""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Any

from .cones import (
    MEMBER,
    SEPARATED,
    VIOLATED,
    DualCheck,
    SeparationResult,
    gram,
    member_D,
    member_O,
    pairing,
    quad_form,
)
from .exact import PsdTuple, SymMatrix, format_rational, to_rational, trace_inner
from .game import GameCell, LambdaResult, verify_game_cell, verify_game_farkas
from .graphio import Graph
from .gridgen import DEFAULT_MAX_TUPLES
from .lpcore import LpCertificate, LpProblem, verify_certificate

SCHEMA = 1


class CertificateError(ValueError):
    pass


def _vec(v) -> list[str]:
    return [format_rational(x) for x in v]


# -- builders ----------------------------------------------------------------


def conic_certificate(kind: str, a: SymMatrix, r: int, res: SeparationResult, mode: str = "reduced") -> dict:
    """``kind`` is ``member-c`` (generators are tuple Grams) or ``member-ostar`` (``vv^T``)."""
    out: dict[str, Any] = {"schema": SCHEMA, "kind": kind, "r": r, "mode": mode, "matrix": a.to_json()}
    out["status"] = res.status
    if res.status == MEMBER:
        weights = []
        for g, w in sorted(res.weights.items()):
            entry = {"weight": format_rational(w), "gram": res.generators[g].to_json()}
            if res.provenance:
                src = res.provenance[g]
                entry["source"] = src.to_json() if isinstance(src, PsdTuple) else _vec(src)
            weights.append(entry)
        out["weights"] = weights
    else:
        out["separator"] = res.separator.to_json()
        out["separator_value"] = format_rational(trace_inner(res.separator, a))
    return out


def dual_certificate(kind: str, m: SymMatrix, r: int, res: DualCheck, mode: str = "reduced") -> dict:
    """``kind`` is ``member-d`` (tuple witnesses) or ``member-o`` (simplex points)."""
    out: dict[str, Any] = {
        "schema": SCHEMA,
        "kind": kind,
        "r": r,
        "mode": mode,
        "matrix": m.to_json(),
        "status": res.status,
        "checked": res.checked,
    }
    if res.status == VIOLATED:
        out["value"] = format_rational(res.value)
        out["witness"] = res.witness.to_json() if isinstance(res.witness, PsdTuple) else _vec(res.witness)
    if res.min_value is not None:
        out["min_value"] = format_rational(res.min_value)
        mw = res.min_witness
        out["min_witness"] = mw.to_json() if isinstance(mw, PsdTuple) else _vec(mw)
    return out


def game_certificate(res: LambdaResult, mode: str = "reduced") -> dict:
    return {
        "schema": SCHEMA,
        "kind": "game",
        "variant": res.variant,
        "graph": res.graph.to_json(),
        "k": res.k,
        "r": res.r,
        "t_max": res.t_max,
        "mode": mode,
        "t": res.t,
        "status": res.status,
        "cells": [c.to_json() for c in res.cells],
    }


def cell_certificate(cell: GameCell, mode: str = "reduced") -> dict:
    """A single feasible cell, e.g. one built straight from a coloring."""
    return {
        "schema": SCHEMA,
        "kind": "game-cell",
        "graph": cell.graph.to_json(),
        "mode": mode,
        "cell": cell.to_json(),
    }


def lp_certificate(p: LpProblem, c: LpCertificate) -> dict:
    return {"schema": SCHEMA, "kind": "lp", "problem": p.to_json(), "certificate": c.to_json()}


# -- verification --------------------------------------------------------------


def _in_scalar_grid(v: list[Fraction], n: int, r: int) -> bool:
    if len(v) != n or any(x < 0 for x in v) or sum(v) != 1:
        return False
    d = 1
    for x in v:
        d = lcm(d, x.denominator)
    return d <= r


def _cell_from_json(g: Graph, data: dict) -> GameCell:
    feasible = data["status"] == "feasible"
    cell = GameCell(g, int(data["t"]), int(data["k"]), int(data["r"]), data["variant"], feasible)
    if feasible:
        cell.weights = [(to_rational(w["weight"]), PsdTuple.from_json(w["tuple"])) for w in data["weights"]]
        cell.matrix = SymMatrix.from_json(data["matrix"])
    else:
        cell.farkas = [to_rational(y) for y in data["farkas"]]
    return cell


def check_problem(cert: dict, problem: Any) -> None:
    """Raise if ``problem`` (matrix, graph or LP) disagrees with the certificate's own copy."""
    if problem is None:
        return
    kind = cert["kind"]
    if kind in ("game", "game-cell"):
        if not isinstance(problem, Graph):
            raise CertificateError("game certificates are checked against a graph")
        if Graph.from_json(cert["graph"]) != problem:
            raise CertificateError("certificate graph differs from the problem graph")
    elif kind == "lp":
        if not isinstance(problem, LpProblem):
            raise CertificateError("LP certificates are checked against an LP problem")
        if LpProblem.from_json(cert["problem"]).to_json() != problem.to_json():
            raise CertificateError("certificate LP differs from the problem LP")
    else:
        if not isinstance(problem, SymMatrix):
            raise CertificateError("cone certificates are checked against a matrix")
        mine = SymMatrix.from_json(cert["matrix"])
        if mine.dim != problem.dim:
            raise CertificateError(f"dimension mismatch: certificate {mine.dim}, problem {problem.dim}")
        if mine != problem:
            raise CertificateError("certificate matrix differs from the problem matrix")


def verify(cert: dict, problem: Any = None, max_tuples: int = DEFAULT_MAX_TUPLES) -> bool:
    """Exact re-check of any certificate emitted by this package."""
    if cert.get("schema") != SCHEMA:
        raise CertificateError(f"unsupported certificate schema {cert.get('schema')!r}")
    check_problem(cert, problem)
    kind = cert["kind"]
    mode = cert.get("mode", "reduced")
    if kind == "lp":
        return verify_certificate(LpProblem.from_json(cert["problem"]), LpCertificate.from_json(cert["certificate"]))
    if kind == "game":
        return _verify_game(cert, mode, max_tuples)
    if kind == "game-cell":
        g = Graph.from_json(cert["graph"])
        cell = _cell_from_json(g, cert["cell"])
        return cell.feasible and verify_game_cell(cell, mode)

    a = SymMatrix.from_json(cert["matrix"])
    r = int(cert["r"])
    status = cert["status"]
    if kind in ("member-c", "member-ostar"):
        if status == MEMBER:
            acc = SymMatrix.zeros(a.dim)
            for entry in cert["weights"]:
                w = to_rational(entry["weight"])
                g = SymMatrix.from_json(entry["gram"])
                if w < 0 or g.dim != a.dim:
                    return False
                if kind == "member-c":
                    src = PsdTuple.from_json(entry["source"])
                    if src.r > r or src.problems(mode) or gram(src) != g:
                        return False
                else:
                    v = [to_rational(x) for x in entry["source"]]
                    if not _in_scalar_grid(v, a.dim, r) or SymMatrix.outer(v) != g:
                        return False
                acc = acc + g.scale(w)
            return acc == a
        if status == SEPARATED:
            m = SymMatrix.from_json(cert["separator"])
            if m.dim != a.dim or m.max_abs() != 1 or trace_inner(m, a) >= 0:
                return False
            dual = member_D(m, r, mode, max_tuples) if kind == "member-c" else member_O(m, r)
            return dual.member
        return False
    if kind in ("member-d", "member-o"):
        if status == VIOLATED:
            if kind == "member-d":
                t = PsdTuple.from_json(cert["witness"])
                if t.n != a.dim or t.r > r or t.problems(mode):
                    return False
                v = pairing(a, t)
            else:
                x = [to_rational(c) for c in cert["witness"]]
                if not _in_scalar_grid(x, a.dim, r):
                    return False
                v = quad_form(a, x)
            return v < 0 and v == to_rational(cert["value"])
        if status == MEMBER:
            dual = member_D(a, r, mode, max_tuples) if kind == "member-d" else member_O(a, r)
            return dual.member
        return False
    raise CertificateError(f"unknown certificate kind {kind!r}")


def _verify_game(cert: dict, mode: str, max_tuples: int) -> bool:
    g = Graph.from_json(cert["graph"])
    k, r, t_max = int(cert["k"]), int(cert["r"]), int(cert["t_max"])
    variant = cert["variant"]
    cells = cert["cells"]
    t_found = cert["t"]
    expected = list(range(1, (t_found if t_found is not None else t_max) + 1))
    if [int(c["t"]) for c in cells] != expected:
        return False
    for data in cells:
        if int(data["k"]) != k or int(data["r"]) != r or data["variant"] != variant:
            return False
        cell = _cell_from_json(g, data)
        last = cell.t == t_found
        if cell.feasible != last:
            return False
        if cell.feasible:
            if not verify_game_cell(cell, mode):
                return False
        elif not verify_game_farkas(g, cell.t, k, r, variant, cell.farkas, mode, max_tuples):
            return False
    return (cert["status"] == "feasible") == (t_found is not None)
