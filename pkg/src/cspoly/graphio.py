"""Graphs: DIMACS ingestion, small fixtures, brute-force coloring oracles."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import PreconditionError, ResourceCapExceeded
from .exact import PsdTuple, SymMatrix

MAX_BRUTE_FORCE_VERTICES = 16


class GraphFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset[tuple[int, int]]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise GraphFormatError(f"self-loop at vertex {u}")
            if not (0 <= u < v < self.n):
                raise GraphFormatError(f"edge ({u}, {v}) must satisfy 0 <= u < v < {self.n}")
        if self.labels is not None and len(self.labels) != self.n:
            raise GraphFormatError("one label per vertex is required")

    @classmethod
    def from_edges(cls, n: int, edges, labels=None) -> "Graph":
        norm = set()
        for u, v in edges:
            if u == v:
                raise GraphFormatError(f"self-loop at vertex {u}")
            norm.add((min(u, v), max(u, v)))
        return cls(n, frozenset(norm), tuple(labels) if labels is not None else None)

    @property
    def m(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def adjacent(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def neighbors(self, u: int) -> list[int]:
        return sorted(w for e in self.edges if u in e for w in e if w != u)

    def to_json(self) -> dict:
        out = {"n": self.n, "edges": [list(e) for e in self.sorted_edges()]}
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Graph":
        return cls.from_edges(int(data["n"]), [tuple(e) for e in data["edges"]], data.get("labels"))


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycles need at least 3 vertices")
    return Graph.from_edges(n, [(u, (u + 1) % n) for u in range(n)])


def empty_graph(n: int) -> Graph:
    return Graph(n, frozenset())


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges(10, outer + spokes + inner)


def parse_dimacs(text: str) -> Graph:
    """Parse DIMACS ``.col`` text (``p edge n m`` header, 1-based ``e u v`` lines)."""
    n = None
    declared_m = None
    edges: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] == "c":
            continue
        parts = line.split()
        if parts[0] == "p":
            if n is not None:
                raise GraphFormatError(f"line {lineno}: duplicate problem line")
            if len(parts) != 4 or parts[1] not in ("edge", "col"):
                raise GraphFormatError(f"line {lineno}: malformed header {line!r}")
            try:
                n, declared_m = int(parts[2]), int(parts[3])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: malformed header {line!r}") from None
            if n < 1 or declared_m < 0:
                raise GraphFormatError(f"line {lineno}: malformed header {line!r}")
        elif parts[0] == "e":
            if n is None:
                raise GraphFormatError(f"line {lineno}: edge before the 'p edge' header")
            if len(parts) != 3:
                raise GraphFormatError(f"line {lineno}: malformed edge {line!r}")
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: malformed edge {line!r}") from None
            for w in (u, v):
                if not 1 <= w <= n:
                    raise GraphFormatError(f"line {lineno}: vertex {w} out of range 1..{n}")
            if u == v:
                raise GraphFormatError(f"line {lineno}: self-loop at vertex {u}")
            e = (min(u, v) - 1, max(u, v) - 1)
            if e in edges:
                warnings.warn(f"line {lineno}: duplicate edge {u}-{v} ignored", stacklevel=2)
            edges.add(e)
        else:
            raise GraphFormatError(f"line {lineno}: unknown line type {parts[0]!r}")
    if n is None:
        raise GraphFormatError("missing 'p edge n m' header")
    if declared_m is not None and declared_m != len(edges):
        warnings.warn(f"header declares {declared_m} edges, found {len(edges)} distinct", stacklevel=2)
    return Graph(n, frozenset(edges))


def to_dimacs(g: Graph) -> str:
    lines = [f"p edge {g.n} {g.m}"]
    lines += [f"e {u + 1} {v + 1}" for u, v in g.sorted_edges()]
    return "\n".join(lines) + "\n"


def load_graph(path: str) -> Graph:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json"):
        return Graph.from_json(json.loads(text))
    return parse_dimacs(text)


def is_proper(g: Graph, coloring: Sequence[int]) -> bool:
    return len(coloring) == g.n and all(coloring[u] != coloring[v] for u, v in g.edges)


def find_coloring(g: Graph, t: int) -> list[int] | None:
    """A proper coloring with colors ``0..t-1`` by backtracking, or None."""
    colors = [-1] * g.n
    nbrs = [g.neighbors(u) for u in range(g.n)]

    def place(u: int, used: int) -> bool:
        if u == g.n:
            return True
        # symmetry breaking: a new color is only ever the next unused one
        for c in range(min(t, used + 1)):
            if all(colors[w] != c for w in nbrs[u]):
                colors[u] = c
                if place(u + 1, max(used, c + 1)):
                    return True
        colors[u] = -1
        return False

    return colors if place(0, 0) else None


def chromatic_number(g: Graph, t_max: int | None = None) -> int:
    if g.n > MAX_BRUTE_FORCE_VERTICES:
        raise ResourceCapExceeded(
            f"brute-force coloring is limited to {MAX_BRUTE_FORCE_VERTICES} vertices, got {g.n}"
        )
    limit = g.n if t_max is None else min(t_max, g.n)
    for t in range(1, limit + 1):
        if find_coloring(g, t) is not None:
            return t
    raise ValueError(f"chromatic number exceeds t_max={t_max}")


def game_index(n: int, t: int) -> tuple[tuple[int, int], ...]:
    """Flat index ``u*t + i`` <-> ``(u, i)``."""
    return tuple((u, i) for u in range(n) for i in range(t))


def coloring_vector(g: Graph, coloring: Sequence[int], t: int) -> list[int]:
    if len(coloring) != g.n:
        raise PreconditionError(f"coloring has {len(coloring)} entries for {g.n} vertices")
    if any(not 0 <= c < t for c in coloring):
        raise PreconditionError(f"colors must lie in 0..{t - 1}")
    bad = [(u, v) for u, v in g.sorted_edges() if coloring[u] == coloring[v]]
    if bad:
        raise PreconditionError(f"coloring is not proper: edge {bad[0]} is monochromatic")
    return [1 if coloring[u] == i else 0 for u in range(g.n) for i in range(t)]


def coloring_to_matrix(g: Graph, coloring: Sequence[int], t: int) -> SymMatrix:
    """``A = x x^T`` with ``x_{ui} = 1`` iff ``u`` gets color ``i``."""
    from .blocks import block_residual
    from .exact import ldlt_report
    from .game import L_Gt

    x = coloring_vector(g, coloring, t)
    a = SymMatrix.outer(x, index=game_index(g.n, t))
    if block_residual(a, t) != 0:
        raise AssertionError("coloring matrix violates the block-sum-one constraints")
    if L_Gt(a, g, t) != 0:
        raise AssertionError("coloring matrix has a nonzero penalty")
    if ldlt_report(a).rank != 1:
        raise AssertionError("coloring matrix is not rank one")
    return a


def coloring_tuple(g: Graph, coloring: Sequence[int], t: int, r: int | None = None) -> PsdTuple:
    """Grid tuple whose Gram matrix is ``coloring_to_matrix(...) / n**2``.

    Each ``X_{ui}`` is ``x_{ui}/n`` in the top-left corner of an r×r zero
    matrix; it lies in the grid whenever ``r >= n``.
    """
    r = g.n if r is None else r
    if r < g.n:
        raise PreconditionError(f"the coloring tuple needs r >= n = {g.n}, got r={r}")
    x = coloring_vector(g, coloring, t)
    unit = Fraction(1, g.n)
    mats = tuple(
        SymMatrix.from_entries(r, {(0, 0): unit} if xi else {}) for xi in x
    )
    return PsdTuple(r, mats)
