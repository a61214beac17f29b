"""LP relaxations of the quantum coloring game over the cones C_r.

``lambda_kr`` searches the smallest ``t`` for which some ``A`` in
``C_r^{nt}`` has all block sums within ``1/k`` of one and penalty
``L_{G,t}(A) <= 1/k``.  ``Lambda_kr`` does the same for correlation matrices
of size ``2nt`` (Alice's block first, then Bob's), penalizing the projected
correlation with the game's losing events.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .blocks import block_residual, block_sums, num_blocks
from .cones import GeneratorSet, cached_generators, gram
from .errors import PreconditionError
from .exact import PsdTuple, SymMatrix, format_rational
from .graphio import Graph, coloring_tuple, game_index
from .gridgen import DEFAULT_MAX_TUPLES
from .lpcore import DEFAULT_MAX_PIVOTS, GE, LE, LpProblem, solve_feasibility

log = logging.getLogger(__name__)

_ZERO = Fraction(0)

VARIANT_Q = "q"
VARIANT_QA = "qa"
VARIANTS = (VARIANT_Q, VARIANT_QA)


def corr_index(n: int, t: int) -> tuple[tuple[str, int, int], ...]:
    """Flat index of a correlation matrix: Alice's ``(u, i)`` pairs, then Bob's."""
    return tuple((side, u, i) for side in ("X", "Y") for u in range(n) for i in range(t))


def _check_dim(a: SymMatrix, g: Graph, t: int, factor: int = 1) -> None:
    if a.dim != factor * g.n * t:
        raise ValueError(
            f"matrix of dimension {a.dim} does not match n={g.n}, t={t}"
            + (" (correlation layout)" if factor == 2 else "")
        )


def L_Gt(a: SymMatrix, g: Graph, t: int) -> Fraction:
    """Penalty ``sum_{u, i != j} A[ui, uj] + sum_{uv in E, i} A[ui, vi]``; each edge once."""
    _check_dim(a, g, t)
    total = _ZERO
    for u in range(g.n):
        for i in range(t):
            for j in range(i + 1, t):
                total += 2 * a[u * t + i, u * t + j]
    for u, v in g.sorted_edges():
        for i in range(t):
            total += a[u * t + i, v * t + i]
    return total


def affine_At_residual(a: SymMatrix, t: int) -> Fraction:
    """``max_{u,v} |sum_{i,j} A[ui, vj] - 1|``."""
    return block_residual(a, t)


def build_Z(n: int, t: int) -> SymMatrix:
    """``I + J`` of size ``nt``, labelled by ``(vertex, color)``."""
    return (SymMatrix.identity(n * t) + SymMatrix.ones(n * t)).with_index(game_index(n, t))


def project(r: SymMatrix, n: int, t: int) -> list[list[Fraction]]:
    """Off-diagonal block of a correlation matrix: ``P[ui][vj] = R[(X,u,i), (Y,v,j)]``."""
    if r.dim != 2 * n * t:
        raise ValueError(f"correlation matrix must have dimension {2 * n * t}, got {r.dim}")
    nt = n * t
    return [[r[a, nt + b] for b in range(nt)] for a in range(nt)]


def script_L(p: Sequence[Sequence[Fraction]], g: Graph, t: int) -> Fraction:
    """Losing probability mass ``sum_{u, i != j} P(i,j|u,u) + sum_{uv in E, i} P(i,i|u,v)``.

    ``p[u*t+i][v*t+j]`` holds ``P(i, j | u, v)``; edges are read with ``u < v``.
    """
    nt = g.n * t
    if len(p) != nt or any(len(row) != nt for row in p):
        raise ValueError(f"correlation array must be {nt}x{nt}")
    total = _ZERO
    for u in range(g.n):
        for i in range(t):
            for j in range(t):
                if i != j:
                    total += p[u * t + i][u * t + j]
    for u, v in g.sorted_edges():
        for i in range(t):
            total += p[u * t + i][v * t + i]
    return total


def correlation_from_coloring(g: Graph, coloring: Sequence[int], t: int) -> list[list[Fraction]]:
    """Deterministic shared-coloring strategy: both players answer ``c(u)``."""
    one, zero = Fraction(1), Fraction(0)
    return [
        [one if coloring[u] == i and coloring[v] == j else zero for v in range(g.n) for j in range(t)]
        for u in range(g.n)
        for i in range(t)
    ]


def doubled(a: SymMatrix) -> SymMatrix:
    """``[[A, A], [A, A]]``."""
    n = a.dim
    entries = {}
    for i, j, v in a.items():
        if v:
            for di in (0, n):
                for dj in (0, n):
                    p, q = i + di, j + dj
                    entries[(min(p, q), max(p, q))] = v
    return SymMatrix.from_entries(2 * n, entries)


def doubled_tuple(t: PsdTuple) -> PsdTuple:
    """``(X/2, X/2)``: its Gram matrix is ``doubled(gram(X)) / 4``, with denominators at most ``2r``."""
    half = Fraction(1, 2)
    mats = tuple(x.scale(half).pad(2 * t.r) for x in t.mats)
    return PsdTuple(2 * t.r, mats + mats)


# -- interior perturbation ---------------------------------------------------


def perturbation_epsilon(n: int, t: int, m: int, k: int, edge_factor: int = 1) -> Fraction:
    """``min{1/(k(t^2+t-1)), 1/(k(nt^2 - nt + edge_factor*m*t))}``, kept below one.

    ``edge_factor=1`` matches ``L_{G,t}(I+J)`` exactly; ``edge_factor=2`` is the
    more conservative constant.
    """
    if min(n, t, k) < 1:
        raise ValueError("n, t and k must be positive")
    candidates = [Fraction(1, k * (t * t + t - 1))]
    denom = n * t * t - n * t + edge_factor * m * t
    if denom > 0:
        candidates.append(Fraction(1, k * denom))
    eps = min(candidates)
    return eps if eps < 1 else Fraction(1, 2)


def perturb_interior(a: SymMatrix, g: Graph, t: int, k: int, edge_factor: int = 1) -> SymMatrix:
    """``(1 - eps) A + eps (I + J)`` for a winning-strategy matrix ``A``."""
    _check_dim(a, g, t)
    if affine_At_residual(a, t) != 0:
        raise PreconditionError("matrix is not in the block-sum-one space")
    if L_Gt(a, g, t) != 0:
        raise PreconditionError("matrix has a nonzero penalty")
    eps = perturbation_epsilon(g.n, t, g.m, k, edge_factor)
    z = a.scale(1 - eps) + build_Z(g.n, t).scale(eps)
    z = z.with_index(game_index(g.n, t))
    bound = Fraction(1, k)
    if affine_At_residual(z, t) > bound or L_Gt(z, g, t) > bound:
        raise AssertionError("perturbed matrix violates the relaxed constraints")
    return z


# -- game LPs --------------------------------------------------------------------


def game_penalty(a: SymMatrix, g: Graph, t: int, variant: str) -> Fraction:
    if variant == VARIANT_Q:
        return L_Gt(a, g, t)
    if variant == VARIANT_QA:
        _check_dim(a, g, t, 2)
        return script_L(project(a, g.n, t), g, t)
    raise ValueError(f"unknown variant {variant!r}")


def _feature_fn(g: Graph, t: int, variant: str):
    """Map a Gram matrix to (block sums over pairs, penalty), reading only nonzero entries."""
    nt = g.n * t
    nblocks = g.n if variant == VARIANT_Q else 2 * g.n
    pairs = [(u, v) for u in range(nblocks) for v in range(u, nblocks)]
    pair_pos = {uv: k for k, uv in enumerate(pairs)}
    edges = g.edges

    def penalty_weight(i: int, j: int) -> int:
        # coefficient of the stored entry (i <= j) in the penalty
        if variant == VARIANT_Q:
            (u, a), (v, b) = divmod(i, t), divmod(j, t)
            if u == v:
                return 2 if a != b else 0
            return 1 if a == b and (u, v) in edges else 0
        if i >= nt or j < nt:
            return 0
        (u, a), (v, b) = divmod(i, t), divmod(j - nt, t)
        if u == v:
            return 1 if a != b else 0
        return 1 if a == b and u < v and (u, v) in edges else 0

    def features(gm: SymMatrix) -> tuple:
        sums = [_ZERO] * len(pairs)
        pen = _ZERO
        for i, j, val in gm.items():
            if not val:
                continue
            u, v = i // t, j // t
            w = 2 if (u == v and i != j) else 1
            sums[pair_pos[(u, v)]] += w * val
            c = penalty_weight(i, j)
            if c:
                pen += c * val
        return tuple(sums) + (pen,)

    return pairs, features


@dataclass
class GameCell:
    """Outcome of the LP at one ``(t, k, r)`` for one variant."""

    graph: Graph
    t: int
    k: int
    r: int
    variant: str
    feasible: bool
    weights: list[tuple[Fraction, PsdTuple]] = field(default_factory=list)
    matrix: SymMatrix | None = None
    farkas: list[Fraction] | None = None
    generators: int = 0
    columns: int = 0

    def to_json(self) -> dict:
        out = {
            "t": self.t,
            "k": self.k,
            "r": self.r,
            "variant": self.variant,
            "status": "feasible" if self.feasible else "infeasible",
            "generators": self.generators,
            "columns": self.columns,
        }
        if self.feasible:
            out["weights"] = [{"weight": format_rational(w), "tuple": tp.to_json()} for w, tp in self.weights]
            out["matrix"] = self.matrix.to_json()
        else:
            out["farkas"] = [format_rational(y) for y in self.farkas]
        return out


def game_rows(g: Graph, t: int, k: int, variant: str) -> list[tuple[tuple[int, int] | None, str, Fraction]]:
    """Row layout shared by the solver and the verifier: ``(pair or None, relation, rhs)``."""
    nblocks = g.n if variant == VARIANT_Q else 2 * g.n
    slack = Fraction(1, k)
    rows = []
    for u in range(nblocks):
        for v in range(u, nblocks):
            rows.append(((u, v), LE, 1 + slack))
            rows.append(((u, v), GE, 1 - slack))
    rows.append((None, LE, slack))
    return rows


def _row_coeff(row, pairs_pos, feat) -> Fraction:
    pair = row[0]
    return feat[-1] if pair is None else feat[pairs_pos[pair]]


def solve_game(
    g: Graph,
    t: int,
    k: int,
    r: int,
    variant: str = VARIANT_Q,
    mode: str = "reduced",
    max_tuples: int = DEFAULT_MAX_TUPLES,
    max_pivots: int = DEFAULT_MAX_PIVOTS,
    generators: GeneratorSet | None = None,
) -> GameCell:
    if min(t, k, r) < 1:
        raise ValueError("t, k and r must be positive")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    dim = g.n * t * (1 if variant == VARIANT_Q else 2)
    gs = generators if generators is not None else cached_generators(dim, r, mode, max_tuples)
    pairs, features = _feature_fn(g, t, variant)
    pairs_pos = {uv: i for i, uv in enumerate(pairs)}

    # columns with identical coefficients are interchangeable; keep the first
    cols: dict[tuple, int] = {}
    for idx, gm in enumerate(gs.grams):
        cols.setdefault(features(gm), idx)
    feats = list(cols)
    reps = list(cols.values())

    rows = game_rows(g, t, k, variant)
    lp = LpProblem(len(feats))
    for row in rows:
        lp.add([_row_coeff(row, pairs_pos, f) for f in feats], row[1], row[2])
    cert = solve_feasibility(lp, max_pivots=max_pivots)
    log.debug("t=%d k=%d r=%d %s: %d generators, %d columns, %s", t, k, r, variant, len(gs), len(feats), cert.status)
    cell = GameCell(g, t, k, r, variant, cert.feasible, generators=len(gs), columns=len(feats))
    if cert.feasible:
        acc = SymMatrix.zeros(dim)
        for w, rep in zip(cert.primal, reps):
            if w:
                cell.weights.append((w, gs.provenance[rep]))
                acc = acc + gs.grams[rep].scale(w)
        index = game_index(g.n, t) if variant == VARIANT_Q else corr_index(g.n, t)
        cell.matrix = acc.with_index(index)
    else:
        cell.farkas = cert.farkas
    return cell


def check_game_matrix(a: SymMatrix, g: Graph, t: int, k: int, variant: str) -> bool:
    bound = Fraction(1, k)
    return block_residual(a, t) <= bound and game_penalty(a, g, t, variant) <= bound


def verify_game_cell(cell: GameCell, mode: str = "reduced") -> bool:
    """Re-check a feasible cell from its tuples alone."""
    if not cell.feasible:
        raise ValueError("only feasible cells carry a primal certificate; use verify_game_farkas")
    dim = cell.graph.n * cell.t * (1 if cell.variant == VARIANT_Q else 2)
    acc = SymMatrix.zeros(dim)
    for w, tp in cell.weights:
        if w < 0 or tp.n != dim or tp.r > cell.r or tp.problems(mode):
            return False
        acc = acc + gram(tp).scale(w)
    if cell.matrix is not None and acc != cell.matrix:
        return False
    return check_game_matrix(acc, cell.graph, cell.t, cell.k, cell.variant)


def verify_game_farkas(
    g: Graph, t: int, k: int, r: int, variant: str, farkas: Sequence[Fraction], mode: str = "reduced",
    max_tuples: int = DEFAULT_MAX_TUPLES,
) -> bool:
    """Re-check an infeasibility certificate against every generator of the level."""
    rows = game_rows(g, t, k, variant)
    if len(farkas) != len(rows):
        return False
    for (pair, rel, rhs), y in zip(rows, farkas):
        if (rel == LE and y < 0) or (rel == GE and y > 0):
            return False
    if sum((y * row[2] for y, row in zip(farkas, rows)), _ZERO) >= 0:
        return False
    dim = g.n * t * (1 if variant == VARIANT_Q else 2)
    gs = cached_generators(dim, r, mode, max_tuples)
    pairs, features = _feature_fn(g, t, variant)
    pairs_pos = {uv: i for i, uv in enumerate(pairs)}
    for gm in gs.grams:
        f = features(gm)
        if sum((y * _row_coeff(row, pairs_pos, f) for y, row in zip(farkas, rows) if y), _ZERO) < 0:
            return False
    return True


@dataclass
class LambdaResult:
    """Smallest feasible ``t`` (or ``None`` up to ``t_max``) with every cell solved on the way."""

    graph: Graph
    k: int
    r: int
    t_max: int
    variant: str
    t: int | None
    cells: list[GameCell]

    @property
    def status(self) -> str:
        return "feasible" if self.t is not None else "none_up_to"

    @property
    def certificate(self) -> GameCell | None:
        return self.cells[-1] if self.t is not None else None


def lambda_kr(
    g: Graph,
    k: int,
    r: int,
    t_max: int,
    variant: str = VARIANT_Q,
    mode: str = "reduced",
    max_tuples: int = DEFAULT_MAX_TUPLES,
    max_pivots: int = DEFAULT_MAX_PIVOTS,
) -> LambdaResult:
    """Search ``t = 1..t_max`` for the first feasible game LP."""
    cells = []
    for t in range(1, t_max + 1):
        cell = solve_game(g, t, k, r, variant, mode, max_tuples, max_pivots)
        cells.append(cell)
        if cell.feasible:
            return LambdaResult(g, k, r, t_max, variant, t, cells)
    return LambdaResult(g, k, r, t_max, variant, None, cells)


def Lambda_kr(g: Graph, k: int, r: int, t_max: int, **kwargs) -> LambdaResult:
    return lambda_kr(g, k, r, t_max, variant=VARIANT_QA, **kwargs)


def coloring_certificate(g: Graph, coloring: Sequence[int], t: int, k: int, r: int | None = None) -> GameCell:
    """A feasible cell built directly from a proper coloring; needs ``r >= n``."""
    tp = coloring_tuple(g, coloring, t, r)
    weight = Fraction(g.n * g.n)
    a = gram(tp).scale(weight).with_index(game_index(g.n, t))
    return GameCell(g, t, k, tp.r, VARIANT_Q, True, weights=[(weight, tp)], matrix=a)


def sweep(
    g: Graph,
    ks: Sequence[int],
    rs: Sequence[int],
    t_max: int,
    variant: str = VARIANT_Q,
    mode: str = "reduced",
    max_tuples: int = DEFAULT_MAX_TUPLES,
    threads: int = 1,
) -> list[LambdaResult]:
    """``lambda_kr`` over a grid of ``(k, r)``; results in ``(k, r)`` order."""
    grid = [(k, r) for k in ks for r in rs]

    def run(kr):
        return lambda_kr(g, kr[0], kr[1], t_max, variant, mode, max_tuples)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, grid))
    return [run(kr) for kr in grid]
