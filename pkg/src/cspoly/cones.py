"""Membership and separation for the polyhedral cones C_r, D_r, O_r and O_r*.

``C_r`` is the conic hull of Gram matrices of grid tuples and ``D_r`` its
dual; ``O_r`` / ``O_r*`` are the scalar analogues built from simplex grid
points.  Conic membership is an exact LP; when it fails, the Farkas
multipliers are turned into a separating matrix ``M`` with ``<M, G> >= 0`` on
every generator and ``<M, A> < 0``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .blocks import block_sums, num_blocks
from .errors import PreconditionError
from .exact import PsdTuple, SymMatrix, is_psd_exact, trace_inner
from .gridgen import DEFAULT_MAX_TUPLES, enum_scalar_grid, enum_tuples
from .lpcore import DEFAULT_MAX_PIVOTS, EQ, LpProblem, solve_feasibility

_ZERO = Fraction(0)

MEMBER = "member"
SEPARATED = "separated"
VIOLATED = "violated"


def gram(t: PsdTuple) -> SymMatrix:
    """The n×n Gram matrix ``(<X_i, X_j>)`` of a tuple."""
    n = t.n
    supp = t.support()
    entries = {}
    for a, p in enumerate(supp):
        for q in supp[a:]:
            v = trace_inner(t.mats[p], t.mats[q])
            if v:
                entries[(p, q)] = v
    return SymMatrix.from_entries(n, entries)


@dataclass
class GeneratorSet:
    """Deduplicated Gram generators of ``C_r^n`` with one source tuple each."""

    n: int
    r: int
    grams: list[SymMatrix]
    provenance: list[PsdTuple]
    tuples_seen: int = 0
    mode: str = "reduced"

    def __len__(self) -> int:
        return len(self.grams)

    def __iter__(self):
        return iter(self.grams)


def _collect(stream) -> list[tuple[SymMatrix, PsdTuple]]:
    return [(gram(t), t) for t in stream]


def build_generators(
    n: int,
    r: int,
    mode: str = "reduced",
    max_tuples: int = DEFAULT_MAX_TUPLES,
    threads: int = 1,
) -> GeneratorSet:
    """Gram images of every grid tuple, deduplicated in first-seen canonical order."""
    grid = enum_tuples(n, r, mode, max_tuples)
    grid.check_cap()
    if threads > 1:
        parts = grid.partitions()
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda tr: _collect(grid.stream(tr)), parts))
        pairs = [pair for chunk in chunks for pair in chunk]
    else:
        pairs = _collect(grid.stream())
    seen: dict[SymMatrix, int] = {}
    grams: list[SymMatrix] = []
    prov: list[PsdTuple] = []
    for g, t in pairs:
        if g not in seen:
            seen[g] = len(grams)
            grams.append(g)
            prov.append(t)
    return GeneratorSet(n, r, grams, prov, tuples_seen=len(pairs), mode=mode)


_GEN_CACHE: dict[tuple, GeneratorSet] = {}


def cached_generators(n: int, r: int, mode: str = "reduced", max_tuples: int = DEFAULT_MAX_TUPLES) -> GeneratorSet:
    key = (n, r, mode)
    gs = _GEN_CACHE.get(key)
    if gs is None:
        gs = build_generators(n, r, mode, max_tuples)
        _GEN_CACHE[key] = gs
    return gs


@dataclass
class SeparationResult:
    status: str
    weights: dict[int, Fraction] = field(default_factory=dict)
    separator: SymMatrix | None = None
    generators: list[SymMatrix] = field(default_factory=list, repr=False)
    provenance: list = field(default_factory=list, repr=False)

    @property
    def member(self) -> bool:
        return self.status == MEMBER

    def reconstruct(self) -> SymMatrix:
        n = self.generators[0].dim
        acc = SymMatrix.zeros(n)
        for g, w in self.weights.items():
            acc = acc + self.generators[g].scale(w)
        return acc


def _upper_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i, n)]


def conic_membership(a: SymMatrix, gens: Sequence[SymMatrix], max_pivots: int = DEFAULT_MAX_PIVOTS) -> SeparationResult:
    """Decide ``A in cone(gens)`` exactly, returning weights or a separator."""
    n = a.dim
    gens = list(gens)
    for g in gens:
        if g.dim != n:
            raise ValueError(f"generator of dimension {g.dim} for a {n}x{n} matrix")
    pairs = _upper_pairs(n)
    lp = LpProblem(len(gens))
    cols = [g.upper for g in gens]
    for k, (i, j) in enumerate(pairs):
        lp.add([c[k] for c in cols], EQ, a.upper[k])
    cert = solve_feasibility(lp, max_pivots=max_pivots)
    if cert.feasible:
        weights = {g: w for g, w in enumerate(cert.primal) if w}
        return SeparationResult(MEMBER, weights=weights, generators=gens)
    y = cert.farkas
    # Farkas: sum_k y_k G[k] >= 0 for every generator, sum_k y_k A[k] < 0.
    # With M_ii = y_ii and M_ij = y_ij / 2 this reads <M, G> >= 0 > <M, A>.
    entries = {}
    for k, (i, j) in enumerate(pairs):
        if y[k]:
            entries[(i, j)] = y[k] if i == j else y[k] / 2
    m = SymMatrix.from_entries(n, entries)
    m = m.scale(1 / m.max_abs())
    return SeparationResult(SEPARATED, separator=m, generators=gens)


def check_separation(res: SeparationResult, a: SymMatrix) -> bool:
    """Exact re-check of a membership or separation certificate."""
    if res.status == MEMBER:
        if any(w < 0 for w in res.weights.values()):
            return False
        return res.reconstruct() == a
    m = res.separator
    if m is None or m.max_abs() != 1:
        return False
    return trace_inner(m, a) < 0 and all(trace_inner(m, g) >= 0 for g in res.generators)


def member_C(
    a: SymMatrix,
    r: int,
    mode: str = "reduced",
    max_tuples: int = DEFAULT_MAX_TUPLES,
    generators: GeneratorSet | None = None,
) -> SeparationResult:
    """Membership of ``A`` in ``C_r^n``."""
    gs = generators if generators is not None else cached_generators(a.dim, r, mode, max_tuples)
    if gs.n != a.dim or gs.r != r:
        raise ValueError("generator set does not match the matrix dimension and level")
    res = conic_membership(a, gs.grams)
    res.provenance = gs.provenance
    return res


@dataclass
class DualCheck:
    """Result of scanning a grid for ``sum_ij M_ij <X_i, X_j> >= 0`` (or ``x^T M x >= 0``)."""

    status: str
    witness: PsdTuple | tuple | None = None
    value: Fraction | None = None
    min_value: Fraction | None = None
    min_witness: PsdTuple | tuple | None = None
    checked: int = 0

    @property
    def member(self) -> bool:
        return self.status == MEMBER


def pairing(m: SymMatrix, t: PsdTuple) -> Fraction:
    """``Tr(p_M(X)) = sum_ij M_ij <X_i, X_j>``, computed over the tuple's support."""
    supp = t.support()
    total = _ZERO
    for a, p in enumerate(supp):
        for q in supp[a:]:
            mpq = m[p, q]
            if mpq:
                v = trace_inner(t.mats[p], t.mats[q])
                total += mpq * v if p == q else 2 * mpq * v
    return total


def member_D(
    m: SymMatrix,
    r: int,
    mode: str = "reduced",
    max_tuples: int = DEFAULT_MAX_TUPLES,
    find_min: bool = False,
) -> DualCheck:
    """Scan every grid tuple; stop at the first violation unless ``find_min``."""
    grid = enum_tuples(m.dim, r, mode, max_tuples)
    res = DualCheck(MEMBER)
    for t in grid:
        res.checked += 1
        v = pairing(m, t)
        if find_min and (res.min_value is None or v < res.min_value):
            res.min_value, res.min_witness = v, t
        if v < 0 and res.witness is None:
            res.status, res.witness, res.value = VIOLATED, t, v
            if not find_min:
                break
    return res


def quad_form(m: SymMatrix, x: Sequence[Fraction]) -> Fraction:
    total = _ZERO
    for i, j, v in m.items():
        if v and x[i] and x[j]:
            total += v * x[i] * x[j] if i == j else 2 * v * x[i] * x[j]
    return total


def member_O(m: SymMatrix, r: int, find_min: bool = False) -> DualCheck:
    """Check ``x^T M x >= 0`` over the scalar simplex grid."""
    res = DualCheck(MEMBER)
    for x in enum_scalar_grid(m.dim, r):
        res.checked += 1
        v = quad_form(m, x)
        if find_min and (res.min_value is None or v < res.min_value):
            res.min_value, res.min_witness = v, x
        if v < 0 and res.witness is None:
            res.status, res.witness, res.value = VIOLATED, x, v
            if not find_min:
                break
    return res


def scalar_generators(n: int, r: int) -> list[SymMatrix]:
    return [SymMatrix.outer(v) for v in enum_scalar_grid(n, r)]


def member_Ostar(a: SymMatrix, r: int) -> SeparationResult:
    """Membership of ``A`` in the conic hull of ``vv^T`` over grid points ``v``."""
    res = conic_membership(a, scalar_generators(a.dim, r))
    res.provenance = list(enum_scalar_grid(a.dim, r))
    return res


# -- boundary witnesses -------------------------------------------------------


@dataclass(frozen=True)
class ZeroEntry:
    i: int
    j: int


@dataclass(frozen=True)
class AffineAt:
    """Two distinct vertices ``u != v`` of a matrix in the block-sum-one space (block size t)."""

    u: int
    v: int
    t: int


@dataclass(frozen=True)
class AffineBt:
    """Two distinct parties of a correlation matrix, indexed ``side*n + vertex``."""

    p: int
    q: int
    t: int


def block_difference_witness(nblocks: int, t: int, u: int, v: int) -> SymMatrix:
    """``F ⊗ J_t`` with ``F = E_uu + E_vv - E_uv - E_vu`` (block index ``u*t + i``)."""
    f = SymMatrix.from_entries(nblocks, {(u, u): 1, (v, v): 1, (u, v): -1})
    return f.kron(SymMatrix.ones(t))


def boundary_witness(a: SymMatrix, kind) -> SymMatrix:
    """A nonzero ``M`` in the dual cone with ``<A, M> = 0``, certifying ``A`` is on the boundary."""
    if isinstance(kind, ZeroEntry):
        if a[kind.i, kind.j] != 0:
            raise PreconditionError(f"entry ({kind.i}, {kind.j}) is {a[kind.i, kind.j]}, not zero")
        m = SymMatrix.elementary(a.dim, kind.i, kind.j)
    elif isinstance(kind, (AffineAt, AffineBt)):
        u, v = (kind.u, kind.v) if isinstance(kind, AffineAt) else (kind.p, kind.q)
        nb = num_blocks(a, kind.t)
        if u == v or not (0 <= u < nb and 0 <= v < nb):
            raise PreconditionError(f"need two distinct blocks in range({nb}), got {u} and {v}")
        bad = {uv: s for uv, s in block_sums(a, kind.t).items() if s != 1}
        if bad:
            (bu, bv), s = next(iter(bad.items()))
            raise PreconditionError(
                f"matrix is not in the block-sum-one space: block ({bu}, {bv}) sums to {s}"
            )
        m = block_difference_witness(nb, kind.t, u, v)
    else:
        raise TypeError(f"unknown witness kind {kind!r}")
    if trace_inner(a, m) != 0:
        raise AssertionError("witness does not annihilate the matrix")
    return m


def in_dual_certified(m: SymMatrix) -> bool:
    """Sufficient test for the dual cone: PSD or entrywise nonnegative."""
    return m.is_nonnegative() or is_psd_exact(m)
