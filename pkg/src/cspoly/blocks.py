"""Block bookkeeping for matrices indexed by (block, color) pairs."""

from __future__ import annotations

from fractions import Fraction

from .exact import SymMatrix


def num_blocks(a: SymMatrix, t: int) -> int:
    if t < 1 or a.dim % t:
        raise ValueError(f"dimension {a.dim} is not a multiple of t={t}")
    return a.dim // t


def block_sums(a: SymMatrix, t: int) -> dict[tuple[int, int], Fraction]:
    """``{(u, v): sum_{i,j} A[u*t+i, v*t+j]}`` for ``u <= v``."""
    nb = num_blocks(a, t)
    sums = {(u, v): Fraction(0) for u in range(nb) for v in range(u, nb)}
    for i, j, val in a.items():
        if not val:
            continue
        u, v = i // t, j // t
        if i == j:
            sums[(u, u)] += val
        elif u == v:
            sums[(u, u)] += 2 * val
        else:
            # (i, j) and (j, i) both fall in block (u, v) or (v, u); count once per ordered block
            sums[(u, v) if u <= v else (v, u)] += val
    return sums


def block_residual(a: SymMatrix, t: int) -> Fraction:
    """``max_{u,v} |block_sum(u, v) - 1|``."""
    return max(abs(s - 1) for s in block_sums(a, t).values())
