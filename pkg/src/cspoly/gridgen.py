"""Rational grids: simplex points and tuples of small rational PSD matrices."""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterator, Sequence

from .errors import ResourceCapExceeded
from .exact import PsdTuple, SymMatrix, is_psd_exact, matrix_denominator_ok, trace

DEFAULT_MAX_TUPLES = 10**8


# -- scalar simplex grids ---------------------------------------------------


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enum_scalar_grid(n: int, r: int) -> list[tuple[Fraction, ...]]:
    """All points of the union of Δ(n, s) for s = 1..r, sorted lexicographically."""
    if n < 1 or r < 1:
        raise ValueError("n and r must be positive")
    points = set()
    for s in range(1, r + 1):
        for comp in _compositions(s, n):
            points.add(tuple(Fraction(c, s) for c in comp))
    return sorted(points)


# -- r x r rational PSD matrices ------------------------------------------


def admissible_values(r: int, lo: Fraction, hi: Fraction) -> list[Fraction]:
    """Sorted rationals in ``[lo, hi]`` whose reduced denominator is at most ``r``."""
    vals = set()
    for q in range(1, r + 1):
        p_lo = -((-lo.numerator * q) // lo.denominator)  # ceil(lo*q)
        p_hi = (hi.numerator * q) // hi.denominator
        for p in range(p_lo, p_hi + 1):
            vals.add(Fraction(p, q))
    return sorted(vals)


def _matrix_sort_key(x: SymMatrix):
    return (trace(x), x.upper)


@lru_cache(maxsize=None)
def _psd_matrices(r: int, cap: Fraction, mode: str) -> tuple[SymMatrix, ...]:
    diag_vals = admissible_values(r, Fraction(0), cap)
    off_pairs = [(i, j) for i in range(r) for j in range(i + 1, r)]
    found = []

    def diagonals(k: int, left: Fraction):
        if k == r:
            yield ()
            return
        for v in diag_vals:
            if v > left:
                break
            for rest in diagonals(k + 1, left - v):
                yield (v,) + rest

    for d in diagonals(0, cap):
        choices = []
        for i, j in off_pairs:
            bound = (d[i] + d[j]) / 2
            vals = [x for x in admissible_values(r, -bound, bound) if x * x <= d[i] * d[j]]
            choices.append(vals)
        for offs in itertools.product(*choices):
            entries = {(i, i): d[i] for i in range(r)}
            entries.update(zip(off_pairs, offs))
            x = SymMatrix.from_entries(r, entries)
            if not matrix_denominator_ok(x, r, mode):
                continue
            if is_psd_exact(x):
                found.append(x)
    found.sort(key=_matrix_sort_key)
    return tuple(found)


def enum_psd_matrices(r: int, trace_cap=1, mode: str = "reduced") -> list[SymMatrix]:
    """All r×r PSD matrices with admissible denominators and trace at most ``trace_cap``.

    Ordered by ``(trace, upper-triangle entries)``.
    """
    if r < 1:
        raise ValueError("r must be positive")
    return list(_psd_matrices(r, Fraction(trace_cap), mode))


def gamma(r: int, mode: str = "reduced") -> int:
    """Number of r×r admissible PSD matrices with trace at most one."""
    return len(_psd_matrices(r, Fraction(1), mode))


def count_bound(n: int, r: int, mode: str = "reduced") -> int:
    """Upper bound on the number of tuples: γ_r^r, times C(n, r) when n > r."""
    g = gamma(r, mode) ** r
    return g if n <= r else comb(n, r) * g


# -- tuples -----------------------------------------------------------------


class GridEnumeration:
    """Streams every n-tuple of admissible r×r PSD matrices with traces summing to one.

    Tuples come out in lexicographic order, comparing components by
    ``(trace, entries)``.  ``partitions()`` lists the possible traces of the
    first component; ``stream(first_trace)`` yields one partition, and
    concatenating the partitions in order reproduces the full stream.
    """

    def __init__(self, n: int, r: int, mode: str = "reduced", max_tuples: int = DEFAULT_MAX_TUPLES):
        if n < 1 or r < 1:
            raise ValueError("n and r must be positive")
        self.n = n
        self.r = r
        self.mode = mode
        self.max_tuples = max_tuples
        self._mats = _psd_matrices(r, Fraction(1), mode)
        by_trace: dict[Fraction, list[SymMatrix]] = {}
        for x in self._mats:
            by_trace.setdefault(trace(x), []).append(x)
        self._by_trace = by_trace
        self._traces = sorted(by_trace)
        self._ways = lru_cache(maxsize=None)(self._count_ways)
        self.count = self._ways(n, Fraction(1))
        self.emitted = 0

    def _count_ways(self, slots: int, left: Fraction) -> int:
        if slots == 0:
            return 1 if left == 0 else 0
        total = 0
        for tr in self._traces:
            if tr > left:
                break
            sub = self._ways(slots - 1, left - tr)
            if sub:
                total += len(self._by_trace[tr]) * sub
        return total

    def check_cap(self) -> None:
        if self.count > self.max_tuples:
            raise ResourceCapExceeded(
                f"grid of {self.n}-tuples of {self.r}x{self.r} matrices has {self.count} "
                f"elements, above the cap of {self.max_tuples}"
            )

    def partitions(self) -> list[Fraction]:
        return [tr for tr in self._traces if tr <= 1 and self._ways(self.n - 1, 1 - tr)]

    def partition_count(self, first_trace: Fraction) -> int:
        return len(self._by_trace.get(first_trace, ())) * self._ways(self.n - 1, 1 - first_trace)

    def _extend(self, prefix: list[SymMatrix], left: Fraction) -> Iterator[tuple[SymMatrix, ...]]:
        slots = self.n - len(prefix)
        if slots == 0:
            if left == 0:
                yield tuple(prefix)
            return
        for tr in self._traces:
            if tr > left:
                break
            if not self._ways(slots - 1, left - tr):
                continue
            for x in self._by_trace[tr]:
                prefix.append(x)
                yield from self._extend(prefix, left - tr)
                prefix.pop()

    def stream(self, first_trace: Fraction | None = None) -> Iterator[PsdTuple]:
        self.check_cap()
        if first_trace is None:
            gen = self._extend([], Fraction(1))
        else:
            first_trace = Fraction(first_trace)

            def gen_partition():
                for x in self._by_trace.get(first_trace, ()):
                    yield from self._extend([x], 1 - first_trace)

            gen = gen_partition()
        for mats in gen:
            self.emitted += 1
            yield PsdTuple(self.r, mats)

    def __iter__(self) -> Iterator[PsdTuple]:
        return self.stream()

    def __len__(self) -> int:
        return self.count


def enum_tuples(n: int, r: int, mode: str = "reduced", max_tuples: int = DEFAULT_MAX_TUPLES) -> GridEnumeration:
    return GridEnumeration(n, r, mode, max_tuples)


def tuple_sort_key(t: PsdTuple) -> tuple:
    return tuple(_matrix_sort_key(x) for x in t.mats)


def merge_partitions(streams: Sequence[Sequence[PsdTuple]]) -> list[PsdTuple]:
    """Concatenate partition outputs, given in first-trace order."""
    out: list[PsdTuple] = []
    for s in streams:
        out.extend(s)
    return out
