"""Exact rational scalars and dense symmetric matrices.

Scalars are :class:`fractions.Fraction`; they are always kept in lowest terms
with a positive denominator, and division by zero raises ``ZeroDivisionError``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Any, Hashable, Iterable, Sequence

Rational = Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)


def to_rational(value: Any) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings; floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def format_rational(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str | int) -> Fraction:
    return to_rational(text)


def _tri_index(i: int, j: int, n: int) -> int:
    if i > j:
        i, j = j, i
    # row-major upper triangle: row i starts after rows 0..i-1
    return i * n - i * (i - 1) // 2 + (j - i)


class SymMatrix:
    """Immutable dense symmetric matrix over the rationals.

    Only the upper triangle is stored (row-major), so symmetry holds by
    construction.  ``index`` optionally labels the flat indices, e.g. with
    ``(vertex, color)`` pairs for game matrices.
    """

    __slots__ = ("dim", "_upper", "index", "_hash")

    def __init__(
        self,
        dim: int,
        upper: Iterable[Any],
        index: Sequence[Hashable] | None = None,
    ):
        if dim < 1:
            raise ValueError("dimension must be positive")
        values = tuple(to_rational(v) for v in upper)
        if len(values) != dim * (dim + 1) // 2:
            raise ValueError(
                f"expected {dim * (dim + 1) // 2} upper-triangle entries, got {len(values)}"
            )
        if index is not None:
            index = tuple(index)
            if len(index) != dim:
                raise ValueError(f"index map has {len(index)} labels for dimension {dim}")
            if len(set(index)) != dim:
                raise ValueError("index map labels must be distinct")
        self.dim = dim
        self._upper = values
        self.index = index
        self._hash = None

    # -- constructors -----------------------------------------------------

    @classmethod
    def _raw(cls, dim: int, upper: tuple, index=None) -> "SymMatrix":
        # trusted fast path: upper already a tuple of Fractions of the right length
        obj = cls.__new__(cls)
        obj.dim = dim
        obj._upper = upper
        obj.index = index
        obj._hash = None
        return obj

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Any]], index=None) -> "SymMatrix":
        n = len(rows)
        if n == 0 or any(len(row) != n for row in rows):
            raise ValueError("matrix must be square and non-empty")
        full = [[to_rational(v) for v in row] for row in rows]
        for i in range(n):
            for j in range(i + 1, n):
                if full[i][j] != full[j][i]:
                    raise ValueError(f"matrix is not symmetric at ({i}, {j})")
        upper = [full[i][j] for i in range(n) for j in range(i, n)]
        return cls(n, upper, index)

    @classmethod
    def from_entries(cls, dim: int, entries: dict[tuple[int, int], Any], index=None) -> "SymMatrix":
        """Build from a sparse ``{(i, j): value}`` map (either triangle)."""
        upper = [_ZERO] * (dim * (dim + 1) // 2)
        for (i, j), v in entries.items():
            if not (0 <= i < dim and 0 <= j < dim):
                raise IndexError(f"entry ({i}, {j}) outside dimension {dim}")
            upper[_tri_index(i, j, dim)] = to_rational(v)
        return cls._raw(dim, tuple(upper), tuple(index) if index is not None else None)

    @classmethod
    def zeros(cls, dim: int, index=None) -> "SymMatrix":
        return cls(dim, [_ZERO] * (dim * (dim + 1) // 2), index)

    @classmethod
    def identity(cls, dim: int, index=None) -> "SymMatrix":
        return cls.from_entries(dim, {(i, i): _ONE for i in range(dim)}, index)

    @classmethod
    def ones(cls, dim: int, index=None) -> "SymMatrix":
        return cls(dim, [_ONE] * (dim * (dim + 1) // 2), index)

    @classmethod
    def diag(cls, values: Sequence[Any], index=None) -> "SymMatrix":
        return cls.from_entries(len(values), {(i, i): v for i, v in enumerate(values)}, index)

    @classmethod
    def outer(cls, v: Sequence[Any], index=None) -> "SymMatrix":
        vals = [to_rational(x) for x in v]
        n = len(vals)
        return cls._raw(
            n,
            tuple(vals[i] * vals[j] for i in range(n) for j in range(i, n)),
            tuple(index) if index is not None else None,
        )

    @classmethod
    def elementary(cls, dim: int, i: int, j: int) -> "SymMatrix":
        """``E_ij``: ones at ``(i, j)`` and ``(j, i)``, zeros elsewhere."""
        return cls.from_entries(dim, {(i, j): _ONE})

    # -- access -----------------------------------------------------------

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        i, j = key
        if not (0 <= i < self.dim and 0 <= j < self.dim):
            raise IndexError(f"entry ({i}, {j}) outside dimension {self.dim}")
        return self._upper[_tri_index(i, j, self.dim)]

    @property
    def upper(self) -> tuple[Fraction, ...]:
        return self._upper

    def rows(self) -> list[list[Fraction]]:
        n = self.dim
        return [[self[i, j] for j in range(n)] for i in range(n)]

    def items(self):
        """Yield ``(i, j, value)`` over the upper triangle."""
        k = 0
        n = self.dim
        for i in range(n):
            for j in range(i, n):
                yield i, j, self._upper[k]
                k += 1

    def position(self, label: Hashable) -> int:
        if self.index is None:
            raise ValueError("matrix has no index map")
        return self.index.index(label)

    def with_index(self, index: Sequence[Hashable] | None) -> "SymMatrix":
        return SymMatrix(self.dim, self._upper, index)

    def submatrix(self, idx: Sequence[int]) -> "SymMatrix":
        m = len(idx)
        return SymMatrix._raw(
            m, tuple(self[idx[a], idx[b]] for a in range(m) for b in range(a, m))
        )

    def pad(self, dim: int) -> "SymMatrix":
        """Embed as the leading block of a ``dim``-sized zero matrix."""
        if dim < self.dim:
            raise ValueError("cannot pad to a smaller dimension")
        return SymMatrix.from_entries(dim, {(i, j): v for i, j, v in self.items() if v})

    # -- arithmetic -------------------------------------------------------

    def _check_dim(self, other: "SymMatrix") -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "SymMatrix") -> "SymMatrix":
        self._check_dim(other)
        return SymMatrix._raw(
            self.dim, tuple(a + b for a, b in zip(self._upper, other._upper)), self.index
        )

    def __sub__(self, other: "SymMatrix") -> "SymMatrix":
        self._check_dim(other)
        return SymMatrix._raw(
            self.dim, tuple(a - b for a, b in zip(self._upper, other._upper)), self.index
        )

    def __neg__(self) -> "SymMatrix":
        return SymMatrix._raw(self.dim, tuple(-a for a in self._upper), self.index)

    def scale(self, c: Any) -> "SymMatrix":
        c = to_rational(c)
        return SymMatrix._raw(self.dim, tuple(c * a for a in self._upper), self.index)

    __rmul__ = scale

    def __mul__(self, c: Any) -> "SymMatrix":
        return self.scale(c)

    def kron(self, other: "SymMatrix") -> "SymMatrix":
        """Kronecker product ``self ⊗ other`` (index ``a*other.dim + b``)."""
        p, q = self.dim, other.dim
        n = p * q
        upper = []
        for r in range(n):
            a, b = divmod(r, q)
            for s in range(r, n):
                c, d = divmod(s, q)
                upper.append(self[a, c] * other[b, d])
        return SymMatrix._raw(n, tuple(upper))

    def max_abs(self) -> Fraction:
        return max(abs(a) for a in self._upper)

    def is_zero(self) -> bool:
        return not any(self._upper)

    def is_nonnegative(self) -> bool:
        return all(a >= 0 for a in self._upper)

    def is_diagonal(self) -> bool:
        return all(v == 0 for i, j, v in self.items() if i != j)

    # -- comparison / serialization -------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SymMatrix):
            return NotImplemented
        return self.dim == other.dim and self._upper == other._upper

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.dim, self._upper))
        return self._hash

    def key(self) -> str:
        """Canonical serialization, used as a deduplication key."""
        return ",".join(format_rational(a) for a in self._upper)

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "dim": self.dim,
            "upper": [format_rational(a) for a in self._upper],
        }
        if self.index is not None:
            out["index"] = [list(lab) if isinstance(lab, tuple) else lab for lab in self.index]
        return out

    @classmethod
    def from_json(cls, data: Any) -> "SymMatrix":
        """Accept ``{"dim", "upper"[, "index"]}`` or a square list of rows."""
        if isinstance(data, list):
            return cls.from_rows(data)
        if not isinstance(data, dict) or "dim" not in data or "upper" not in data:
            raise ValueError("matrix JSON needs 'dim' and 'upper' fields (or a list of rows)")
        index = data.get("index")
        if index is not None:
            index = [tuple(lab) if isinstance(lab, list) else lab for lab in index]
        return cls(int(data["dim"]), data["upper"], index)

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    def __repr__(self) -> str:
        body = "; ".join(" ".join(format_rational(v) for v in row) for row in self.rows())
        return f"SymMatrix([{body}])"


def trace(x: SymMatrix) -> Fraction:
    return sum((x[i, i] for i in range(x.dim)), _ZERO)


def trace_inner(x: SymMatrix, y: SymMatrix) -> Fraction:
    """``<X, Y> = Tr(XY) = sum_ij X_ij Y_ij``."""
    if x.dim != y.dim:
        raise ValueError(f"dimension mismatch: {x.dim} vs {y.dim}")
    diag = _ZERO
    off = _ZERO
    for (i, j, a), b in zip(x.items(), y.upper):
        if a and b:
            if i == j:
                diag += a * b
            else:
                off += a * b
    return diag + 2 * off


@dataclass(frozen=True)
class PsdReport:
    """Outcome of the exact LDLᵀ test.

    ``pivots`` lists ``(original_index, pivot_value)`` in elimination order.
    When the matrix is not PSD, ``witness`` holds the indices of a principal
    submatrix with negative determinant.
    """

    psd: bool
    pivots: tuple[tuple[int, Fraction], ...]
    witness: tuple[int, ...] | None = None

    @property
    def rank(self) -> int:
        return sum(1 for _, d in self.pivots if d != 0)


def ldlt_report(m: SymMatrix) -> PsdReport:
    """Diagonal-pivoted exact LDLᵀ elimination."""
    n = m.dim
    a = m.rows()
    alive = list(range(n))
    pivots: list[tuple[int, Fraction]] = []
    while alive:
        for p in alive:
            if a[p][p] < 0:
                return PsdReport(False, tuple(pivots), tuple(q for q, _ in pivots) + (p,))
        p = next((q for q in alive if a[q][q] > 0), None)
        if p is None:
            # zero diagonal on the remaining block: PSD forces the block to vanish
            for i in alive:
                for j in alive:
                    if a[i][j] != 0:
                        used = tuple(q for q, _ in pivots)
                        return PsdReport(False, tuple(pivots), used + tuple(sorted({i, j})))
            pivots.extend((q, _ZERO) for q in alive)
            return PsdReport(True, tuple(pivots))
        d = a[p][p]
        alive.remove(p)
        col = [a[i][p] for i in alive]
        for x, i in enumerate(alive):
            f = col[x]
            if not f:
                continue
            f = f / d
            row = a[i]
            for y, j in enumerate(alive):
                if col[y]:
                    row[j] -= f * col[y]
        pivots.append((p, d))
    return PsdReport(True, tuple(pivots))


def is_psd_exact(m: SymMatrix) -> bool:
    return ldlt_report(m).psd


def determinant(m: SymMatrix) -> Fraction:
    """Exact determinant by fraction-valued Gaussian elimination."""
    a = m.rows()
    n = m.dim
    det = _ONE
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            return _ZERO
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            if a[r][c]:
                f = a[r][c] / a[c][c]
                for k in range(c, n):
                    a[r][k] -= f * a[c][k]
    return det


def denominator_ok(q: Fraction, r: int) -> bool:
    return q.denominator <= r


def common_denominator(values: Iterable[Fraction]) -> int:
    d = 1
    for v in values:
        d = lcm(d, v.denominator)
    return d


def gram_of_vectors(vectors: Sequence[Sequence[Any]]) -> SymMatrix:
    """Gram matrix ``(<g_i, g_j>)`` of rational vectors (columns of G)."""
    vs = [[to_rational(x) for x in v] for v in vectors]
    n = len(vs)
    return SymMatrix._raw(
        n,
        tuple(sum((a * b for a, b in zip(vs[i], vs[j])), _ZERO) for i in range(n) for j in range(i, n)),
    )


DENOMINATOR_MODES = ("reduced", "common")


def matrix_denominator_ok(x: SymMatrix, r: int, mode: str = "reduced") -> bool:
    """Whether every entry of ``x`` has "denominator at most r".

    ``reduced``: each entry's lowest-terms denominator is at most ``r``.
    ``common``: the matrix has a single common denominator at most ``r``.
    """
    if mode == "reduced":
        return all(v.denominator <= r for v in x.upper)
    if mode == "common":
        return common_denominator(x.upper) <= r
    raise ValueError(f"unknown denominator mode {mode!r}; expected one of {DENOMINATOR_MODES}")


class InvalidTuple(ValueError):
    pass


@dataclass(frozen=True)
class PsdTuple:
    """An n-tuple of r×r rational PSD matrices with traces summing to one."""

    r: int
    mats: tuple[SymMatrix, ...]

    @property
    def n(self) -> int:
        return len(self.mats)

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.mats) if not x.is_zero())

    def problems(self, mode: str = "reduced") -> list[str]:
        out = []
        for i, x in enumerate(self.mats):
            if x.dim != self.r:
                out.append(f"matrix {i} has size {x.dim}, expected {self.r}")
                continue
            if not matrix_denominator_ok(x, self.r, mode):
                out.append(f"matrix {i} has an entry with denominator above {self.r}")
            if not is_psd_exact(x):
                out.append(f"matrix {i} is not positive semidefinite")
        total = sum((trace(x) for x in self.mats), _ZERO)
        if total != 1:
            out.append(f"traces sum to {format_rational(total)}, not 1")
        return out

    def validate(self, mode: str = "reduced") -> "PsdTuple":
        errs = self.problems(mode)
        if errs:
            raise InvalidTuple("; ".join(errs))
        return self

    def pad(self, r: int) -> "PsdTuple":
        return PsdTuple(r, tuple(x.pad(r) for x in self.mats))

    def to_json(self) -> dict:
        return {"n": self.n, "r": self.r, "mats": [x.to_json() for x in self.mats]}

    @classmethod
    def from_json(cls, data: dict) -> "PsdTuple":
        mats = tuple(SymMatrix.from_json(m) for m in data["mats"])
        return cls(int(data["r"]), mats)
