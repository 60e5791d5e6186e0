"""Exact linear algebra over the rationals.

Rank is computed by fraction-free elimination on sparse integer rows; every
row is kept primitive (content divided out) so entries stay small.  Nullspaces
go through a dense reduced row echelon form over :class:`fractions.Fraction`.
"""
from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence

Number = int | Fraction


def _as_int_row(row: Mapping[int, Number]) -> dict[int, int]:
    den = 1
    for v in row.values():
        if isinstance(v, Fraction):
            den = lcm(den, v.denominator)
    out = {}
    for c, v in row.items():
        if v:
            out[c] = int(v * den)
    return _primitive(out)


def _primitive(row: dict[int, int]) -> dict[int, int]:
    if not row:
        return row
    g = reduce(gcd, row.values())
    lead = row[min(row)]
    if lead < 0:
        g = -g
    if g != 1:
        row = {c: v // g for c, v in row.items()}
    return row


def _to_sparse(row) -> dict[int, Number]:
    if isinstance(row, Mapping):
        return dict(row)
    return {j: v for j, v in enumerate(row) if v}


class RowEchelon:
    """Incremental echelon form; rows may be added one at a time.

    >>> e = RowEchelon()
    >>> e.add([1, 2]); e.add([2, 4]); e.add([0, 1])
    True
    False
    True
    >>> e.rank
    2
    """

    def __init__(self) -> None:
        self._pivots: dict[int, dict[int, int]] = {}

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def reduce(self, row) -> dict[int, int]:
        cur = _as_int_row(_to_sparse(row))
        while cur:
            c = min(cur)
            p = self._pivots.get(c)
            if p is None:
                return cur
            a, b = p[c], cur[c]
            new = {j: a * v for j, v in cur.items()}
            for j, v in p.items():
                w = new.get(j, 0) - b * v
                if w:
                    new[j] = w
                else:
                    new.pop(j, None)
            cur = _primitive(new)
        return cur

    def add(self, row) -> bool:
        """Insert ``row``; return True iff it increased the rank."""
        cur = self.reduce(row)
        if not cur:
            return False
        self._pivots[min(cur)] = cur
        return True

    def contains(self, row) -> bool:
        return not self.reduce(row)


def rank(rows: Iterable) -> int:
    """Rank over Q of a matrix given as dense sequences or sparse ``{col: value}`` maps."""
    ech = RowEchelon()
    for row in rows:
        ech.add(row)
    return ech.rank


def rref(matrix: Sequence[Sequence[Number]]) -> tuple[list[list[Fraction]], list[int]]:
    m = [[Fraction(v) for v in row] for row in matrix]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def nullspace(matrix: Sequence[Sequence[Number]], ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of ``{x : A x = 0}``, one vector per free column."""
    if ncols is None:
        ncols = len(matrix[0]) if matrix else 0
    if not matrix:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    red, pivots = rref(matrix)
    pivset = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivset:
            continue
        vec = [Fraction(0)] * ncols
        vec[free] = Fraction(1)
        for row, pc in zip(red, pivots):
            vec[pc] = -row[free]
        basis.append(vec)
    return basis


def integer_scaled(vec: Sequence[Fraction]) -> list[int]:
    """Smallest positive multiple of ``vec`` with integer entries and content 1."""
    den = reduce(lcm, (Fraction(v).denominator for v in vec), 1)
    ints = [int(Fraction(v) * den) for v in vec]
    g = reduce(gcd, ints, 0)
    return [v // g for v in ints] if g > 1 else ints
