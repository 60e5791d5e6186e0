"""Tensors with entries in Q[eps], truncated at a fixed eps-degree.

Used to check border-rank identities of the form
``sum_j (polynomial rank-one terms) = eps^d * T + O(eps^(d+1))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .tensors import Point, SparseTensor, TensorError

Poly = tuple[Fraction, ...]


def poly(*coeffs) -> Poly:
    """``poly(1, -2)`` is ``1 - 2 eps``."""
    return _trim(tuple(Fraction(c) for c in coeffs))


def _trim(p: Sequence[Fraction]) -> Poly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def poly_mul(a: Poly, b: Poly, max_degree: int) -> Poly:
    out = [Fraction(0)] * min(len(a) + len(b) - 1, max_degree + 1) if a and b else []
    for i, x in enumerate(a):
        if i > max_degree:
            break
        for j, y in enumerate(b):
            if i + j > max_degree:
                break
            out[i + j] += x * y
    return _trim(out)


def poly_add(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


@dataclass(frozen=True)
class PolyTensor:
    dims: tuple[int, ...]
    max_degree: int
    entries: Mapping[Point, Poly] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for pt, p in self.entries.items():
            p = _trim(tuple(Fraction(c) for c in p[: self.max_degree + 1]))
            if p:
                clean[tuple(pt)] = p
        object.__setattr__(self, "dims", tuple(self.dims))
        object.__setattr__(self, "entries", clean)

    @classmethod
    def zero(cls, dims: Sequence[int], max_degree: int) -> "PolyTensor":
        return cls(tuple(dims), max_degree, {})

    @classmethod
    def rank_one(cls, vectors: Sequence[Mapping[int, Poly]], dims: Sequence[int], max_degree: int) -> "PolyTensor":
        """Outer product of k sparse polynomial vectors, truncated as it is built."""
        partial: dict[Point, Poly] = {(): (Fraction(1),)}
        for vec in vectors:
            nxt: dict[Point, Poly] = {}
            for pt, p in partial.items():
                for x, q in vec.items():
                    r = poly_mul(p, q, max_degree)
                    if r:
                        nxt[pt + (x,)] = r
            partial = nxt
        return cls(tuple(dims), max_degree, partial)

    def __add__(self, other: "PolyTensor") -> "PolyTensor":
        if self.dims != other.dims:
            raise TensorError("dims mismatch")
        out = dict(self.entries)
        for pt, p in other.entries.items():
            out[pt] = poly_add(out.get(pt, ()), p)
        return PolyTensor(self.dims, min(self.max_degree, other.max_degree), out)

    def scale(self, s: Poly) -> "PolyTensor":
        return PolyTensor(
            self.dims, self.max_degree,
            {pt: poly_mul(p, s, self.max_degree) for pt, p in self.entries.items()},
        )

    def __neg__(self) -> "PolyTensor":
        return self.scale(poly(-1))

    def __sub__(self, other: "PolyTensor") -> "PolyTensor":
        return self + (-other)

    def coefficient(self, degree: int) -> SparseTensor:
        return SparseTensor(
            self.dims,
            {pt: p[degree] for pt, p in self.entries.items() if degree < len(p) and p[degree]},
        )

    def lowest_degree(self) -> int | None:
        degs = [next(i for i, c in enumerate(p) if c) for p in self.entries.values()]
        return min(degs) if degs else None

    def support_size(self) -> int:
        return len(self.entries)


def power_rank_one(vec: Mapping[int, Poly], k: int, dim: int, max_degree: int) -> PolyTensor:
    return PolyTensor.rank_one([vec] * k, (dim,) * k, max_degree)


def expansion_size(q: int, k: int) -> int:
    """Number of (term, point) pairs the CW identity expansion may touch."""
    return (q + 2) * (q + 1) ** k

