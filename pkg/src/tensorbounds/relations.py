"""Fiber-respecting equivalence relations on a support, and their enumeration.

A relation on axis ``i`` is a set partition of the support points (referred to
by their index in the support ordering) such that every class lies inside one
fiber ``{x : x_i = v}``.  The induced pair set is ``{(x, y) : x ~ y}``.

Two enumeration modes are offered:

``"all"``
    every combination of set partitions of the fibers (minus the all-singleton
    one), i.e. every equivalence relation contained in the fiber relation.
``"maximal"``
    only rank-closed relations ``{(x, y) : a(x) - a(y) in V}`` for subspaces
    ``V`` spanned by within-fiber label differences.  Any relation sits inside
    the rank-closed relation of its own span with the same rank, and the
    coupling entropy can only grow with the pair set, so the penalty maximum is
    the same over both families.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd, prod
from typing import Iterable, Mapping, Sequence

import numpy as np

from .tensors import Point, SparseTensor, TensorError

DEFAULT_BUDGET = 10**6
GROUP_LIMIT = 200_000


class EnumerationBudgetError(RuntimeError):
    pass


class RelationError(ValueError):
    pass


Classes = tuple[tuple[int, ...], ...]


def _canonical(classes: Iterable[Iterable[int]]) -> Classes:
    return tuple(sorted(tuple(sorted(c)) for c in classes))


@dataclass(frozen=True)
class EquivRelation:
    axis: int
    classes: Classes  # every support index appears in exactly one class

    @classmethod
    def from_classes(
        cls,
        support: Sequence[Point],
        axis: int,
        classes: Iterable[Iterable[int]],
        allow_diagonal: bool = False,
    ) -> "EquivRelation":
        given = [list(c) for c in classes if len(list(c))]
        seen: set[int] = set()
        for c in given:
            for x in c:
                if not 0 <= x < len(support):
                    raise RelationError(f"point index {x} out of range")
                if x in seen:
                    raise RelationError(f"point index {x} appears in two classes")
                seen.add(x)
            vals = {support[x][axis] for x in c}
            if len(vals) > 1:
                raise RelationError(f"class {sorted(c)} leaves the fiber of axis {axis}")
        given += [[x] for x in range(len(support)) if x not in seen]
        rel = cls(axis, _canonical(given))
        if not allow_diagonal and rel.is_diagonal:
            raise RelationError("relation is contained in the diagonal")
        return rel

    @classmethod
    def diagonal(cls, n_points: int, axis: int = 0) -> "EquivRelation":
        return cls(axis, tuple((x,) for x in range(n_points)))

    @property
    def n_points(self) -> int:
        return sum(len(c) for c in self.classes)

    @property
    def is_diagonal(self) -> bool:
        return all(len(c) == 1 for c in self.classes)

    @property
    def nontrivial(self) -> Classes:
        return tuple(c for c in self.classes if len(c) > 1)

    @property
    def key(self) -> Classes:
        return self.nontrivial

    @property
    def size(self) -> int:
        """Number of ordered pairs, diagonal included."""
        return sum(len(c) ** 2 for c in self.classes)

    def type(self) -> tuple[int, ...]:
        return tuple(sorted((len(c) for c in self.classes), reverse=True))

    def pairs(self) -> list[tuple[int, int]]:
        return [(x, y) for c in self.classes for x in c for y in c]

    def refines(self, other: "EquivRelation") -> bool:
        where = {x: j for j, c in enumerate(other.classes) for x in c}
        return all(len({where[x] for x in c}) == 1 for c in self.classes)

    def to_dict(self) -> dict:
        return {"axis": self.axis, "classes": [list(c) for c in self.classes]}

    @classmethod
    def from_dict(cls, doc: Mapping, support: Sequence[Point]) -> "EquivRelation":
        return cls.from_classes(support, int(doc["axis"]), doc["classes"])


def fibers(support: Sequence[Point], axis: int) -> list[list[int]]:
    by: dict[int, list[int]] = {}
    for j, p in enumerate(support):
        by.setdefault(p[axis], []).append(j)
    return [by[v] for v in sorted(by)]


# ---------------------------------------------------------------------------
# closure


def _union_find(n: int, pairs: Iterable[tuple[int, int]]) -> list[list[int]]:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for a in range(n):
        groups.setdefault(find(a), []).append(a)
    return list(groups.values())


def common_axes(support: Sequence[Point], pairs: Iterable[tuple[int, int]]) -> list[int]:
    pairs = list(pairs)
    k = len(support[0])
    return [i for i in range(k) if all(support[x][i] == support[y][i] for x, y in pairs)]


def closure(support: Sequence[Point], pairs: Iterable[tuple[int, int]], axis: int | None = None) -> EquivRelation:
    """Reflexive, symmetric, transitive closure of a pair set on a common axis."""
    pairs = [(int(a), int(b)) for a, b in pairs]
    off = [(a, b) for a, b in pairs if a != b]
    if not off:
        raise RelationError("pair set is contained in the diagonal")
    axes = common_axes(support, off)
    if axis is None:
        if not axes:
            raise RelationError("pairs do not agree on any common axis")
        axis = axes[0]
    elif axis not in axes:
        raise RelationError(f"pairs do not all agree on axis {axis}")
    return EquivRelation.from_classes(support, axis, _union_find(len(support), off))


# ---------------------------------------------------------------------------
# set partitions


def set_partitions(items: Sequence[int]):
    """All set partitions of ``items`` (restricted growth strings)."""
    items = list(items)
    n = len(items)
    if n == 0:
        yield []
        return
    rgs = [0] * n

    def rec(i, m):
        if i == n:
            blocks: list[list[int]] = [[] for _ in range(m + 1)]
            for it, b in zip(items, rgs):
                blocks[b].append(it)
            yield blocks
            return
        for b in range(m + 2):
            rgs[i] = b
            yield from rec(i + 1, max(m, b))

    rgs[0] = 0
    yield from rec(1, 0)


def bell(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


# ---------------------------------------------------------------------------
# symmetry


@dataclass(frozen=True)
class PointGroup:
    """A permutation group acting on support indices, stored element-wise."""

    elements: tuple[tuple[int, ...], ...]
    generators: tuple[tuple[int, ...], ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    @classmethod
    def generate(cls, gens: Sequence[Sequence[int]], n: int, limit: int = GROUP_LIMIT) -> "PointGroup":
        ident = tuple(range(n))
        gens = [tuple(g) for g in gens if tuple(g) != ident]
        seen = {ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for h in frontier:
                for g in gens:
                    e = tuple(g[h[x]] for x in range(n))
                    if e not in seen:
                        seen.add(e)
                        nxt.append(e)
                        if len(seen) > limit:
                            raise EnumerationBudgetError(f"symmetry group larger than {limit}")
            frontier = nxt
        return cls(tuple(sorted(seen)), tuple(gens))

    def canonical(self, classes: Classes) -> Classes:
        best = None
        for g in self.elements:
            img = tuple(sorted(tuple(sorted(g[x] for x in c)) for c in classes))
            if best is None or img < best:
                best = img
        return best

    def is_invariant(self, values: Sequence[float], tol: float = 1e-9) -> bool:
        v = np.asarray(values, dtype=float)
        return all(np.max(np.abs(v[list(g)] - v)) <= tol for g in self.generators) if self.generators else True


def point_permutation(support: Sequence[Point], leg_perm: Sequence[int], symbol_maps: Sequence[Mapping[int, int]] | None = None) -> tuple[int, ...]:
    """Permutation of support indices induced by ``y_j = s_j(x_{leg_perm[j]})``.

    Raises if the map does not send the support onto itself.
    """
    index = {p: j for j, p in enumerate(support)}
    k = len(leg_perm)
    out = []
    for p in support:
        img = tuple(
            (symbol_maps[j].get(p[leg_perm[j]], p[leg_perm[j]]) if symbol_maps else p[leg_perm[j]])
            for j in range(k)
        )
        if img not in index:
            raise RelationError(f"symmetry maps support point {p} outside the support")
        out.append(index[img])
    if len(set(out)) != len(out):
        raise RelationError("symmetry is not a bijection of the support")
    return tuple(out)


def support_symmetry(
    t: SparseTensor,
    leg_perms: Sequence[Sequence[int]] = (),
    symbol_maps: Sequence[Sequence[Mapping[int, int]]] = (),
) -> PointGroup:
    """Group generated by the given leg permutations and per-leg symbol maps.

    Each generator is checked to map the support onto itself.
    """
    sup = t.support
    k = t.arity
    gens = [point_permutation(sup, lp) for lp in leg_perms]
    gens += [point_permutation(sup, tuple(range(k)), sm) for sm in symbol_maps]
    return PointGroup.generate(gens, len(sup))


def leg_symmetric_group(t: SparseTensor, symbol_swaps: Sequence[tuple[int, int]] = ()) -> PointGroup:
    """All leg permutations (adjacent transpositions as generators) plus global symbol swaps."""
    k = t.arity
    legs = []
    for i in range(k - 1):
        p = list(range(k))
        p[i], p[i + 1] = p[i + 1], p[i]
        legs.append(p)
    maps = [[{a: b, b: a} for _ in range(k)] for a, b in symbol_swaps]
    return support_symmetry(t, legs, maps)


def dicke_symmetry(lam: Sequence[int], t: SparseTensor) -> PointGroup:
    swaps = [(a, b) for a, b in itertools.combinations(range(len(lam)), 2) if lam[a] == lam[b]]
    return leg_symmetric_group(t, swaps)


# ---------------------------------------------------------------------------
# enumeration


def count_relations(support: Sequence[Point], axis: int) -> int:
    return prod(bell(len(f)) for f in fibers(support, axis)) - 1


def enumerate_relations(
    support: Sequence[Point],
    axes: Iterable[int] | None = None,
    symmetry: PointGroup | None = None,
    budget: int = DEFAULT_BUDGET,
) -> list[EquivRelation]:
    """Every non-diagonal fiber-respecting equivalence relation, per axis.

    With ``symmetry`` only one representative per orbit is returned; the caller
    is responsible for checking that its distribution is invariant.
    """
    if not support:
        return []
    k = len(support[0])
    axes = range(k) if axes is None else axes
    out: list[EquivRelation] = []
    seen: set[Classes] = set()
    for axis in axes:
        fibs = fibers(support, axis)
        total = count_relations(support, axis)
        if total > budget:
            raise EnumerationBudgetError(
                f"axis {axis}: {total} relations exceed the budget of {budget}"
            )
        for combo in itertools.product(*(list(set_partitions(f)) for f in fibs)):
            classes = [b for part in combo for b in part]
            if all(len(b) == 1 for b in classes):
                continue
            rel = EquivRelation(axis, _canonical(classes))
            # a pair set inside several R_i is one relation; keep the first axis
            key = symmetry.canonical(rel.key) if symmetry else rel.key
            if key in seen:
                continue
            seen.add(key)
            out.append(rel)
    return out


def _reduce_rows(sig: list[list[int]]) -> list[list[int]]:
    # divide each annihilator row by its content across all points
    m = len(sig[0]) if sig else 0
    for j in range(m):
        g = 0
        for row in sig:
            g = gcd(g, row[j])
        if g > 1:
            for row in sig:
                row[j] //= g
    return sig


class _Flat:
    """A rank-closed relation on one axis, stored through point signatures.

    ``sig[x] = N a(x)`` where the rows of ``N`` span the annihilator of the
    difference span ``V``.  Then ``a(x) - a(y)`` lies in ``V`` iff the
    signatures agree, and ``rank V = k - (number of annihilator rows)``.
    """

    __slots__ = ("sig", "rank", "classes")

    def __init__(self, sig, rank, fiber_of):
        self.sig = sig
        self.rank = rank
        groups: dict = {}
        for x, row in enumerate(sig):
            groups.setdefault((fiber_of[x], tuple(row)), []).append(x)
        self.classes = _canonical(groups.values())

    def merge(self, x: int, y: int, fiber_of) -> "_Flat":
        c = [a - b for a, b in zip(self.sig[x], self.sig[y])]
        p = next(j for j, v in enumerate(c) if v)
        cp = c[p]
        sig = [
            [cp * row[j] - c[j] * row[p] for j in range(len(row)) if j != p]
            for row in self.sig
        ]
        return _Flat(_reduce_rows(sig), self.rank + 1, fiber_of)


def enumerate_maximal_relations(
    support: Sequence[Point],
    labels: Sequence[Sequence[int]],
    axes: Iterable[int] | None = None,
    budget: int = DEFAULT_BUDGET,
) -> list[tuple[EquivRelation, int]]:
    """Rank-closed relations with their ranks under the labeling ``labels``.

    ``labels[j]`` is the integer label vector ``(a_1(x_1), ..., a_k(x_k))`` of
    support point ``j``.  Returns ``(relation, rank)`` pairs; a pair set that is
    rank-closed on several axes is reported once.
    """
    if not support:
        return []
    k = len(support[0])
    axes = range(k) if axes is None else axes
    out: list[tuple[EquivRelation, int]] = []
    emitted: set[Classes] = set()
    base = [list(int(v) for v in row) for row in labels]
    for axis in axes:
        fiber_of = [p[axis] for p in support]
        seen: set[Classes] = set()
        frontier = [_Flat(base, 0, fiber_of)]
        while frontier:
            nxt = []
            for flat in frontier:
                for c1, c2 in itertools.combinations(flat.classes, 2):
                    if fiber_of[c1[0]] != fiber_of[c2[0]]:
                        continue
                    succ = flat.merge(c1[0], c2[0], fiber_of)
                    key = tuple(c for c in succ.classes if len(c) > 1)
                    if key in seen:
                        continue
                    seen.add(key)
                    nxt.append(succ)
                    if key not in emitted:
                        emitted.add(key)
                        out.append((EquivRelation(axis, succ.classes), succ.rank))
                        if len(out) > budget:
                            raise EnumerationBudgetError(f"more than {budget} rank-closed relations")
            frontier = nxt
    return out


@dataclass(frozen=True)
class Orbit:
    representative: EquivRelation
    rank: int  # smallest rank over the orbit members that were enumerated
    size: int


def orbit_reduce(items: Sequence[tuple[EquivRelation, int]], group: PointGroup) -> list[Orbit]:
    """Group enumerated ``(relation, rank)`` pairs into symmetry orbits.

    The representative is the member with the smallest encoding.  Taking the
    minimum rank keeps penalties conservative even if the labeling is not
    symmetric itself.
    """
    merged: dict[Classes, tuple[EquivRelation, int]] = {}
    for rel, rank in items:
        prev = merged.get(rel.key)
        if prev is None or rank < prev[1]:
            merged[rel.key] = (rel if prev is None else prev[0], rank)
    items = list(merged.values())
    index = {rel.key: j for j, (rel, _) in enumerate(items)}
    done = [False] * len(items)
    out = []
    for j, (rel, _) in enumerate(items):
        if done[j]:
            continue
        members = set()
        for g in group.elements:
            img = tuple(sorted(tuple(sorted(g[x] for x in c)) for c in rel.key))
            m = index.get(img)
            if m is not None:
                members.add(m)
        for m in members:
            done[m] = True
        rep = min(members, key=lambda m: items[m][0].key)
        out.append(Orbit(items[rep][0], min(items[m][1] for m in members), len(members)))
    return out
