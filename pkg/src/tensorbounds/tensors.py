"""Sparse tensors with exact coefficients and the tensor families used throughout.

A k-tensor is stored by its support: each support point is a tuple of k basis
indices (0-based) and maps to a nonzero :class:`~fractions.Fraction`.

Mixed-radix convention.  Whenever several indices are packed into one leg index
(graph tensors, tensor products, flattenings) the first index is the most
significant digit.  For graph tensors the indices packed into the leg of vertex
``v`` are the symbols of the edges incident to ``v``, with edges sorted
lexicographically by endpoint pair.
"""
from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, prod
from typing import Iterable, Mapping, Sequence

from .exact import RowEchelon

Point = tuple[int, ...]

SUPPORT_BUDGET = 2**22
POWER_BUDGET = 10**7


class TensorError(ValueError):
    pass


def _radix(digits: Sequence[int], bases: Sequence[int]) -> int:
    out = 0
    for d, b in zip(digits, bases):
        out = out * b + d
    return out


def _unradix(value: int, bases: Sequence[int]) -> tuple[int, ...]:
    digits = []
    for b in reversed(bases):
        value, d = divmod(value, b)
        digits.append(d)
    return tuple(reversed(digits))


@dataclass(frozen=True)
class SparseTensor:
    dims: tuple[int, ...]
    entries: Mapping[Point, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if any(d < 1 for d in dims):
            raise TensorError(f"alphabet sizes must be positive, got {dims}")
        clean = {}
        for pt, c in self.entries.items():
            pt = tuple(int(x) for x in pt)
            if len(pt) != len(dims):
                raise TensorError(f"point {pt} has wrong arity for dims {dims}")
            if any(not 0 <= x < d for x, d in zip(pt, dims)):
                raise TensorError(f"point {pt} out of range for dims {dims}")
            c = Fraction(c)
            if c:
                clean[pt] = c
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    @classmethod
    def from_support(cls, dims: Sequence[int], points: Iterable[Sequence[int]]) -> "SparseTensor":
        return cls(tuple(dims), {tuple(p): Fraction(1) for p in points})

    @property
    def arity(self) -> int:
        return len(self.dims)

    @property
    def support(self) -> tuple[Point, ...]:
        return tuple(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def occurring(self, leg: int) -> list[int]:
        return sorted({p[leg] for p in self.entries})

    def indicator(self) -> "SparseTensor":
        return SparseTensor.from_support(self.dims, self.entries)

    def permute_legs(self, perm: Sequence[int]) -> "SparseTensor":
        """Leg ``j`` of the result is leg ``perm[j]`` of ``self``."""
        return SparseTensor(
            tuple(self.dims[p] for p in perm),
            {tuple(pt[p] for p in perm): c for pt, c in self.entries.items()},
        )

    def relabel(self, maps: Sequence[Mapping[int, int]], dims: Sequence[int] | None = None) -> "SparseTensor":
        dims = tuple(dims) if dims is not None else self.dims
        return SparseTensor(
            dims, {tuple(m[x] for m, x in zip(maps, pt)): c for pt, c in self.entries.items()}
        )

    def compact(self) -> "SparseTensor":
        """Drop unused symbols, renumbering each leg's occurring indices in order."""
        maps = [{v: j for j, v in enumerate(self.occurring(i))} for i in range(self.arity)]
        return self.relabel(maps, [max(len(m), 1) for m in maps])

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "arity": self.arity,
            "dims": list(self.dims),
            "entries": [{"point": list(p), "coeff": str(c)} for p, c in self.entries.items()],
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "SparseTensor":
        dims = doc["dims"]
        if "arity" in doc and doc["arity"] != len(dims):
            raise TensorError("arity does not match dims")
        return cls(tuple(dims), {tuple(e["point"]): Fraction(str(e["coeff"])) for e in doc["entries"]})

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SparseTensor":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class Graph:
    vertex_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.vertex_count < 1:
            raise TensorError("a graph needs at least one vertex")
        norm = []
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise TensorError(f"self-loop at vertex {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise TensorError(f"edge {(u, v)} out of range")
            norm.append((min(u, v), max(u, v)))
        if len(set(norm)) != len(norm):
            raise TensorError("duplicate edge")
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    def incident(self, v: int) -> list[tuple[int, int]]:
        return [e for e in self.edges if v in e]

    def degree(self, v: int) -> int:
        return len(self.incident(v))

    def cut_size(self, side: Iterable[int]) -> int:
        s = set(side)
        return sum((u in s) != (v in s) for u, v in self.edges)

    def to_dict(self) -> dict:
        return {"vertices": self.vertex_count, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Graph":
        return cls(int(doc["vertices"]), tuple(tuple(e) for e in doc["edges"]))


def complete_graph(k: int) -> Graph:
    return Graph(k, tuple(itertools.combinations(range(k), 2)))


def cycle_graph(k: int) -> Graph:
    if k < 3:
        raise TensorError("cycles need at least 3 vertices")
    return Graph(k, tuple((i, (i + 1) % k) for i in range(k)))


def path_graph(k: int) -> Graph:
    return Graph(k, tuple((i, i + 1) for i in range(k - 1)))


# ---------------------------------------------------------------------------
# tensor families


def graph_tensor_weighted(g: Graph, weights: Mapping[tuple[int, int], int]) -> SparseTensor:
    """Graph tensor where edge ``e`` carries the symbols ``range(weights[e])``."""
    w = {}
    for e in g.edges:
        key = e if e in weights else (e[1], e[0])
        if key not in weights:
            raise TensorError(f"missing weight for edge {e}")
        if int(weights[key]) < 1:
            raise TensorError(f"edge weight must be >= 1, got {weights[key]} for {e}")
        w[e] = int(weights[key])
    size = prod(w.values())
    if size > SUPPORT_BUDGET:
        raise TensorError(f"graph tensor support of {size} points exceeds the budget of {SUPPORT_BUDGET}")
    inc = [g.incident(v) for v in range(g.vertex_count)]
    edge_pos = {e: j for j, e in enumerate(g.edges)}
    bases = [[w[e] for e in es] for es in inc]
    dims = tuple(prod(b) for b in bases)
    points = []
    for sym in itertools.product(*(range(w[e]) for e in g.edges)):
        points.append(tuple(
            _radix([sym[edge_pos[e]] for e in es], b) for es, b in zip(inc, bases)
        ))
    return SparseTensor.from_support(dims, points)


def graph_tensor(g: Graph, n: int = 2) -> SparseTensor:
    if n < 1:
        raise TensorError("n must be >= 1")
    return graph_tensor_weighted(g, {e: n for e in g.edges})


def matmul_tensor(n1: int, n2: int, n3: int) -> SparseTensor:
    """Rectangular matrix multiplication tensor as the weighted triangle tensor."""
    return graph_tensor_weighted(cycle_graph(3), {(0, 1): n2, (1, 2): n3, (0, 2): n1})


def _multiset_permutations(items: Sequence[int]):
    counts = Counter(items)
    symbols = sorted(counts)
    n = len(items)
    out: list[int] = []

    def rec():
        if len(out) == n:
            yield tuple(out)
            return
        for s in symbols:
            if counts[s]:
                counts[s] -= 1
                out.append(s)
                yield from rec()
                out.pop()
                counts[s] += 1

    yield from rec()


def dicke_tensor(lam: Sequence[int]) -> SparseTensor:
    """Weight-``lam`` Dicke tensor: symbol ``j`` occurs ``lam[j]`` times in every support point."""
    lam = tuple(int(x) for x in lam)
    if not lam or any(x < 1 for x in lam):
        raise TensorError(f"partition parts must be positive, got {lam}")
    word = [j for j, m in enumerate(lam) for _ in range(m)]
    n = len(lam)
    return SparseTensor.from_support((n,) * len(word), _multiset_permutations(word))


def w_tensor(k: int) -> SparseTensor:
    """W-state tensor on k legs; symbol 1 marks the single excited leg."""
    return dicke_tensor((k - 1, 1))


def unit_tensor(r: int, k: int) -> SparseTensor:
    if r < 1 or k < 1:
        raise TensorError("unit tensor needs r >= 1 and k >= 1")
    return SparseTensor.from_support((r,) * k, [(i,) * k for i in range(r)])


def cw_tensor(q: int, k: int) -> SparseTensor:
    """Generalized Coppersmith-Winograd tensor: one nonzero symbol repeated on two legs."""
    if q < 1 or k < 2:
        raise TensorError("cw_tensor needs q >= 1 and k >= 2")
    points = []
    for a, b in itertools.combinations(range(k), 2):
        for s in range(1, q + 1):
            pt = [0] * k
            pt[a] = pt[b] = s
            points.append(tuple(pt))
    return SparseTensor.from_support((q + 1,) * k, points)


def multinomial(counts: Iterable[int]) -> int:
    counts = list(counts)
    out = factorial(sum(counts))
    for c in counts:
        out //= factorial(c)
    return out


# ---------------------------------------------------------------------------
# algebra


def tensor_product(a: SparseTensor, b: SparseTensor) -> SparseTensor:
    if a.arity != b.arity:
        raise TensorError(f"arity mismatch: {a.arity} vs {b.arity}")
    dims = tuple(da * db for da, db in zip(a.dims, b.dims))
    entries = {}
    for pa, ca in a.entries.items():
        for pb, cb in b.entries.items():
            entries[tuple(x * db + y for x, y, db in zip(pa, pb, b.dims))] = ca * cb
    return SparseTensor(dims, entries)


def tensor_power(a: SparseTensor, n: int, budget: int = POWER_BUDGET) -> SparseTensor:
    if n < 1:
        raise TensorError("power must be >= 1")
    if len(a) ** n > budget:
        raise TensorError(f"|supp|^N = {len(a)}^{n} exceeds budget {budget}")
    out = a
    for _ in range(n - 1):
        out = tensor_product(out, a)
    return out


def flattening_rank(t: SparseTensor, legs_left: Iterable[int]) -> int:
    left = sorted(set(legs_left))
    right = [i for i in range(t.arity) if i not in left]
    if not left or not right:
        raise TensorError("flattening needs a nonempty proper subset of legs")
    rb = [t.dims[i] for i in right]
    rows: dict[tuple, dict[int, Fraction]] = {}
    for pt, c in t.entries.items():
        rk = tuple(pt[i] for i in left)
        rows.setdefault(rk, {})[_radix([pt[i] for i in right], rb)] = c
    ech = RowEchelon()
    # repeated rows add nothing to the rank
    for row in {frozenset(r.items()): r for r in rows.values()}.values():
        ech.add(row)
    return ech.rank


def all_flattening_ranks(t: SparseTensor) -> dict[tuple[int, ...], int]:
    """Rank of every flattening, keyed by the side containing leg 0."""
    out = {}
    rest = range(1, t.arity)
    for size in range(0, t.arity - 1):
        for extra in itertools.combinations(rest, size):
            left = (0,) + extra
            out[left] = flattening_rank(t, left)
    return out


# ---------------------------------------------------------------------------
# product partitions


@dataclass(frozen=True)
class ProductPartition:
    """Per-leg partitions of the index sets into blocks."""

    blocks: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self):
        norm = tuple(tuple(tuple(sorted(b)) for b in leg) for leg in self.blocks)
        for i, leg in enumerate(norm):
            flat = [x for b in leg for x in b]
            if any(not b for b in leg):
                raise TensorError(f"empty block on leg {i}")
            if sorted(flat) != list(range(len(flat))):
                raise TensorError(f"blocks on leg {i} do not partition range({len(flat)})")
        object.__setattr__(self, "blocks", norm)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(sum(len(b) for b in leg) for leg in self.blocks)

    def block_of(self) -> list[dict[int, int]]:
        return [{x: j for j, b in enumerate(leg) for x in b} for leg in self.blocks]

    def product(self, other: "ProductPartition") -> "ProductPartition":
        if len(self.blocks) != len(other.blocks):
            raise TensorError("arity mismatch")
        legs = []
        for la, lb, db in zip(self.blocks, other.blocks, other.sizes):
            legs.append(tuple(
                tuple(x * db + y for x in ba for y in bb) for ba in la for bb in lb
            ))
        return ProductPartition(tuple(legs))

    @classmethod
    def singletons(cls, dims: Sequence[int]) -> "ProductPartition":
        return cls(tuple(tuple((x,) for x in range(d)) for d in dims))

    @classmethod
    def whole(cls, dims: Sequence[int]) -> "ProductPartition":
        return cls(tuple((tuple(range(d)),) for d in dims))

    @classmethod
    def uniform(cls, k: int, leg_blocks: Sequence[Sequence[int]]) -> "ProductPartition":
        return cls(tuple(tuple(tuple(b) for b in leg_blocks) for _ in range(k)))


def outer_structure(t: SparseTensor, p: ProductPartition) -> SparseTensor:
    if p.sizes != t.dims:
        raise TensorError(f"partition sizes {p.sizes} incompatible with dims {t.dims}")
    where = p.block_of()
    dims = tuple(len(leg) for leg in p.blocks)
    return SparseTensor.from_support(
        dims, {tuple(w[x] for w, x in zip(where, pt)) for pt in t.entries}
    )

