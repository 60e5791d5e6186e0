"""Tight labelings: checking, synthesis, and ranks of labeled differences.

A labeling assigns to each leg ``i`` a map ``a_i`` from that leg's symbols to
integers.  It is *tight* when ``a_1(x_1) + ... + a_k(x_k) = 0`` on every
support point and each ``a_i`` is injective on the symbols occurring on leg i.

The linear space of all (possibly non-injective) sum-zero labelings is the
nullspace of the point/symbol incidence matrix.  A generic element of it is
injective unless some difference ``a_i(b) - a_i(b')`` vanishes on the whole
space, which is then a certificate that no tight labeling exists.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .exact import RowEchelon, integer_scaled, nullspace
from .relations import EquivRelation
from .tensors import SparseTensor, TensorError

RETRIES = 64
COEFF_BOX = 10**6


class NotTight(ValueError):
    """No tight labeling exists; ``leg`` and ``symbols`` witness it."""

    def __init__(self, leg: int, symbols: tuple[int, int]):
        self.leg = leg
        self.symbols = symbols
        super().__init__(
            f"not tight: a({symbols[0]}) - a({symbols[1]}) on leg {leg} vanishes on every sum-zero labeling"
        )


class Undetermined(RuntimeError):
    pass


@dataclass(frozen=True)
class TightLabeling:
    maps: tuple[tuple[int, ...], ...]  # maps[i][b] = a_i(b)

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(tuple(int(v) for v in m) for m in self.maps))

    @property
    def arity(self) -> int:
        return len(self.maps)

    def label(self, point: Sequence[int]) -> tuple[int, ...]:
        return tuple(m[x] for m, x in zip(self.maps, point))

    def to_list(self) -> list[list[int]]:
        return [list(m) for m in self.maps]

    @classmethod
    def from_list(cls, doc: Sequence[Sequence[int]]) -> "TightLabeling":
        return cls(tuple(tuple(int(v) for v in m) for m in doc))


def _check_dims(t: SparseTensor, a: TightLabeling) -> None:
    if a.arity != t.arity or any(len(m) != d for m, d in zip(a.maps, t.dims)):
        raise TensorError(
            f"labeling shape {[len(m) for m in a.maps]} does not match dims {list(t.dims)}"
        )


def check_tight(t: SparseTensor, a: TightLabeling) -> bool:
    _check_dims(t, a)
    if any(sum(a.label(p)) != 0 for p in t.support):
        return False
    for i in range(t.arity):
        vals = [a.maps[i][b] for b in t.occurring(i)]
        if len(set(vals)) != len(vals):
            return False
    return True


@dataclass(frozen=True)
class LabelingSpace:
    """Integer basis of the sum-zero labelings, restricted to occurring symbols.

    ``columns[j] = (leg, symbol)`` names coordinate ``j`` of each basis vector.
    """

    dims: tuple[int, ...]
    columns: tuple[tuple[int, int], ...]
    basis: tuple[tuple[int, ...], ...]

    @classmethod
    def of(cls, t: SparseTensor) -> "LabelingSpace":
        if not len(t):
            raise TensorError("support is empty")
        cols = [(i, b) for i in range(t.arity) for b in t.occurring(i)]
        where = {c: j for j, c in enumerate(cols)}
        rows = []
        for p in t.support:
            row = [0] * len(cols)
            for i, x in enumerate(p):
                row[where[(i, x)]] += 1
            rows.append(row)
        basis = tuple(tuple(integer_scaled(v)) for v in nullspace(rows, len(cols)))
        return cls(tuple(t.dims), tuple(cols), basis)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def functional(self, leg: int, b: int, b2: int) -> list[int]:
        j, j2 = self.columns.index((leg, b)), self.columns.index((leg, b2))
        return [v[j] - v[j2] for v in self.basis]

    def obstruction(self) -> tuple[int, tuple[int, int]] | None:
        """A leg and symbol pair whose label difference is identically zero."""
        by_leg: dict[int, list[int]] = {}
        for j, (i, b) in enumerate(self.columns):
            by_leg.setdefault(i, []).append(j)
        for i in sorted(by_leg):
            js = by_leg[i]
            # two symbols are forced equal iff their coordinate columns coincide
            seen: dict[tuple[int, ...], int] = {}
            for j in js:
                col = tuple(v[j] for v in self.basis)
                if col in seen:
                    return i, (self.columns[seen[col]][1], self.columns[j][1])
                seen[col] = j
        return None

    def combine(self, coeffs: Sequence[int]) -> TightLabeling:
        """Labeling ``sum_j coeffs[j] * basis[j]``; non-occurring symbols get fresh labels."""
        vals = [sum(c * v[j] for c, v in zip(coeffs, self.basis)) for j in range(len(self.columns))]
        maps = [[None] * d for d in self.dims]
        for (i, b), v in zip(self.columns, vals):
            maps[i][b] = v
        for m in maps:
            used = [v for v in m if v is not None]
            nxt = max(used, default=0) + 1
            for b, v in enumerate(m):
                if v is None:
                    m[b] = nxt
                    nxt += 1
        return TightLabeling(tuple(tuple(m) for m in maps))

    def sample(self, rng: random.Random, box: int = COEFF_BOX) -> TightLabeling:
        return self.combine([rng.randint(-box, box) for _ in self.basis])


def find_labeling(t: SparseTensor, seed: int = 0, retries: int = RETRIES) -> TightLabeling:
    """Synthesize a tight labeling.

    Raises :class:`NotTight` with a certificate, or :class:`Undetermined` if the
    retry budget runs out (which should not happen for a tight support).
    """
    space = LabelingSpace.of(t)
    obs = space.obstruction()
    if obs is not None:
        raise NotTight(*obs)
    rng = random.Random(seed)
    for _ in range(retries):
        a = space.sample(rng)
        if check_tight(t, a):
            return a
    raise Undetermined(f"no injective labeling found in {retries} samples")


# ---------------------------------------------------------------------------
# ranks


def _difference_rows(labels: Sequence[Sequence[int]], relation: EquivRelation):
    # differences to a class representative span the same space as all pairs
    for c in relation.classes:
        x0 = labels[c[0]]
        for y in c[1:]:
            yield [a - b for a, b in zip(labels[y], x0)]


def relation_rank(
    a: TightLabeling | LabelingSpace,
    relation: EquivRelation,
    support: Sequence[Sequence[int]],
    samples: int = 32,
    seed: int = 0,
) -> int:
    """Rank over Q of the rows ``a(x) - a(y)`` for ``(x, y)`` in the relation.

    For a :class:`LabelingSpace` the generic rank over the space is returned.
    """
    if relation.n_points != len(support):
        raise TensorError(
            f"relation covers {relation.n_points} points, support has {len(support)}"
        )
    if isinstance(a, TightLabeling):
        labels = [a.label(p) for p in support]
        ech = RowEchelon()
        for row in _difference_rows(labels, relation):
            ech.add(row)
        return ech.rank
    return _generic_rank(a, relation, support, samples, seed)


def _generic_rank(space: LabelingSpace, relation, support, samples, seed) -> int:
    if not space.basis:
        return 0
    k = len(support[0])
    per_basis = []
    for j in range(space.dimension):
        coeffs = [int(i == j) for i in range(space.dimension)]
        per_basis.append(space.combine(coeffs))
    # rank of the concatenation [M_1 | ... | M_d] bounds every specialization
    concat = RowEchelon()
    label_sets = [[lab.label(p) for p in support] for lab in per_basis]
    for c in relation.classes:
        for y in c[1:]:
            row = []
            for labels in label_sets:
                row += [a - b for a, b in zip(labels[y], labels[c[0]])]
            concat.add(row)
    cap = min(concat.rank, k)
    rng = random.Random(seed)
    best = 0
    for _ in range(samples):
        lab = space.sample(rng)
        best = max(best, relation_rank(lab, relation, support))
        if best >= cap:
            break
    return best


def generic_difference_rank(t: SparseTensor, relation: EquivRelation, seed: int = 0) -> int:
    return relation_rank(LabelingSpace.of(t), relation, t.support, seed=seed)

