"""Finite-N re-enactment of the restriction argument behind the entropy bound.

Pipeline on ``Phi^N`` (sequences of ``N`` base support points):

1. keep sequences whose per-leg symbol counts match prescribed types;
2. hash each leg's labeled string into ``Z/M`` and keep points whose hashes
   all land in an average-free set ``B``; tightness forces them to agree;
3. greedily keep one point per connected component of the collision graph.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

import numpy as np

from .entropy import entropy
from .tensors import SparseTensor, TensorError, multinomial
from .tightness import TightLabeling, check_tight, find_labeling

ENUM_BUDGET = 10**7
EXHAUSTIVE_MAX_N = 30


# ---------------------------------------------------------------------------
# primes


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for ``n < 3.3e24``."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    n = max(n, 2)
    while not is_prime(n):
        n += 1
    return n


# ---------------------------------------------------------------------------
# average-free sets


@dataclass(frozen=True)
class AverageFreeSet:
    k: int
    N: int
    elements: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.elements)


def _sum_masks(elements: Sequence[int], k: int) -> list[int]:
    """``masks[j]`` has bit ``s`` set iff some size-``j`` multiset sums to ``s``."""
    masks = [1] + [0] * k
    for a in elements:
        for j in range(1, k + 1):
            # allow repeated use of ``a``: process sizes in increasing order
            masks[j] |= masks[j - 1] << a
    return masks


def _multiset_counts(elements: Sequence[int], k: int) -> list[dict[int, int]]:
    counts: list[dict[int, int]] = [{0: 1}] + [{} for _ in range(k)]
    for a in elements:
        for j in range(1, k + 1):
            for s, c in counts[j - 1].items():
                counts[j][s + a] = counts[j].get(s + a, 0) + c
    return counts


def is_average_free(k: int, elements: Sequence[int]) -> bool:
    """No size-``k`` multiset other than ``{y,...,y}`` sums to ``k*y`` for ``y`` in the set."""
    els = sorted(set(elements))
    if len(els) != len(list(elements)):
        return False
    if k < 2:
        return True
    top = _multiset_counts(els, k)[k]
    return all(top.get(k * y, 0) == 1 for y in els)


def _violates(masks: list[int], chosen_mask: int, a: int, k: int) -> bool:
    # a multiset using ``a`` at least once, the rest from the chosen set, with
    # sum k*y for some chosen y < a
    for c in range(1, k):
        shifted = masks[k - c] << (c * a)
        # targets k*y are encoded in chosen_mask as bits k*y
        if shifted & chosen_mask:
            return True
    return False


def _target_mask(elements: Sequence[int], k: int) -> int:
    m = 0
    for y in elements:
        m |= 1 << (k * y)
    return m


def average_free_set(k: int, N: int, mode: str = "exhaustive", budget: int = 10**8) -> AverageFreeSet:
    """A ``k``-average-free subset of ``[1, N]``; exhaustive mode returns a largest one."""
    if k < 1 or N < 1:
        raise ValueError("need k >= 1 and N >= 1")
    if k < 2:
        return AverageFreeSet(k, N, tuple(range(1, N + 1)))
    if mode == "greedy":
        chosen: list[int] = []
        for a in range(1, N + 1):
            if _addable(chosen, a, k):
                chosen.append(a)
        return AverageFreeSet(k, N, tuple(chosen))
    if mode != "exhaustive":
        raise ValueError(f"unknown mode {mode!r}")
    if N > EXHAUSTIVE_MAX_N:
        raise ValueError(f"exhaustive search limited to N <= {EXHAUSTIVE_MAX_N}")
    best: list[int] = []
    nodes = 0

    def rec(a: int, chosen: list[int], masks: list[int], targets: int):
        nonlocal best, nodes
        nodes += 1
        if nodes > budget:
            raise RuntimeError(f"exhaustive search exceeded {budget} nodes")
        if len(chosen) > len(best):
            best = list(chosen)
        if a > N or len(chosen) + (N - a + 1) <= len(best):
            return
        if not _violates(masks, targets, a, k):
            new = masks[:]
            for j in range(1, k + 1):
                new[j] |= new[j - 1] << a
            rec(a + 1, chosen + [a], new, targets | (1 << (k * a)))
        rec(a + 1, chosen, masks, targets)

    rec(1, [], [1] + [0] * k, 0)
    return AverageFreeSet(k, N, tuple(best))


def _addable(chosen: list[int], a: int, k: int) -> bool:
    return not _violates(_sum_masks(chosen, k), _target_mask(chosen, k), a, k)


# ---------------------------------------------------------------------------
# type classes


@dataclass
class TypeRestriction:
    N: int
    sequences: list[tuple[int, ...]]      # base support indices, one per copy
    leg_types: tuple[dict[int, int], ...]
    type_class_sizes: tuple[int, ...]     # |T^N_{P_i}| per leg
    joint_type_size: int | None = None    # |T^N_P| when a joint type is fixed

    def __len__(self) -> int:
        return len(self.sequences)


def _as_counts(types: Mapping, N: int) -> dict[int, int]:
    vals = {int(s): Fraction(w) for s, w in types.items()}
    # probabilities sum to 1, counts sum to N
    scale = N if sum(vals.values()) == 1 else 1
    out = {}
    for s, w in vals.items():
        c = w * scale
        if c.denominator != 1:
            raise ValueError(f"N * P({s}) = {c} is not an integer")
        if c:
            out[s] = int(c)
    if sum(out.values()) != N:
        raise ValueError(f"type counts sum to {sum(out.values())}, expected {N}")
    return out


def type_class_restrict(
    points: Sequence[Sequence[int]],
    N: int,
    leg_types: Sequence[Mapping],
    joint_type: Mapping | None = None,
    budget: int = ENUM_BUDGET,
) -> TypeRestriction:
    """Sequences in ``Phi^N`` whose leg-``i`` strings have type ``leg_types[i]``.

    Types are given either as probabilities (``N * P`` must be integral) or as
    counts summing to ``N``.  With ``joint_type`` (a map from base index to
    probability or count) only sequences of that exact type are kept.
    """
    n, k = len(points), len(points[0])
    if n**N > budget:
        raise ValueError(f"|Phi|^N = {n**N} exceeds the budget of {budget}")
    want = [_as_counts(t, N) for t in leg_types]
    joint = _as_counts(joint_type, N) if joint_type is not None else None
    out = []
    counts = [Counter() for _ in range(k)]
    jcount: Counter = Counter()
    seq: list[int] = []

    def rec(depth):
        if depth == N:
            out.append(tuple(seq))
            return
        for x in range(n):
            if joint is not None and jcount[x] >= joint.get(x, 0):
                continue
            p = points[x]
            if any(counts[i][p[i]] >= want[i].get(p[i], 0) for i in range(k)):
                continue
            for i in range(k):
                counts[i][p[i]] += 1
            jcount[x] += 1
            seq.append(x)
            rec(depth + 1)
            seq.pop()
            jcount[x] -= 1
            for i in range(k):
                counts[i][p[i]] -= 1

    rec(0)
    sizes = tuple(multinomial(t.values()) for t in want)
    jsize = multinomial(joint.values()) if joint is not None else None
    return TypeRestriction(N, out, tuple(want), sizes, jsize)


def all_sequences(n_points: int, N: int, budget: int = ENUM_BUDGET) -> list[tuple[int, ...]]:
    if n_points**N > budget:
        raise ValueError(f"|Phi|^N = {n_points**N} exceeds the budget of {budget}")
    return list(itertools.product(range(n_points), repeat=N))


def leg_strings(points: Sequence[Sequence[int]], seq: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    """``(I_1, ..., I_k)``: the leg-``i`` symbol string of a sequence of base points."""
    k = len(points[0])
    return tuple(tuple(points[x][i] for x in seq) for i in range(k))


# ---------------------------------------------------------------------------
# hashing


@dataclass(frozen=True)
class HashConfig:
    M: int
    B: tuple[int, ...]
    v: tuple[int, ...]      # one per position
    u: tuple[int, ...]      # k - 1 offsets
    k: int
    seed: int | None = None

    def validate(self) -> None:
        if not is_prime(self.M):
            raise ValueError(f"modulus {self.M} is not prime")
        if self.k >= 2 and math.gcd(self.k - 1, self.M) != 1:
            raise ValueError(f"k - 1 = {self.k - 1} is not invertible mod {self.M}")
        if self.B and max(self.B) * (self.k - 1) >= self.M:
            raise ValueError(f"max(B) = {max(self.B)} is not below M/(k-1) = {self.M / (self.k - 1)}")
        if len(self.u) != self.k - 1:
            raise ValueError("need k - 1 offsets")

    def hashes(self, strings: Sequence[Sequence[int]]) -> tuple[int, ...]:
        M, k = self.M, self.k
        out = []
        for i in range(k - 1):
            out.append((self.u[i] + sum(a * w for a, w in zip(strings[i], self.v))) % M)
        inv = pow(k - 1, -1, M)
        last = (sum(self.u) - sum(a * w for a, w in zip(strings[k - 1], self.v))) * inv % M
        out.append(last)
        return tuple(out)


def sample_hash_config(k: int, N: int, B: Sequence[int], M: int, seed: int, trial: int = 0) -> HashConfig:
    rng = np.random.default_rng([seed, trial])
    v = tuple(int(x) for x in rng.integers(0, M, N))
    u = tuple(int(x) for x in rng.integers(0, M, k - 1))
    cfg = HashConfig(M, tuple(sorted(B)), v, u, k, seed)
    cfg.validate()
    return cfg


@dataclass
class HashResult:
    survivors: list[int]                 # indices into the input
    hashes: list[tuple[int, ...]]
    all_equal: bool


def hash_filter(
    strings: Sequence[Sequence[Sequence[int]]],
    labeling: TightLabeling,
    cfg: HashConfig,
) -> HashResult:
    """Keep points whose ``k`` hashes all lie in ``B``.

    ``strings[j]`` is ``(I_1, ..., I_k)`` in base symbols; the labeling maps
    them to integers before hashing.
    """
    cfg.validate()
    Bset = set(cfg.B)
    keep, hs = [], []
    for j, legs in enumerate(strings):
        lab = [tuple(labeling.maps[i][s] for s in leg) for i, leg in enumerate(legs)]
        h = cfg.hashes(lab)
        if all(b in Bset for b in h):
            keep.append(j)
            hs.append(h)
    return HashResult(keep, hs, all(len(set(h)) == 1 for h in hs))


# ---------------------------------------------------------------------------
# collision elimination


@dataclass
class DiagonalResult:
    selected: list[tuple]
    X: int          # number of input points
    Y: int          # unordered colliding pairs
    components: int

    @property
    def size(self) -> int:
        return len(self.selected)


def collision_pairs(points: Sequence[Sequence[Hashable]]) -> set[tuple[int, int]]:
    pairs: set[tuple[int, int]] = set()
    if not points:
        return pairs
    for i in range(len(points[0])):
        groups: dict = {}
        for j, p in enumerate(points):
            groups.setdefault(p[i], []).append(j)
        for g in groups.values():
            pairs.update(itertools.combinations(g, 2))
    return pairs


def greedy_diagonal(points: Sequence[Sequence[Hashable]], order: Sequence[int] | None = None) -> DiagonalResult:
    """One point per connected component of the collision graph.

    ``order`` lists input indices; within a component the earliest is kept.
    """
    n = len(points)
    order = list(range(n)) if order is None else list(order)
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the point indices")
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    pairs = collision_pairs(points)
    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    taken: set[int] = set()
    selected = []
    for j in order:
        r = find(j)
        if r not in taken:
            taken.add(r)
            selected.append(tuple(points[j]))
    res = DiagonalResult(selected, n, len(pairs), len(taken))
    assert res.size >= res.X - res.Y
    return res


def is_diagonal(points: Sequence[Sequence[Hashable]]) -> bool:
    return not collision_pairs(points)


def induced_support(points: Sequence[Sequence[Hashable]], selected: Sequence[Sequence[Hashable]]) -> list[tuple]:
    """Points of ``points`` whose every coordinate is used by some selected point.

    This is the support left after restricting each leg to the coordinates of
    ``selected``; the restriction is a unit tensor iff it equals ``selected``.
    """
    if not selected:
        return []
    legs = [{tuple(s)[i] for s in selected} for i in range(len(selected[0]))]
    return [tuple(p) for p in points if all(x in leg for x, leg in zip(p, legs))]


# ---------------------------------------------------------------------------
# experiment


@dataclass
class ExperimentConfig:
    N: int = 3
    trials: int = 50
    seed: int = 0
    restrict_types: bool = True
    joint_type: bool = False
    hash: bool = True
    M: int | None = None            # default: smallest prime >= 2^(mu N), at least k
    mu: float = 0.5
    B: tuple[int, ...] | None = None  # default: greedy (k-1)-average-free set below M/(k-1)
    budget: int = ENUM_BUDGET


@dataclass
class ExperimentReport:
    N: int
    trials: int
    psi_size: int
    best_size: int
    best_rate: float
    target_bound: float | None
    flattening_cap: float | None
    M: int | None
    B: list[int] | None
    per_trial: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "trials": self.trials,
            "psi_size": self.psi_size,
            "best_size": self.best_size,
            "best_rate": self.best_rate,
            "target_bound": self.target_bound,
            "flattening_cap": self.flattening_cap,
            "M": self.M,
            "B": self.B,
            "per_trial": self.per_trial,
        }


def uniform_types(points: Sequence[Sequence[int]], N: int) -> list[dict[int, Fraction]]:
    n, k = len(points), len(points[0])
    out = []
    for i in range(k):
        c = Counter(p[i] for p in points)
        out.append({s: Fraction(m, n) for s, m in sorted(c.items())})
    return out


def run_cw_experiment(
    t: SparseTensor,
    cfg: ExperimentConfig | None = None,
    labeling: TightLabeling | None = None,
    target_bound: float | None = None,
    flattening_cap: float | None = None,
) -> ExperimentReport:
    """Type restriction, hashing and collision elimination on ``t^N``, repeated over trials.

    Types default to the marginals of the uniform distribution on the support.
    Rates are ``log2(diagonal size) / N``.
    """
    cfg = cfg or ExperimentConfig()
    pts = list(t.support)
    k, N = t.arity, cfg.N
    if labeling is None:
        labeling = find_labeling(t, cfg.seed)
    elif not check_tight(t, labeling):
        raise TensorError("labeling is not tight")
    if cfg.restrict_types:
        types = uniform_types(pts, N)
        joint = {x: Fraction(1, len(pts)) for x in range(len(pts))} if cfg.joint_type else None
        seqs = type_class_restrict(pts, N, types, joint, cfg.budget).sequences
    else:
        seqs = all_sequences(len(pts), N, cfg.budget)
    strings = [leg_strings(pts, s) for s in seqs]
    M = B = None
    if cfg.hash:
        M = cfg.M or next_prime(max(int(math.ceil(2 ** (cfg.mu * N))), k, 2))
        if k > 2:
            while math.gcd(k - 1, M) != 1:
                M = next_prime(M + 1)
        B = cfg.B
        if B is None:
            hi = (M - 1) // (k - 1) if k > 1 else M - 1
            while hi * (k - 1) >= M:
                hi -= 1
            B = average_free_set(k - 1, hi, "greedy").elements if hi >= 1 else ()
    per = []
    best = 0
    for trial in range(cfg.trials):
        if cfg.hash:
            hc = sample_hash_config(k, N, B, M, cfg.seed, trial)
            hr = hash_filter(strings, labeling, hc)
            kept = [strings[j] for j in hr.survivors]
            equal = hr.all_equal
        else:
            kept, equal = strings, True
        d = greedy_diagonal(kept)
        valid = is_diagonal(d.selected)
        per.append(
            {
                "trial": trial,
                "survivors": len(kept),
                "collisions": d.Y,
                "size": d.size,
                "rate": math.log2(d.size) / N if d.size else 0.0,
                "equal_hash": equal,
                "valid": valid,
            }
        )
        best = max(best, d.size)
    return ExperimentReport(
        N, cfg.trials, len(strings), best, math.log2(best) / N if best else 0.0,
        target_bound, flattening_cap, M, list(B) if B is not None else None, per,
    )


def type_entropy_rate(counts: Mapping[int, int]) -> tuple[float, float]:
    """``log2 |T^N_P| / N`` next to ``H(P)``."""
    N = sum(counts.values())
    return math.log2(multinomial(counts.values())) / N, entropy(list(counts.values()))
