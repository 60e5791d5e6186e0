"""Entropy lower bounds on the monomial subexponent of tight tensors.

For a distribution ``P`` on the support, the bound is

    H(P) - (k - 2) * max_R (max_Q H(Q) - H(P)) / r(R)

where ``R`` ranges over fiber-respecting equivalence relations, ``Q`` over
distributions on the pairs of ``R`` whose two halves both have the marginals
of ``P``, and ``r(R)`` is the rank of the labeled differences.

Soundness choices made here:

* ``P`` is first replaced by the max-entropy distribution with its marginals
  (the "lift"); the lift is what gets stored and evaluated.
* ``max_Q H(Q)`` is replaced by the Gibbs dual value of the fitted coupling
  plus a fixed margin, which can only overestimate it.
* Relations are either all of them or the rank-closed ones, which attain the
  same maximum.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import entropy as ent
from .relations import (
    DEFAULT_BUDGET,
    EquivRelation,
    Orbit,
    PointGroup,
    enumerate_maximal_relations,
    enumerate_relations,
    orbit_reduce,
)
from .tensors import SparseTensor, TensorError, all_flattening_ranks
from .tightness import TightLabeling, check_tight, find_labeling, relation_rank

MARGIN = 1e-12
TIE_TOL = 1e-12
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class PenaltyTerm:
    relation: EquivRelation
    rank: int
    entropy_q: float
    dual_gap: float
    upper: float        # certified upper estimate of max H(Q), margin included
    value: float        # (upper - H(P)) / rank
    orbit_size: int = 1

    def candidate(self, h_p: float, k: int) -> float:
        return h_p - (k - 2) * self.value

    def to_dict(self, h_p: float | None = None, k: int | None = None) -> dict:
        d = {
            "relation": self.relation.to_dict(),
            "type": list(self.relation.type()),
            "rank": self.rank,
            "entropy_q": self.entropy_q,
            "dual_gap": self.dual_gap,
            "upper": self.upper,
            "penalty": self.value,
            "orbit_size": self.orbit_size,
        }
        if h_p is not None:
            d["candidate"] = self.candidate(h_p, k)
        return d


@dataclass
class BoundCertificate:
    kind: str                       # "main" or "maximin"
    bound: float
    arity: int
    points: list[tuple[int, ...]]
    p: list[float]
    entropy_p: float
    labeling: TightLabeling | None = None
    penalties: list[PenaltyTerm] = field(default_factory=list)
    worst: PenaltyTerm | None = None
    relation_count: int = 0
    mode: str = "maximal"
    symmetry_order: int = 1
    strategy: str = "uniform"
    margin: float = MARGIN

    @property
    def max_penalty(self) -> float:
        return max((t.value for t in self.penalties), default=0.0)

    def marginal_entropies(self) -> list[float]:
        m = ent.marginals(self.points, self.p)
        return [ent.entropy(list(mi.values())) for mi in m]

    def recompute(self) -> float:
        """The bound re-derived from the stored witnesses alone."""
        if self.kind == "maximin":
            return min(self.marginal_entropies())
        h = ent.entropy(self.p)
        if not self.penalties:
            return h
        worst = max((t.upper - h) / t.rank for t in self.penalties)
        return h - (self.arity - 2) * worst

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "bound": self.bound,
            "closed_form": closed_form(self.bound),
            "arity": self.arity,
            "strategy": self.strategy,
            "entropy_p": self.entropy_p,
            "points": [list(x) for x in self.points],
            "p": list(self.p),
        }
        if self.kind == "maximin":
            d["marginal_entropies"] = self.marginal_entropies()
            return d
        d.update(
            {
                "labeling": self.labeling.to_list() if self.labeling else None,
                "max_penalty": self.max_penalty,
                "worst": self.worst.to_dict(self.entropy_p, self.arity) if self.worst else None,
                "penalties": [t.to_dict(self.entropy_p, self.arity) for t in self.penalties],
                "relation_count": self.relation_count,
                "mode": self.mode,
                "symmetry_order": self.symmetry_order,
                "margin": self.margin,
            }
        )
        return d


# ---------------------------------------------------------------------------
# closed forms


def closed_form(value: float, tol: float = 1e-9, max_den: int = 200) -> str | None:
    """Recognize integers, ``log2(p/q)`` and ``h(1/k)`` values."""
    if abs(value - round(value)) < tol:
        return str(int(round(value)))
    for q in range(1, max_den + 1):
        p = round(q * 2.0**value)
        if p > 0 and math.gcd(p, q) == 1 and abs(math.log2(p / q) - value) < tol:
            return f"log2({p})" if q == 1 else f"log2({p}/{q})"
    for k in range(3, 101):
        if abs(ent.binary_entropy(1 / k) - value) < tol:
            return f"h(1/{k})"
    return None


def wstate_closed_form(k: int) -> float:
    if k < 2:
        raise ValueError("k must be at least 2")
    return ent.binary_entropy(1.0 / k)


# ---------------------------------------------------------------------------
# relations with ranks


@dataclass
class RelationSet:
    orbits: list[Orbit]             # reduced list, valid for invariant P only
    full: list[Orbit]               # every enumerated relation as its own orbit
    group: PointGroup | None
    mode: str

    def for_distribution(self, p: np.ndarray) -> tuple[list[Orbit], int]:
        if self.group is not None and self.group.is_invariant(p, SYMMETRY_TOL):
            return self.orbits, self.group.order
        return self.full, 1


def ranked_relations(
    t: SparseTensor,
    labeling: TightLabeling,
    mode: str = "maximal",
    symmetry: PointGroup | None = None,
    budget: int = DEFAULT_BUDGET,
) -> RelationSet:
    sup = t.support
    if mode == "maximal":
        labels = [labeling.label(x) for x in sup]
        items = enumerate_maximal_relations(sup, labels, budget=budget)
    elif mode == "all":
        items = [(r, relation_rank(labeling, r, sup)) for r in enumerate_relations(sup, budget=budget)]
    else:
        raise ValueError(f"unknown relation mode {mode!r}")
    full = [Orbit(r, rk, 1) for r, rk in items]
    orbits = orbit_reduce(items, symmetry) if symmetry is not None else full
    return RelationSet(orbits, full, symmetry, mode)


# ---------------------------------------------------------------------------
# penalties


def lift(points: Sequence[Sequence[int]], p: Sequence[float], tol: float = ent.DEFAULT_TOL) -> np.ndarray:
    """Max-entropy distribution on the support with the marginals of ``p``."""
    fit = ent.max_entropy_on_support(points, ent.marginals(points, list(p)), tol)
    out = fit.full(len(points))
    return out / out.sum()


def _term(points, m, h_p, orbit: Orbit, tol) -> PenaltyTerm:
    c = ent.max_entropy_coupling(points, orbit.representative, m, tol)
    upper = c.upper + MARGIN
    return PenaltyTerm(
        orbit.representative, orbit.rank, c.entropy, c.dual_gap, upper,
        (upper - h_p) / orbit.rank, orbit.size,
    )


def _terms_job(args):
    points, m, h_p, orbits, tol = args
    return [_term(points, m, h_p, o, tol) for o in orbits]


def penalty(
    points: Sequence[Sequence[int]],
    m: ent.Marginals,
    relation: EquivRelation,
    labeling: TightLabeling,
    tol: float = ent.DEFAULT_TOL,
) -> float:
    """``(max H(Q) - H(P*)) / r(R)`` with ``P*`` the max-entropy lift of ``m``, rounded up."""
    fit = ent.max_entropy_on_support(points, m, tol)
    p_star = fit.full(len(points))
    m_star = ent.marginals(points, p_star)
    h_p = ent.entropy(p_star)
    rk = relation_rank(labeling, relation, points)
    return _term(points, m_star, h_p, Orbit(relation, rk, 1), tol).value


def _pick_worst(terms: list[PenaltyTerm]) -> PenaltyTerm:
    top = max(t.value for t in terms)
    tied = [t for t in terms if t.value >= top - TIE_TOL]
    return min(tied, key=lambda t: (t.relation.key, t.relation.axis))


def evaluate(
    t: SparseTensor,
    p: Sequence[float],
    labeling: TightLabeling,
    relations: RelationSet,
    tol: float = ent.DEFAULT_TOL,
    workers: int = 1,
    strategy: str = "user",
) -> BoundCertificate:
    """Bound certificate for one candidate distribution (lifted first)."""
    points = list(t.support)
    k = t.arity
    p_hat = lift(points, p, tol)
    h_p = ent.entropy(p_hat)
    m_hat = ent.marginals(points, p_hat)
    if k <= 2:
        return BoundCertificate("main", h_p, k, points, p_hat.tolist(), h_p, labeling,
                                mode=relations.mode, strategy=strategy)
    orbits, order = relations.for_distribution(p_hat)
    if workers > 1 and len(orbits) > 1:
        chunks = [orbits[j::workers] for j in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = pool.map(_terms_job, [(points, m_hat, h_p, c, tol) for c in chunks])
        # restore enumeration order so the output does not depend on scheduling
        pos = {id(o): j for j, o in enumerate(orbits)}
        flat = [(pos[id(c[i])], term) for c, part in zip(chunks, parts) for i, term in enumerate(part)]
        terms = [term for _, term in sorted(flat, key=lambda z: z[0])]
    else:
        terms = [_term(points, m_hat, h_p, o, tol) for o in orbits]
    if not terms:
        return BoundCertificate("main", h_p, k, points, p_hat.tolist(), h_p, labeling,
                                mode=relations.mode, strategy=strategy)
    worst = _pick_worst(terms)
    # the witness is tie-broken; the bound uses the exact maximum
    bound = h_p - (k - 2) * max(t.value for t in terms)
    return BoundCertificate(
        "main", bound, k, points, p_hat.tolist(), h_p, labeling, terms, worst,
        relation_count=sum(o.size for o in orbits), mode=relations.mode,
        symmetry_order=order, strategy=strategy,
    )


# ---------------------------------------------------------------------------
# outer optimization


@dataclass
class BoundConfig:
    strategy: str = "uniform"       # uniform | user | ascent
    mode: str = "maximal"           # maximal | all
    seed: int = 0
    tol: float = ent.DEFAULT_TOL
    budget: int = DEFAULT_BUDGET
    restarts: int = 8
    ascent_steps: int = 40
    step_size: float = 0.5
    workers: int = 1


def main_lower_bound(
    t: SparseTensor,
    config: BoundConfig | None = None,
    labeling: TightLabeling | None = None,
    p: Sequence | None = None,
    symmetry: PointGroup | None = None,
) -> BoundCertificate:
    cfg = config or BoundConfig()
    if t.arity < 2:
        raise TensorError("the bound needs arity at least 2")
    if labeling is None:
        labeling = find_labeling(t, cfg.seed)
    elif not check_tight(t, labeling):
        raise TensorError("supplied labeling is not tight for this support")
    rels = ranked_relations(t, labeling, cfg.mode, symmetry, cfg.budget)
    n = len(t)

    def run(q, name):
        return evaluate(t, q, labeling, rels, cfg.tol, cfg.workers, name)

    if cfg.strategy == "user" or (cfg.strategy == "uniform" and p is not None):
        if p is None:
            raise ValueError("strategy 'user' needs a distribution")
        q = ent.as_probabilities(p)
        if q.size != n:
            raise ValueError(f"distribution has {q.size} entries, support has {n}")
        return run(q, "user")
    best = run(ent.uniform(n), "uniform")
    if cfg.strategy == "uniform":
        return best
    if cfg.strategy != "ascent":
        raise ValueError(f"unknown strategy {cfg.strategy!r}")
    rng = np.random.default_rng(cfg.seed)
    for r in range(cfg.restarts):
        w = np.zeros(n) if r == 0 else rng.normal(0.0, 1.0, n)
        cur = run(np.exp(w) / np.exp(w).sum(), "ascent")
        scale = cfg.step_size
        for _ in range(cfg.ascent_steps):
            w2 = w + rng.normal(0.0, scale, n)
            cand = run(np.exp(w2) / np.exp(w2).sum(), "ascent")
            if cand.bound > cur.bound:
                w, cur = w2, cand
            else:
                scale *= 0.9
        if cur.bound > best.bound:
            best = cur
    return best


def strassen_bound(
    t: SparseTensor, restarts: int = 16, steps: int = 10_000, seed: int = 0
) -> BoundCertificate:
    """``max_P min_i H(P_i)`` for a tight 3-tensor, with its witness."""
    if t.arity != 3:
        raise TensorError(f"needs a 3-tensor, got arity {t.arity}")
    labeling = find_labeling(t, seed)
    points = list(t.support)
    val, p = ent.maximin_marginal_entropy(points, restarts, steps, seed)
    return BoundCertificate("maximin", val, 3, points, p.tolist(), ent.entropy(p), labeling,
                            strategy="maximin")


def flattening_cap(t: SparseTensor) -> float:
    """``min`` over flattenings of ``log2`` rank, an upper bound on the subexponent."""
    return min(math.log2(r) for r in all_flattening_ranks(t).values())

