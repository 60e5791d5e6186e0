"""Entropies, max-entropy distributions with prescribed marginals, and maximin.

Max-entropy problems with linear marginal constraints are solved by cyclic
iterative proportional fitting in the log domain.  The iterate is always a
Gibbs distribution ``q = exp(sum_f theta_f[feature_f]) / Z``, so the dual
function ``g(theta) = log Z - sum_f <theta_f, target_f>`` is available at every
step; weak duality gives ``max H <= g(theta)`` for any ``theta``, which is how
the returned upper estimate is certified.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .relations import EquivRelation

LN2 = math.log(2.0)
DEFAULT_TOL = 1e-10
MAX_ITER = 100_000

Marginals = tuple[dict[int, float], ...]


class InfeasibleMarginals(ValueError):
    pass


# ---------------------------------------------------------------------------
# entropy arithmetic


def entropy(p) -> float:
    """Shannon entropy in bits; zeros contribute nothing."""
    if isinstance(p, Mapping):
        p = list(p.values())
    v = np.asarray([float(x) for x in p], dtype=float)
    if np.any(v < 0):
        raise ValueError("negative probability")
    s = v.sum()
    if not s > 0:
        raise ValueError("distribution has zero mass")
    v = v[v > 0] / s
    return float(-(v * np.log2(v)).sum())


def binary_entropy(x: float) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy needs x in [0, 1], got {x}")
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def marginals(points: Sequence[Sequence[int]], p: Sequence) -> Marginals:
    """Per-leg marginals ``{symbol: mass}``; Fractions stay exact."""
    if len(points) != len(p):
        raise ValueError("distribution and support differ in length")
    k = len(points[0])
    out: list[dict] = [{} for _ in range(k)]
    for x, w in zip(points, p):
        if not w:
            continue
        for i, s in enumerate(x):
            out[i][s] = out[i].get(s, 0) + w
    return tuple(dict(sorted(m.items())) for m in out)


def uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def as_probabilities(p) -> np.ndarray:
    v = np.asarray([float(Fraction(x)) if isinstance(x, str) else float(x) for x in p], dtype=float)
    if np.any(v < 0) or not v.sum() > 0:
        raise ValueError("not a probability vector")
    return v / v.sum()


# ---------------------------------------------------------------------------
# IPF core


@dataclass
class FitResult:
    q: np.ndarray          # probabilities over the kept items
    keep: np.ndarray       # indices of items with a nonzero-mass feature pattern
    entropy: float         # H(q) in bits
    upper: float           # Gibbs dual value in bits, >= max entropy
    iterations: int
    residual: float        # worst total-variation marginal violation
    converged: bool

    @property
    def dual_gap(self) -> float:
        return max(self.upper - self.entropy, 0.0)

    def full(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        out[self.keep] = self.q
        return out


def _logsumexp(v: np.ndarray) -> float:
    m = v.max()
    return float(m + np.log(np.exp(v - m).sum()))


def fit_max_entropy(
    features: Sequence[np.ndarray],
    targets: Sequence[Mapping[int, float]],
    n_items: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_ITER,
) -> FitResult:
    """Maximize entropy over items subject to ``sum_{item: f(item)=s} q = target_f[s]``.

    ``features[f][item]`` is the symbol that family ``f`` reads off the item.
    """
    feats = [np.asarray(f, dtype=np.int64) for f in features]
    keep = np.ones(n_items, dtype=bool)
    tvec = []
    for f, t in zip(feats, targets):
        size = int(max(f.max(initial=0), max(t, default=0))) + 1
        vec = np.zeros(size)
        for s, w in t.items():
            vec[s] = float(w)
        if np.any(vec < 0):
            raise InfeasibleMarginals("negative target mass")
        vec /= vec.sum()
        tvec.append(vec)
        keep &= vec[f] > 0
    idx = np.flatnonzero(keep)
    if idx.size == 0:
        raise InfeasibleMarginals("no item carries positive target mass on every family")
    feats = [f[idx] for f in feats]
    for fi, (f, vec) in enumerate(zip(feats, tvec)):
        hit = np.bincount(f, minlength=vec.size) > 0
        missing = np.flatnonzero((vec > 0) & ~hit)
        if missing.size:
            raise InfeasibleMarginals(
                f"family {fi}: symbols {missing.tolist()} need mass but no admissible item uses them"
            )
    log_t = [np.where(v > 0, np.log(np.where(v > 0, v, 1.0)), 0.0) for v in tvec]
    theta = [np.zeros(v.size) for v in tvec]
    logits = np.zeros(idx.size)
    prev = np.full(idx.size, 1.0 / idx.size)
    it, converged = 0, False
    while it < max_iter:
        it += 1
        for f, vec, lt, th in zip(feats, tvec, log_t, theta):
            lse = _logsumexp(logits)
            q = np.exp(logits - lse)
            cur = np.bincount(f, weights=q, minlength=vec.size)
            delta = np.where(vec > 0, lt - np.log(np.maximum(cur, 1e-300)), 0.0)
            th += delta
            logits += delta[f]
        lse = _logsumexp(logits)
        q = np.exp(logits - lse)
        change = 0.5 * np.abs(q - prev).sum()
        prev = q
        if change < tol:
            converged = True
            break
    lse = _logsumexp(logits)
    logq = logits - lse
    q = np.exp(logq)
    h = float(-(q * logq).sum()) / LN2
    dual = (lse - sum(float(th @ v) for th, v in zip(theta, tvec))) / LN2
    resid = max(
        0.5 * np.abs(np.bincount(f, weights=q, minlength=v.size) - v).sum() for f, v in zip(feats, tvec)
    )
    return FitResult(q, idx, h, dual, it, float(resid), converged)


# ---------------------------------------------------------------------------
# the two max-entropy problems


def _leg_features(points: Sequence[Sequence[int]]) -> list[np.ndarray]:
    arr = np.asarray(points, dtype=np.int64)
    return [arr[:, i] for i in range(arr.shape[1])]


def max_entropy_on_support(
    points: Sequence[Sequence[int]],
    m: Marginals,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_ITER,
) -> FitResult:
    """The max-entropy distribution on the support with the given leg marginals."""
    if len(points) == 1:
        return FitResult(np.ones(1), np.zeros(1, dtype=np.int64), 0.0, 0.0, 0, 0.0, True)
    return fit_max_entropy(_leg_features(points), m, len(points), tol, max_iter)


@dataclass
class Coupling:
    pairs: list[tuple[int, int]]   # ordered pairs of support indices
    fit: FitResult

    @property
    def entropy(self) -> float:
        return self.fit.entropy

    @property
    def dual_gap(self) -> float:
        return self.fit.dual_gap

    @property
    def upper(self) -> float:
        return max(self.fit.upper, self.fit.entropy)

    def distribution(self) -> np.ndarray:
        return self.fit.full(len(self.pairs))


def max_entropy_coupling(
    points: Sequence[Sequence[int]],
    relation: EquivRelation,
    m: Marginals,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_ITER,
) -> Coupling:
    """Max-entropy ``Q`` on the pairs of ``relation`` whose two halves have marginals ``m``.

    There are ``2k`` constraint families: leg ``i`` of the first copy and leg
    ``i`` of the second copy must both follow ``m[i]``.
    """
    pairs = relation.pairs()
    arr = np.asarray(points, dtype=np.int64)
    left = arr[[a for a, _ in pairs]]
    right = arr[[b for _, b in pairs]]
    k = arr.shape[1]
    feats = [left[:, i] for i in range(k)] + [right[:, i] for i in range(k)]
    fit = fit_max_entropy(feats, list(m) + list(m), len(pairs), tol, max_iter)
    return Coupling(pairs, fit)


# ---------------------------------------------------------------------------
# maximin over marginal entropies


def _marginal_entropies(points_arr: np.ndarray, p: np.ndarray, dims) -> np.ndarray:
    out = np.empty(points_arr.shape[1])
    for i in range(points_arr.shape[1]):
        pm = np.bincount(points_arr[:, i], weights=p, minlength=dims[i])
        pm = pm[pm > 0]
        out[i] = -(pm * np.log2(pm)).sum()
    return out


def maximin_marginal_entropy(
    points: Sequence[Sequence[int]],
    restarts: int = 16,
    steps: int = 10_000,
    seed: int = 0,
    patience: int = 1_000,
) -> tuple[float, np.ndarray]:
    """Best found ``max_P min_i H(P_i)`` with its witness ``P``.

    Exponentiated supergradient ascent on the simplex, step ``c / sqrt(t)``.
    Restart 0 starts from uniform, the others from random Dirichlet points.
    A restart stops early once it reaches the trivial cap ``min_i log2 |leg i|``
    or makes no progress for ``patience`` steps.
    """
    arr = np.asarray(points, dtype=np.int64)
    n = arr.shape[0]
    if n == 1:
        return 0.0, np.ones(1)
    dims = arr.max(axis=0) + 1
    cap = min(math.log2(len(set(arr[:, i].tolist()))) for i in range(arr.shape[1]))
    rng = np.random.default_rng(seed)
    best_val, best_p = -1.0, None
    for r in range(restarts):
        p = uniform(n) if r == 0 else rng.dirichlet(np.ones(n))
        w = np.log(p)
        stale, local = 0, -1.0
        for t in range(1, steps + 1):
            p = np.exp(w - _logsumexp(w))
            hs = _marginal_entropies(arr, p, dims)
            val = float(hs.min())
            if val > best_val + 1e-15:
                best_val, best_p = val, p.copy()
            if val > local + 1e-12:
                local, stale = val, 0
            else:
                stale += 1
            if best_val >= cap - 1e-12 or stale >= patience:
                break
            i = int(hs.argmin())
            pm = np.bincount(arr[:, i], weights=p, minlength=dims[i])
            grad = -np.log2(np.maximum(pm[arr[:, i]], 1e-300))
            w = w + grad / math.sqrt(t)
        if best_val >= cap - 1e-12:
            break
    # the reported value is recomputed from the witness itself
    best_val = float(_marginal_entropies(arr, best_p, dims).min())
    return best_val, best_p
