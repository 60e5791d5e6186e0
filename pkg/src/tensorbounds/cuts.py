"""Exhaustive max-cut / min-cut over all bipartitions of a small graph."""
from __future__ import annotations

import numpy as np

from .tensors import Graph, TensorError

MAX_VERTICES = 24
_CHUNK = 1 << 18


def _cut_extremes(g: Graph) -> tuple[int, int]:
    n = g.vertex_count
    if n < 2:
        raise TensorError("cuts need at least 2 vertices")
    if n > MAX_VERTICES:
        raise TensorError(f"exhaustive cut search limited to {MAX_VERTICES} vertices, got {n}")
    adj = np.zeros((n, n), dtype=np.float64)
    for u, v in g.edges:
        adj[u, v] = adj[v, u] = 1.0
    deg = adj.sum(axis=1)
    shifts = np.arange(n - 1, dtype=np.uint32)
    best_max, best_min = -1, None
    total = 1 << (n - 1)
    # vertex n-1 stays on side 0; masks 1..2^(n-1)-1 enumerate every cut once
    for start in range(1, total, _CHUNK):
        masks = np.arange(start, min(start + _CHUNK, total), dtype=np.uint32)
        x = np.zeros((masks.size, n), dtype=np.float64)
        x[:, : n - 1] = (masks[:, None] >> shifts) & 1
        # cut(x) = d.x - x^T A x
        cut = x @ deg - np.einsum("ij,ij->i", x @ adj, x)
        hi, lo = int(round(cut.max())), int(round(cut.min()))
        best_max = max(best_max, hi)
        best_min = lo if best_min is None else min(best_min, lo)
    return best_max, best_min


def max_cut(g: Graph) -> int:
    return _cut_extremes(g)[0]


def min_cut(g: Graph) -> int:
    return _cut_extremes(g)[1]


def cut_values(g: Graph) -> tuple[int, int]:
    """``(min_cut, max_cut)``."""
    hi, lo = _cut_extremes(g)
    return lo, hi
