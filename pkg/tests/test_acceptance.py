"""Acceptance criteria, one test per criterion, each at its stated tolerance.

Every test records a PASS or FAIL line (shown in the terminal summary).
"""
import itertools
import json
import math
import time

import networkx as nx
import numpy as np
import pytest

from conftest import ALGILL_SELECTED, record, run_cli
from tensorbounds.engine import main_lower_bound, strassen_bound
from tensorbounds.entropy import (
    binary_entropy,
    entropy,
    marginals,
    max_entropy_coupling,
    max_entropy_on_support,
    uniform,
)
from tensorbounds.exponents import check_cw_border_certificate, cw_tau_bound
from tensorbounds.lab import (
    average_free_set,
    greedy_diagonal,
    hash_filter,
    is_diagonal,
    leg_strings,
    sample_hash_config,
    type_class_restrict,
)
from tensorbounds.relations import EquivRelation, dicke_symmetry, enumerate_relations
from tensorbounds.tensors import (
    Graph,
    ProductPartition,
    TensorError,
    all_flattening_ranks,
    complete_graph,
    cw_tensor,
    cycle_graph,
    dicke_tensor,
    graph_tensor,
    outer_structure,
    unit_tensor,
    w_tensor,
)
from tensorbounds.tightness import find_labeling, relation_rank

TABLE_LOWER = [2, 4, 6, 9, 12, 16, 20, 25]
TABLE_UPPER = [2.37287, 4.63766, 7.72943, 11.5942, 16.2319, 21.6425, 27.8260, 34.7825]
TABLE_TAU_UPPER = [0.790955] + [0.772943] * 7


def _flateq(k):
    return 0.5 + 1 / (2 * k) if k % 2 else 0.5 + 1 / (2 * (k - 1))


def test_criterion_01_dicke22_cli():
    t0 = time.perf_counter()
    code, out, _ = run_cli("bound", "dicke", "--lambda", "2,2", "--precision", "full")
    dt = time.perf_counter() - t0
    res = json.loads(out)
    h = res["certificate"]["entropy_p"]
    cands = [term["candidate"] for term in res["certificate"]["penalties"]]
    arith = min(1.0, math.log2(54 / 25))
    ok = (
        code == 0
        and abs(res["bound"] - 1.0) < 1e-9
        and abs(h - math.log2(6)) < 1e-9
        and abs(min(cands) - arith) < 1e-9
        and any(abs(c - math.log2(54 / 25)) < 1e-7 for c in cands)
        and dt < 5
    )
    record(1, ok, f"bound={res['bound']:.12f}, min candidate={min(cands):.12f}, "
                  f"min(1, log2(54/25))={arith}, {dt:.2f}s")
    assert ok


def test_criterion_02_wstates():
    t0 = time.perf_counter()
    errs = {k: abs(main_lower_bound(w_tensor(k)).bound - binary_entropy(1 / k)) for k in range(3, 8)}
    dt = time.perf_counter() - t0
    ok = max(errs.values()) < 1e-6 and dt < 60
    record(2, ok, f"max |bound - h(1/k)| over k=3..7 = {max(errs.values()):.2e}, {dt:.2f}s")
    assert ok


def test_criterion_03_tripartite():
    vals = {}
    for name, t, want in [("D111", dicke_tensor((1, 1, 1)), math.log2(3)),
                          ("C3", graph_tensor(cycle_graph(3), 2), 2.0)]:
        vals[name] = (main_lower_bound(t).bound - want, strassen_bound(t).bound - want)
    worst = max(abs(x) for pair in vals.values() for x in pair)
    ok = worst < 1e-6
    record(3, ok, f"max deviation of main/strassen from log2 3 and 2 = {worst:.2e}")
    assert ok


def test_criterion_04_cw_bound():
    rows = [cw_tau_bound(k, 1.0) for k in range(4, 11)]
    ok = all(q == 7 and abs(tau - 0.772943) < 1e-6 for q, tau in rows)
    record(4, ok, f"q*={rows[0][0]}, tau*={rows[0][1]:.9f} for k=4..10")
    assert ok


def test_criterion_05_table():
    code, out, _ = run_cli("table", "complete", "--kmax", "10", "--format", "csv")
    lines = out.strip().splitlines()[1:]
    bad = []
    for j, line in enumerate(lines):
        k, lo, up, e, tlo, tup = line.split(",")
        k = int(k)
        if int(lo) != TABLE_LOWER[j]:
            bad.append((k, "lower"))
        if round(float(up), 4) != round(TABLE_UPPER[j], 4):
            bad.append((k, "upper"))
        if int(e) != math.comb(k, 2):
            bad.append((k, "edges"))
        if abs(float(tlo) - _flateq(k)) >= 1e-6:
            bad.append((k, "tau lower"))
        if round(float(tup), 4) != round(TABLE_TAU_UPPER[j], 4):
            bad.append((k, "tau upper"))
    ok = code == 0 and len(lines) == 8 and not bad
    record(5, ok, f"{len(lines)} rows, mismatches: {bad or 'none'}")
    assert ok


def test_criterion_06_border_certificate():
    t0 = time.perf_counter()
    failures = [(q, k) for q in range(1, 5) for k in range(2, 6)
                if not check_cw_border_certificate(q, k).passed]
    mutant = check_cw_border_certificate(1, 3, constant=(1, -2))
    dt = time.perf_counter() - t0
    ok = not failures and not mutant.passed and mutant.failed_order == 1 and dt < 30
    record(6, ok, f"16 cases pass={not failures}, mutant fails at eps^{mutant.failed_order}, {dt:.2f}s")
    assert ok


def test_criterion_07_outer_structure():
    bad = []
    for q in (1, 2, 3):
        for k in (3, 4, 5):
            out = outer_structure(cw_tensor(q, k), ProductPartition.uniform(k, [[0], list(range(1, q + 1))]))
            # two copies of the {b_1..b_q} block; the rest in {b_0}
            swapped = {tuple(1 - x for x in p) for p in dicke_tensor((2, k - 2)).support}
            if out != dicke_tensor((k - 2, 2)) or set(out.support) != swapped:
                bad.append((q, k))
    ok = not bad
    record(7, ok, f"outer structure is the Dicke tensor with two b_1..b_q legs for 9 cases, mismatches: {bad or 'none'}")
    assert ok


def test_criterion_08_collision_property():
    rng = np.random.default_rng(20240101)
    worst = None
    for _ in range(1000):
        n, k, d = int(rng.integers(1, 30)), int(rng.integers(2, 5)), int(rng.integers(2, 6))
        pts = list(dict.fromkeys(tuple(int(x) for x in r) for r in rng.integers(0, d, (n, k))))
        res = greedy_diagonal(pts, list(rng.permutation(len(pts))))
        slack = res.size - (res.X - res.Y)
        if not is_diagonal(res.selected) or slack < 0:
            worst = (pts, res)
            break
    ok = worst is None
    record("8 (property half)", ok, "size >= |Psi| - |C| and selection diagonal on 1000 random supports")
    assert ok


@pytest.mark.xfail(strict=True, reason="collision graph of the listed support is connected; see notes")
def test_criterion_08_listed_pair(algill_points):
    res = greedy_diagonal(algill_points, list(range(len(algill_points))))
    ok = sorted(res.selected) == sorted(ALGILL_SELECTED)
    record(8, ok, f"greedy selects {res.size} point(s) (X={res.X}, Y={res.Y}, "
                  f"components={res.components}); the listed pair is not one-per-component")
    assert ok


def _closed_form_couplings():
    d22 = dicke_tensor((2, 2)).support
    m = marginals(d22, uniform(6))
    yield "D22 whole axis", d22, EquivRelation.from_classes(d22, 0, [[0, 1, 2], [3, 4, 5]]), m, math.log2(18)
    p = np.random.default_rng(0).dirichlet(np.ones(6))
    fit = max_entropy_on_support(d22, marginals(d22, p))
    m2 = marginals(d22, fit.full(6))
    yield "diagonal", d22, EquivRelation.diagonal(6), m2, entropy(fit.full(6))
    w5 = w_tensor(5).support
    alone = next(j for j, x in enumerate(w5) if x[0] == 1)
    rest = [j for j in range(5) if j != alone]
    rel = EquivRelation.from_classes(w5, 0, [[alone], rest[:2], rest[2:]])
    yield "W5 type (2,2,1)", w5, rel, marginals(w5, uniform(5)), 2 * math.log2(5) - entropy([0.4, 0.4, 0.2])


def _coupling_residual(points, rel, m, q):
    worst = 0.0
    for half in (0, 1):
        for i in range(len(points[0])):
            got = {}
            for pair, w in zip(rel.pairs(), q):
                s = points[pair[half]][i]
                got[s] = got.get(s, 0.0) + w
            worst = max(worst, max(abs(got.get(s, 0.0) - float(m[i].get(s, 0))) for s in set(got) | set(m[i])))
    return worst


def test_criterion_09_property_suites():
    notes = []
    # couplings
    ok_c = True
    for name, pts, rel, m, want in _closed_form_couplings():
        c = max_entropy_coupling(pts, rel, m)
        r = _coupling_residual(pts, rel, m, c.distribution())
        ok_c &= r < 1e-9 and c.dual_gap < 1e-9 and abs(c.entropy - want) < 1e-8
    notes.append(f"couplings={ok_c}")
    # hashing
    t = w_tensor(3)
    lab = find_labeling(t, seed=0)
    pts = t.support
    seqs = type_class_restrict(pts, 3, [{0: 2, 1: 1}] * 3).sequences
    strings = [leg_strings(pts, s) for s in seqs]
    ok_h = all(hash_filter(strings, lab, sample_hash_config(3, 3, (1, 2), 11, 7, j)).all_equal for j in range(200))
    notes.append(f"hash={ok_h}")
    # average-free sets, checked by brute force
    ok_a = True
    for k in (2, 3, 4):
        for N in range(1, 16):
            s = set(average_free_set(k, N).elements)
            for combo in itertools.combinations_with_replacement(sorted(s), k):
                if sum(combo) % k == 0 and sum(combo) // k in s and len(set(combo)) > 1:
                    ok_a = False
    notes.append(f"avgfree={ok_a}")
    # flattening ranks on every materializable graph: all graphs on <= 7 vertices
    # with <= 8 edges up to isomorphism, and seeded graphs on 8 vertices
    graphs = [Graph(G.number_of_nodes(), tuple(sorted(tuple(sorted(e)) for e in G.edges())))
              for G in nx.graph_atlas_g() if G.number_of_nodes() >= 2 and 1 <= G.number_of_edges() <= 8]
    rng = np.random.default_rng(8)
    all_edges = list(itertools.combinations(range(8), 2))
    for _ in range(25):
        m_e = int(rng.integers(1, 9))
        chosen = sorted(all_edges[j] for j in rng.choice(len(all_edges), m_e, replace=False))
        graphs.append(Graph(8, tuple(chosen)))
    ok_f = True
    for g in graphs:
        for left, rk in all_flattening_ranks(graph_tensor(g, 2)).items():
            ok_f &= rk == 2 ** g.cut_size(list(left))
    notes.append(f"flattening={ok_f} on {len(graphs)} graphs")
    # relation ranks
    ok_r = True
    for t in [dicke_tensor((2, 2)), dicke_tensor((1, 1, 1)), dicke_tensor((2, 1, 1)), w_tensor(3), w_tensor(4),
              w_tensor(5), graph_tensor(cycle_graph(3), 2), cw_tensor(1, 4), unit_tensor(3, 3)]:
        lab = find_labeling(t, seed=3)
        for rel in enumerate_relations(t.support):
            ok_r &= 1 <= relation_rank(lab, rel, t.support) <= t.arity - 2
    notes.append(f"relation ranks={ok_r}")
    ok = ok_c and ok_h and ok_a and ok_f and ok_r
    record("9 (materializable scope)", ok, ", ".join(notes))
    assert ok


@pytest.mark.xfail(strict=True, raises=TensorError, reason="T(K_8) has 2^28 support points")
def test_criterion_09_dense_graphs():
    ok = False
    try:
        all_flattening_ranks(graph_tensor(complete_graph(8), 2))
        ok = True
    finally:
        record("9 (dense graphs)", ok, "graphs on 8 vertices with many edges exceed the support budget; "
                                        "checked only up to 8 edges")


def test_criterion_10_dicke33_probe():
    t = dicke_tensor((3, 3))
    t0 = time.perf_counter()
    cert = main_lower_bound(t, symmetry=dicke_symmetry((3, 3), t))
    dt = time.perf_counter() - t0
    target = entropy([0.5, 0.5])
    ok = cert.bound >= target - 1e-4
    record(10, ok, f"D_(3,3) bound={cert.bound:.9f} >= H(1/2,1/2) - 1e-4, group order "
                   f"{cert.symmetry_order}, {dt:.2f}s; larger l not attempted")
    assert ok
