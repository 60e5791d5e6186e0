import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tensorbounds.relations import (
    EnumerationBudgetError,
    EquivRelation,
    PointGroup,
    RelationError,
    bell,
    closure,
    count_relations,
    dicke_symmetry,
    enumerate_maximal_relations,
    enumerate_relations,
    fibers,
    leg_symmetric_group,
    orbit_reduce,
    set_partitions,
    support_symmetry,
)
from tensorbounds.tensors import cycle_graph, dicke_tensor, graph_tensor, unit_tensor, w_tensor
from tensorbounds.tightness import find_labeling, relation_rank

D22 = dicke_tensor((2, 2)).support


def brute_relations(support, axis):
    """Oracle: every partition of the support refining the fibers of ``axis``."""
    out = set()
    for part in set_partitions(list(range(len(support)))):
        if all(len({support[x][axis] for x in b}) == 1 for b in part) and any(len(b) > 1 for b in part):
            out.add(tuple(sorted(tuple(sorted(b)) for b in part)))
    return out


# -- construction -----------------------------------------------------------


def test_from_classes_fills_singletons():
    rel = EquivRelation.from_classes(D22, 0, [[0, 1]])
    assert rel.classes == ((0, 1), (2,), (3,), (4,), (5,))
    assert rel.size == 4 + 4 and rel.type() == (2, 1, 1, 1, 1)


def test_from_classes_rejects_fiber_violation():
    # points 0 and 5 differ on axis 0
    with pytest.raises(RelationError):
        EquivRelation.from_classes(D22, 0, [[0, 5]])


def test_from_classes_rejects_diagonal():
    with pytest.raises(RelationError):
        EquivRelation.from_classes(D22, 0, [[0], [1]])


def test_from_classes_rejects_overlap():
    with pytest.raises(RelationError):
        EquivRelation.from_classes(D22, 0, [[0, 1], [1, 2]])


def test_relation_json_roundtrip():
    rel = EquivRelation.from_classes(D22, 1, [[0, 3]])
    assert EquivRelation.from_dict(rel.to_dict(), D22) == rel


def test_pairs_are_reflexive_and_symmetric():
    rel = EquivRelation.from_classes(D22, 0, [[0, 1, 2]])
    pairs = set(rel.pairs())
    assert all((x, x) in pairs for x in range(6))
    assert all((y, x) in pairs for x, y in pairs)
    assert len(pairs) == rel.size == 9 + 3


# -- closure ----------------------------------------------------------------


def test_closure_single_pair():
    rel = closure(D22, [(0, 1)])
    assert rel.nontrivial == ((0, 1),)


def test_closure_transitive_gives_whole_fiber():
    # D22 sorted: 0=(0,0,1,1) 1=(0,1,0,1) 2=(0,1,1,0); two pairs sharing point 1
    rel = closure(D22, [(0, 1), (1, 2)], axis=0)
    assert rel.nontrivial == ((0, 1, 2),)


def test_closure_idempotent():
    rel = EquivRelation.from_classes(D22, 0, [[0, 1, 2], [3, 4]])
    again = closure(D22, rel.pairs(), axis=0)
    assert again == rel


def test_closure_errors():
    with pytest.raises(RelationError):
        closure(D22, [(0, 0)])
    with pytest.raises(RelationError):
        closure(D22, [(0, 5)])
    with pytest.raises(RelationError):
        closure(D22, [(0, 1)], axis=1)


def test_closure_preserves_rank():
    t = w_tensor(5)
    lab = find_labeling(t, seed=2)
    pts = t.support
    pairs = [(0, 1), (1, 2)]
    axis = next(i for i in range(5) if all(pts[a][i] == pts[b][i] for a, b in pairs))
    rel = closure(pts, pairs, axis)
    raw_rank = relation_rank(lab, EquivRelation.from_classes(pts, axis, [[0, 1, 2]]), pts)
    assert relation_rank(lab, rel, pts) == raw_rank


# -- enumeration ------------------------------------------------------------


def test_bell_numbers():
    assert [bell(n) for n in range(8)] == [1, 1, 2, 5, 15, 52, 203, 877]
    for n in range(7):
        assert sum(1 for _ in set_partitions(list(range(n)))) == bell(n)


def test_d22_axis0_count():
    rels = enumerate_relations(D22, axes=[0])
    assert len(rels) == 24 == bell(3) ** 2 - 1 == count_relations(D22, 0)
    assert {r.classes for r in rels} == brute_relations(D22, 0)


def test_w4_axis0_count():
    pts = w_tensor(4).support
    assert len(enumerate_relations(pts, axes=[0])) == 4 == bell(1) * bell(3) - 1


def test_single_point_has_no_relations():
    assert enumerate_relations(unit_tensor(1, 3).support) == []


def test_enumeration_budget():
    pts = dicke_tensor((3, 3)).support
    with pytest.raises(EnumerationBudgetError):
        enumerate_relations(pts, budget=1000)


@st.composite
def small_supports(draw):
    k = draw(st.integers(2, 3))
    pts = list(itertools.product(range(2), repeat=k))
    chosen = draw(st.lists(st.sampled_from(pts), unique=True, min_size=1, max_size=len(pts)))
    return tuple(sorted(chosen))


@given(sup=small_supports())
def test_enumeration_matches_brute_force(sup):
    k = len(sup[0])
    for axis in range(k):
        got = {r.classes for r in enumerate_relations(sup, axes=[axis])}
        assert got == brute_relations(sup, axis)


def test_fibers():
    assert fibers(D22, 0) == [[0, 1, 2], [3, 4, 5]]


# -- rank-closed relations --------------------------------------------------


@pytest.mark.parametrize(
    "t",
    [dicke_tensor((2, 2)), w_tensor(4), w_tensor(5), dicke_tensor((2, 1, 1)), graph_tensor(cycle_graph(3), 2)],
    ids=["D22", "W4", "W5", "D211", "C3"],
)
def test_maximal_relations_are_rank_closed(t):
    lab = find_labeling(t, seed=0)
    pts = t.support
    labels = [lab.label(p) for p in pts]
    for rel, rank in enumerate_maximal_relations(pts, labels):
        assert relation_rank(lab, rel, pts) == rank
        # no merge of two classes in one fiber keeps the rank
        for c1, c2 in itertools.combinations(rel.classes, 2):
            if pts[c1[0]][rel.axis] != pts[c2[0]][rel.axis]:
                continue
            merged = [c for c in rel.classes if c not in (c1, c2)] + [c1 + c2]
            bigger = EquivRelation.from_classes(pts, rel.axis, merged)
            assert relation_rank(lab, bigger, pts) > rank


@pytest.mark.parametrize("t", [dicke_tensor((2, 2)), w_tensor(4), dicke_tensor((2, 1, 1))], ids=["D22", "W4", "D211"])
def test_every_relation_lies_in_a_maximal_one_of_equal_rank(t):
    lab = find_labeling(t, seed=0)
    pts = t.support
    labels = [lab.label(p) for p in pts]
    flats = enumerate_maximal_relations(pts, labels)
    for rel in enumerate_relations(pts):
        r = relation_rank(lab, rel, pts)
        assert any(rank == r and rel.refines(f) for f, rank in flats)


def test_d22_maximal_relations():
    t = dicke_tensor((2, 2))
    lab = find_labeling(t, seed=0)
    flats = enumerate_maximal_relations(t.support, [lab.label(p) for p in t.support])
    # rank 2: the four whole axes; rank 1: the six {x, y} + complement pairings
    # with |x & y| = 1 on the 1-positions (12 such pairs, matched to complements)
    assert sorted(r for _, r in flats) == [1] * 6 + [2] * 4
    for rel, r in flats:
        assert rel.type() == ((3, 3) if r == 2 else (2, 2, 1, 1))


# -- symmetry ---------------------------------------------------------------


def test_dicke_symmetry_order():
    t = dicke_tensor((2, 2))
    g = dicke_symmetry((2, 2), t)
    # S_4 on legs acts faithfully; the symbol swap is central, so not a leg permutation
    assert g.order == 48
    assert all(sorted(e) == list(range(6)) for e in g.elements)


def test_support_symmetry_rejects_non_symmetry():
    t = w_tensor(3)
    with pytest.raises(RelationError):
        support_symmetry(t, symbol_maps=[[{0: 1, 1: 0}, {}, {}]])


def test_orbit_reduce_min_rank_and_sizes():
    t = dicke_tensor((2, 2))
    g = leg_symmetric_group(t, [(0, 1)])
    rels = enumerate_relations(t.support)
    items = [(r, 1 + (j % 2)) for j, r in enumerate(rels)]
    orbits = orbit_reduce(items, g)
    assert sum(o.size for o in orbits) == len({r.key for r in rels})
    for o in orbits:
        members = [rk for r, rk in items if g.canonical(r.key) == g.canonical(o.representative.key)]
        assert o.rank == min(members)


def test_point_group_closure():
    g = PointGroup.generate([(1, 2, 0)], 3)
    assert g.order == 3
    assert g.is_invariant([1.0, 1.0, 1.0]) and not g.is_invariant([1.0, 2.0, 1.0])
