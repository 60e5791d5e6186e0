import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ALGILL_SELECTED
from tensorbounds.engine import flattening_cap
from tensorbounds.lab import (
    ExperimentConfig,
    HashConfig,
    all_sequences,
    average_free_set,
    collision_pairs,
    greedy_diagonal,
    hash_filter,
    induced_support,
    is_average_free,
    is_diagonal,
    is_prime,
    leg_strings,
    next_prime,
    run_cw_experiment,
    sample_hash_config,
    type_class_restrict,
    type_entropy_rate,
)
from tensorbounds.tensors import dicke_tensor, unit_tensor, w_tensor
from tensorbounds.tightness import find_labeling


def brute_average_free(k, elements):
    """Oracle: no k-multiset of the set averages to a member unless it is constant."""
    s = set(elements)
    for combo in itertools.combinations_with_replacement(sorted(s), k):
        tot = sum(combo)
        if tot % k == 0 and tot // k in s and len(set(combo)) > 1:
            return False
    return True


def brute_max_average_free(k, N):
    for size in range(N, 0, -1):
        for sub in itertools.combinations(range(1, N + 1), size):
            if brute_average_free(k, sub):
                return size
    return 0


# -- primes and average-free sets -------------------------------------------


def test_primes():
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert next_prime(24) == 29 and next_prime(29) == 29


def test_average_free_examples():
    s = average_free_set(2, 9, "exhaustive")
    assert len(s) == 5 == brute_max_average_free(2, 9)
    assert brute_average_free(2, s.elements)
    assert brute_average_free(2, (1, 2, 6, 8, 9))
    assert len(average_free_set(2, 3)) == 2
    assert not brute_average_free(2, (1, 2, 3))
    for k in (2, 3, 5):
        assert average_free_set(k, 1).elements == (1,)


@pytest.mark.parametrize("k,N", [(2, 12), (3, 10), (4, 8)])
def test_exhaustive_is_maximum(k, N):
    assert len(average_free_set(k, N)) == brute_max_average_free(k, N)


@given(st.integers(2, 5), st.integers(1, 40))
def test_greedy_average_free_valid(k, N):
    s = average_free_set(k, N, "greedy")
    assert brute_average_free(k, s.elements)
    assert is_average_free(k, s.elements)
    assert all(1 <= a <= N for a in s.elements)


@given(st.integers(2, 4), st.lists(st.integers(1, 25), unique=True, max_size=7))
def test_is_average_free_matches_oracle(k, elems):
    assert is_average_free(k, sorted(elems)) == brute_average_free(k, elems)


def test_exhaustive_limit():
    with pytest.raises(ValueError):
        average_free_set(2, 31, "exhaustive")


# -- type classes -----------------------------------------------------------


def test_w3_type_restriction():
    pts = w_tensor(3).support
    third = [{0: 2, 1: 1}] * 3
    res = type_class_restrict(pts, 3, third)
    brute = [s for s in all_sequences(3, 3)
             if all(sum(leg) == 1 for leg in leg_strings(pts, s))]
    assert len(res) == 6 == len(brute)
    assert sorted(res.sequences) == sorted(brute)


def test_single_copy_type_restriction():
    pts = dicke_tensor((2, 2)).support
    x = pts[2]
    res = type_class_restrict(pts, 1, [{s: 1} for s in x])
    assert [pts[s[0]] for s in res.sequences] == [x]


def test_d22_two_copy_restriction():
    pts = dicke_tensor((2, 2)).support
    res = type_class_restrict(pts, 2, [{0: 1, 1: 1}] * 4)
    brute = [s for s in all_sequences(6, 2)
             if all(sorted(leg) == [0, 1] for leg in leg_strings(pts, s))]
    # every leg must see one 0 and one 1, so the second point is the complement of the first
    assert len(res) == len(brute) == 6


def test_type_restriction_errors():
    pts = w_tensor(3).support
    with pytest.raises(ValueError):
        type_class_restrict(pts, 2, [{0: "2/3", 1: "1/3"}] * 3)
    with pytest.raises(ValueError):
        type_class_restrict(pts, 20, [{0: 20}] * 3)


@settings(max_examples=40)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=3).filter(lambda c: 1 <= sum(c) <= 8))
def test_multinomial_matches_enumeration(counts):
    N = sum(counts)
    pts = [(s,) for s in range(len(counts))]
    res = type_class_restrict(pts, N, [{s: c for s, c in enumerate(counts)}])
    brute = sum(1 for w in itertools.product(range(len(counts)), repeat=N)
                if Counter(w) == Counter({s: c for s, c in enumerate(counts) if c}))
    assert len(res) == brute == res.type_class_sizes[0]


def test_type_entropy_rate_below_entropy():
    rate, h = type_entropy_rate({0: 4, 1: 4})
    assert rate == pytest.approx(math.log2(70) / 8)
    assert rate < h == 1.0


# -- hashing ----------------------------------------------------------------


def _w3_strings(N):
    pts = w_tensor(3).support
    res = type_class_restrict(pts, N, [{0: N - N // 3, 1: N // 3}] * 3) if N % 3 == 0 else None
    seqs = res.sequences if res else all_sequences(3, N)
    return [leg_strings(pts, s) for s in seqs]


def test_hash_survivors_equal_over_trials():
    t = w_tensor(3)
    lab = find_labeling(t, seed=0)
    strings = _w3_strings(2)
    seen = 0
    for trial in range(200):
        cfg = sample_hash_config(3, 2, (1, 2), 11, seed=5, trial=trial)
        res = hash_filter(strings, lab, cfg)
        assert res.all_equal
        assert all(h[0] in (1, 2) for h in res.hashes)
        seen += len(res.survivors)
    assert seen > 0


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(3, 7), (3, 13), (4, 13), (5, 17)]))
def test_hash_equal_for_any_tight_power(seed, kM):
    k, M = kM
    t = w_tensor(k)
    lab = find_labeling(t, seed=1)
    pts = t.support
    strings = [leg_strings(pts, s) for s in all_sequences(len(pts), 2)]
    B = average_free_set(k - 1, (M - 1) // (k - 1), "greedy").elements
    cfg = sample_hash_config(k, 2, B, M, seed)
    assert hash_filter(strings, lab, cfg).all_equal


def test_hash_empty_b():
    lab = find_labeling(w_tensor(3), seed=0)
    cfg = HashConfig(11, (), (1, 2), (3, 4), 3)
    assert hash_filter(_w3_strings(2), lab, cfg).survivors == []


def test_hash_config_errors():
    with pytest.raises(ValueError, match="not prime"):
        HashConfig(10, (1,), (1,), (1, 1), 3).validate()
    with pytest.raises(ValueError):
        HashConfig(11, (1, 6), (1,), (1, 1), 3).validate()
    with pytest.raises(ValueError):
        HashConfig(3, (1,), (1,), (1, 1, 1), 4).validate()


# -- collision elimination --------------------------------------------------


def test_unit_support_all_selected():
    pts = unit_tensor(4, 3).support
    d = greedy_diagonal(pts)
    assert d.size == 4 and d.Y == 0


def test_two_colliding_points():
    d = greedy_diagonal([(0, 1, 2), (0, 2, 1)])
    assert d.size == 1 and d.Y == 1


def test_order_must_be_permutation():
    with pytest.raises(ValueError):
        greedy_diagonal([(0,), (1,)], order=[0, 0])


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1), st.integers(1, 40), st.integers(2, 4), st.integers(2, 6))
def test_greedy_independent_and_large(seed, n, k, d):
    rng = np.random.default_rng(seed)
    pts = [tuple(int(x) for x in row) for row in rng.integers(0, d, (n, k))]
    pts = list(dict.fromkeys(pts))
    order = list(rng.permutation(len(pts)))
    res = greedy_diagonal(pts, order)
    assert is_diagonal(res.selected)
    assert res.size >= res.X - res.Y
    # restricting the legs to the selected coordinates leaves exactly the selection
    assert sorted(induced_support(pts, res.selected)) == sorted(res.selected)


def test_collision_pairs_brute():
    pts = [(0, 1), (0, 2), (1, 2), (3, 3)]
    brute = {(a, b) for a, b in itertools.combinations(range(4), 2)
             if any(x == y for x, y in zip(pts[a], pts[b]))}
    assert collision_pairs(pts) == brute


# -- the D_(1,1,1) squared listing ------------------------------------------


def test_listing_is_the_square_of_d111(algill_points):
    base = dicke_tensor((1, 1, 1)).support
    square = {tuple((x[i], y[i]) for i in range(3)) for x in base for y in base}
    assert len(algill_points) == 36 and set(algill_points) == square


def test_listed_pair_is_an_induced_diagonal(algill_points):
    assert all(p in algill_points for p in ALGILL_SELECTED)
    assert is_diagonal(ALGILL_SELECTED)
    assert sorted(induced_support(algill_points, ALGILL_SELECTED)) == sorted(ALGILL_SELECTED)


def test_listing_collision_graph_is_connected(algill_points):
    d = greedy_diagonal(algill_points)
    assert (d.X, d.Y, d.components) == (36, 162, 1)
    assert d.selected == [algill_points[0]]


# -- experiments ------------------------------------------------------------


@pytest.mark.parametrize("N", [3, 6])
def test_w3_experiment_valid(N):
    rep = run_cw_experiment(w_tensor(3), ExperimentConfig(N=N, trials=50, seed=1))
    assert all(r["valid"] and r["equal_hash"] for r in rep.per_trial)
    assert rep.best_rate >= 0
    assert rep.best_rate <= flattening_cap(w_tensor(3)) + 1e-12


def test_unit_experiment_rate_one():
    cfg = ExperimentConfig(N=4, trials=3, restrict_types=False, hash=False)
    rep = run_cw_experiment(unit_tensor(2, 3), cfg)
    assert rep.best_size == 16 and rep.best_rate == 1.0


def test_d22_experiment_deterministic():
    cfg = ExperimentConfig(N=2, trials=50, seed=9)
    a = run_cw_experiment(dicke_tensor((2, 2)), cfg).to_dict()
    b = run_cw_experiment(dicke_tensor((2, 2)), cfg).to_dict()
    assert a == b


@settings(max_examples=10)
@given(st.integers(0, 1000), st.sampled_from(["W3", "W4", "D22", "D111"]))
def test_experiment_rate_below_cap(seed, name):
    t = {"W3": w_tensor(3), "W4": w_tensor(4), "D22": dicke_tensor((2, 2)),
         "D111": dicke_tensor((1, 1, 1))}[name]
    rep = run_cw_experiment(t, ExperimentConfig(N=2, trials=5, seed=seed, restrict_types=False))
    assert rep.best_rate <= flattening_cap(t) + 1e-12
