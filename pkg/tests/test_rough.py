import itertools

import numpy as np
import pytest

from coarselip.metric import scale, validate_metric
from coarselip.rough import (BudgetExceeded, MapPair, defect, embedding_defect, nearness,
                             rough_distance_exact, worker_count)
from coarselip.sampling import disjoint_union, line_space, random_instance, random_space, rng_from

import oracles


def test_nearness_examples():
    line = line_space([0, 1, 3])
    assert nearness([0, 1, 2], [0, 1, 2], line) == 0
    assert nearness([0, 1, 2], [1, 0, 2], line) == 1
    two = disjoint_union(line_space([0]), line_space([0]))
    assert nearness([0], [1], two) == float("inf")
    with pytest.raises(ValueError):
        nearness([0, 1], [0], line)


def test_defect_examples():
    X, Y = line_space([0, 2]), line_space([0, 1, 2])
    assert defect(MapPair([0, 1], [0, 1]), X, X).overall == 0
    d = defect(MapPair([0, 2], [0, 0, 1]), X, Y)
    assert d.overall == 1
    assert (d.embed_fwd, d.embed_bwd, d.near_fwd, d.near_bwd) == (0, 1, 0, 1)
    big = line_space([0, 1, 4])
    collapse = defect(MapPair([0, 0, 0], [0]), big, line_space([0]))
    assert collapse.embed_fwd == 4


def test_defect_matches_oracle():
    for seed in range(80):
        X, Y, pair = random_instance(rng_from(seed))
        assert defect(pair, X, Y).overall == oracles.defect(
            pair.forward, pair.backward, oracles.matrix(X), oracles.matrix(Y))


def test_surjectivity_is_reported():
    X, Y = line_space([0, 2]), line_space([0, 1, 2])
    d = defect(MapPair([0, 2], [0, 0, 1]), X, Y)
    assert d.surj_fwd == 1 and d.surj_bwd == 0


def test_map_pair_validates_ranges():
    X, Y = line_space([0, 2]), line_space([0, 1, 2])
    with pytest.raises(ValueError):
        MapPair([0, 3], [0, 0, 1]).check(X, Y)
    with pytest.raises(ValueError):
        MapPair([0], [0, 0, 1]).check(X, Y)


def test_identity_defect_zero_iff_equal_matrices():
    X = line_space([0, 1, 3])
    ident = MapPair(range(3), range(3))
    assert defect(ident, X, X).overall == 0
    assert defect(ident, X, line_space([0, 1, 2])).overall > 0


def test_rough_distance_examples():
    X = line_space([0, 1, 3])
    res = rough_distance_exact(X, X)
    assert res.epsilon == 0
    assert res.witness == MapPair((0, 1, 2), (0, 1, 2))
    A, B = line_space([0, 2]), line_space([0, 1, 2])
    res = rough_distance_exact(A, B)
    assert res.epsilon == 1
    assert defect(res.witness, A, B).overall == 1
    assert rough_distance_exact(line_space([0]), line_space([0, 2])).epsilon == 2


def test_rough_distance_infinite_when_components_cannot_match():
    one = line_space([0, 1])
    two = disjoint_union(line_space([0]), line_space([0]))
    assert rough_distance_exact(one, two).epsilon == float("inf")


def test_rough_distance_matches_exhaustive_oracle():
    for seed in range(40):
        rng = rng_from(seed)
        nx, ny = (int(k) for k in rng.integers(1, 5, 2))
        X = random_space(rng, nx, 1 if seed % 3 else min(nx, 2))
        Y = random_space(rng, ny, 1 if seed % 3 else min(ny, 2))
        res = rough_distance_exact(X, Y)
        assert res.epsilon == oracles.rough_distance(oracles.matrix(X), oracles.matrix(Y))
        assert defect(res.witness, X, Y).overall == res.epsilon


def test_witness_is_lexicographically_first_and_schedule_independent():
    for seed in range(15):
        rng = rng_from(seed)
        X, Y = random_space(rng, 3), random_space(rng, 4)
        single = rough_distance_exact(X, Y, workers=1)
        many = rough_distance_exact(X, Y, workers=4)
        assert single == many
        dX, dY = oracles.matrix(X), oracles.matrix(Y)
        first = next((f, b) for f in itertools.product(range(4), repeat=3)
                     for b in itertools.product(range(3), repeat=4)
                     if oracles.defect(f, b, dX, dY) == single.epsilon)
        assert (single.witness.forward, single.witness.backward) == first


def test_rough_distance_scales_linearly():
    for seed in range(10):
        rng = rng_from(seed)
        X, Y = random_space(rng, 3), random_space(rng, 4)
        base = rough_distance_exact(X, Y).epsilon
        assert rough_distance_exact(scale(X, 4.0), scale(Y, 4.0)).epsilon == 4 * base


def test_budget_guard():
    X = line_space(range(6))
    with pytest.raises(BudgetExceeded) as info:
        rough_distance_exact(X, X, budget=5)
    assert info.value.required == 6 ** 12 and info.value.allowed == 5 ** 10
    assert rough_distance_exact(line_space([0, 1]), line_space([0, 1]), budget=2).epsilon == 0


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("COARSE_LIP_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("COARSE_LIP_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("COARSE_LIP_THREADS", "x")
    with pytest.raises(ValueError):
        worker_count()


def test_embedding_defect_with_infinite_distances():
    two = validate_metric("ab", [[0, float("inf")], [float("inf"), 0]])
    assert embedding_defect([0, 1], two, two) == 0
    assert embedding_defect([0, 0], two, two) == float("inf")
    assert np.isinf(defect(MapPair([0, 0], [0, 0]), two, two).overall)
