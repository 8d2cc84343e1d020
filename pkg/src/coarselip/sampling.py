"""Seeded generators for spaces, Lipschitz functions and rough isometries.

Random data is drawn on dyadic grids so that sums and differences of
distances and values are exact in double precision; equalities claimed to
hold exactly can then be tested with ``==``.
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .lipschitz import LambdaFn, LipFn, constant, lambda_realize, lipschitzise
from .metric import INF, MetricSpace, components
from .rough import MapPair


def rng_from(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def labels_for(n: int, prefix: str = "p") -> tuple[str, ...]:
    return tuple(f"{prefix}{i}" for i in range(n))


def shortest_paths(weights: np.ndarray) -> np.ndarray:
    d = np.array(weights, dtype=float)
    np.fill_diagonal(d, 0.0)
    for k in range(len(d)):
        d = np.minimum(d, d[:, k, None] + d[None, k, :])
    return d


def line_space(coords: Sequence[float], labels=None) -> MetricSpace:
    x = np.asarray(coords, dtype=float)
    labels = labels_for(len(x)) if labels is None else labels
    return MetricSpace(tuple(labels), np.abs(x[:, None] - x[None, :]))


def path_space(n: int, spacing: float = 1.0) -> MetricSpace:
    """``n`` points on a line at unit steps times ``spacing``."""
    return line_space(np.arange(n) * spacing)


def disjoint_union(a: MetricSpace, b: MetricSpace) -> MetricSpace:
    n, m = len(a), len(b)
    d = np.full((n + m, n + m), INF)
    d[:n, :n] = a.dist
    d[n:, n:] = b.dist
    labels = tuple(f"a.{x}" for x in a.labels) + tuple(f"b.{x}" for x in b.labels)
    return MetricSpace(labels, d)


def random_space(rng: np.random.Generator, n: int, n_components: int = 1,
                 denom: int = 8, max_weight: int = 8, extra_edges: float = 0.3) -> MetricSpace:
    """Shortest-path metric of a random weighted graph; weights are multiples
    of ``1/denom``.  Components get ``inf`` between them."""
    if not 1 <= n_components <= n:
        raise ValueError("need 1 <= n_components <= n")
    block = np.concatenate([np.arange(n_components),
                            rng.integers(0, n_components, n - n_components)])
    rng.shuffle(block)
    w = np.full((n, n), INF)
    for c in range(n_components):
        members = np.flatnonzero(block == c)
        order = rng.permutation(members)
        for k in range(1, len(order)):
            i, j = order[k], order[rng.integers(0, k)]
            w[i, j] = w[j, i] = rng.integers(1, max_weight + 1) / denom
        for i, j in itertools.combinations(members, 2):
            if rng.random() < extra_edges:
                w[i, j] = w[j, i] = min(w[i, j], rng.integers(1, max_weight + 1) / denom)
    return MetricSpace(labels_for(n), shortest_paths(w))


def perturbed_copy(rng: np.random.Generator, space: MetricSpace, delta: float,
                   denom: int = 1024) -> MetricSpace:
    """A metric within ``delta`` of ``space`` entrywise: add symmetric dyadic
    noise in ``[0, delta]`` and take the shortest-path closure."""
    n = len(space)
    steps = int(np.floor(delta * denom))
    noise = rng.integers(0, steps + 1, (n, n)) / denom
    noise = np.triu(noise, 1)
    noise = noise + noise.T
    return MetricSpace(space.labels, shortest_paths(space.dist + noise))


def random_lipfn(rng: np.random.Generator, space: MetricSpace, inf_prob: float = 0.0,
                 denom: int = 16, height: float | None = None) -> LipFn:
    """Lipschitz envelope of dyadic noise, optionally ``inf`` on whole components."""
    finite = space.dist[np.isfinite(space.dist)]
    top = height if height is not None else max(1.0, float(finite.max()) * 1.25)
    raw = rng.integers(0, int(top * denom) + 1, len(space)) / denom
    if inf_prob > 0:
        for block in components(space).blocks:
            if rng.random() < inf_prob:
                raw[list(block)] = INF
    return lipschitzise(space, raw)


def random_lambda(rng: np.random.Generator, space: MetricSpace, inf_prob: float = 0.0,
                  denom: int = 16) -> LambdaFn:
    top = max(1.0, space.max_finite_distance() * 1.25)
    if rng.random() < inf_prob:
        return LambdaFn(int(rng.integers(len(space))), INF)
    return LambdaFn(int(rng.integers(len(space))), rng.integers(0, int(top * denom) + 1) / denom)


def sample_functions(rng: np.random.Generator, space: MetricSpace, count: int) -> list[LipFn]:
    """Constants, component-wise infinite functions, cones, then random ones."""
    top = max(1.0, space.max_finite_distance())
    out = [constant(space, 0.0), constant(space, INF), constant(space, top / 2)]
    part = components(space)
    for b in range(len(part)):
        base = random_lipfn(rng, space)
        v = base.values.copy()
        v[list(part.blocks[b])] = INF
        out.append(LipFn(space, v, check=False))
    for y in range(len(space)):
        out.append(lambda_realize(space, y, rng.integers(0, int(top * 16) + 1) / 16))
    while len(out) < count:
        out.append(random_lipfn(rng, space, inf_prob=0.15))
    return out[:count]


def random_map(rng: np.random.Generator, X: MetricSpace, Y: MetricSpace,
               block_map: dict[int, int] | None = None) -> tuple[int, ...]:
    """A random point map; with ``block_map`` each component of ``X`` lands in
    the assigned component of ``Y``."""
    if block_map is None:
        return tuple(int(i) for i in rng.integers(0, len(Y), len(X)))
    px, py = components(X), components(Y)
    return tuple(int(rng.choice(py.blocks[block_map[px.block_of[x]]])) for x in range(len(X)))


def nearest_map(X: MetricSpace, Y: MetricSpace, cross: np.ndarray) -> tuple[int, ...]:
    """Send each point of ``X`` to its nearest point of ``Y`` given the
    ``|X| x |Y|`` matrix of distances between them (first index on ties)."""
    return tuple(int(j) for j in np.argmin(cross, axis=1))


def random_instance(rng: np.random.Generator, max_points: int = 8,
                    kind: str | None = None) -> tuple[MetricSpace, MetricSpace, MapPair]:
    """A pair of spaces with a finite-defect map pair between them.

    Kinds: ``perturbed`` (near-isometric copy, small defect), ``refined``
    (extra points close to existing ones), ``random`` (component-respecting
    random maps, usually large defect).
    """
    kind = kind or str(rng.choice(["perturbed", "refined", "random"]))
    n = int(rng.integers(2, max_points + 1))
    k = int(rng.integers(1, min(n, 3) + 1)) if rng.random() < 0.3 else 1
    if kind == "perturbed":
        X = random_space(rng, n, k)
        delta = float(rng.choice([1 / 256, 1 / 64, 1 / 16]))
        Y = perturbed_copy(rng, X, delta)
        ident = tuple(range(n))
        return X, Y, MapPair(ident, ident)
    if kind == "refined":
        m = int(rng.integers(0, max_points - n + 1))
        X = random_space(rng, n, k)
        if m == 0:
            ident = tuple(range(n))
            return X, X, MapPair(ident, ident)
        parents = rng.integers(0, n, m)
        hop = rng.integers(1, 5, m) / 64
        w = np.full((n + m, n + m), INF)
        w[:n, :n] = X.dist
        for t, (p, h) in enumerate(zip(parents, hop)):
            w[n + t, p] = w[p, n + t] = h
        Y = MetricSpace(labels_for(n + m), shortest_paths(w))
        forward = tuple(range(n))
        backward = tuple(range(n)) + tuple(int(p) for p in parents)
        return X, Y, MapPair(forward, backward)
    X = random_space(rng, n, k)
    Y = random_space(rng, int(rng.integers(k, max_points + 1)), k)
    perm = rng.permutation(k)
    fwd = {b: int(perm[b]) for b in range(k)}
    bwd = {int(perm[b]): b for b in range(k)}
    return X, Y, MapPair(random_map(rng, X, Y, fwd), random_map(rng, Y, X, bwd))


def isometries(space: MetricSpace) -> list[tuple[int, ...]]:
    """All distance-preserving permutations (brute force; small spaces only)."""
    n = len(space)
    d = space.dist
    out = []
    for perm in itertools.permutations(range(n)):
        p = np.array(perm)
        if np.array_equal(d[np.ix_(p, p)], d):
            out.append(perm)
    return out


def inverse_permutation(perm: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for i, j in enumerate(perm):
        inv[j] = i
    return tuple(inv)


def symmetric_space(rng: np.random.Generator, max_points: int = 6,
                    tries: int = 200) -> tuple[MetricSpace, list[tuple[int, ...]]]:
    """A random graph metric whose isometry group is nontrivial, with the
    group itself."""
    for _ in range(tries):
        n = int(rng.integers(3, max_points + 1))
        X = random_space(rng, n, 1 if rng.random() < 0.8 else 2, denom=1, max_weight=2,
                         extra_edges=0.4)
        group = isometries(X)
        if len(group) > 1:
            return X, group
    raise RuntimeError("no space with a nontrivial isometry found")
