"""Rough isometries between finite extended metric spaces.

A rough isometry is a pair of point maps ``forward: X -> Y`` and
``backward: Y -> X``; its defect is the largest additive distortion of
either map together with how far the two compositions move points.
"""

from __future__ import annotations

import itertools
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .metric import INF, MetricSpace, ext_absdiff


@dataclass(frozen=True)
class MapPair:
    forward: tuple[int, ...]
    backward: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "forward", tuple(int(i) for i in self.forward))
        object.__setattr__(self, "backward", tuple(int(i) for i in self.backward))

    def swapped(self) -> MapPair:
        return MapPair(self.backward, self.forward)

    def check(self, X: MetricSpace, Y: MetricSpace) -> None:
        if len(self.forward) != len(X) or len(self.backward) != len(Y):
            raise ValueError(f"map sizes {len(self.forward)}/{len(self.backward)} "
                             f"do not match spaces {len(X)}/{len(Y)}")
        if any(not 0 <= i < len(Y) for i in self.forward):
            raise ValueError("forward map leaves Y")
        if any(not 0 <= i < len(X) for i in self.backward):
            raise ValueError("backward map leaves X")


@dataclass(frozen=True)
class IsometryDefect:
    embed_fwd: float
    embed_bwd: float
    near_fwd: float
    near_bwd: float
    surj_fwd: float = 0.0
    surj_bwd: float = 0.0

    @property
    def overall(self) -> float:
        return max(self.embed_fwd, self.embed_bwd, self.near_fwd, self.near_bwd)

    def is_isometry(self, eps: float) -> bool:
        return self.overall <= eps


def nearness(alpha: Sequence[int], beta: Sequence[int], target: MetricSpace) -> float:
    """``max_x d(alpha x, beta x)``."""
    if len(alpha) != len(beta):
        raise ValueError("maps have different domains")
    if not len(alpha):
        return 0.0
    return float(target.dist[list(alpha), list(beta)].max())


def embedding_defect(f: Sequence[int], X: MetricSpace, Y: MetricSpace) -> float:
    idx = np.asarray(f)
    return float(ext_absdiff(X.dist, Y.dist[np.ix_(idx, idx)]).max())


def surjectivity_gap(f: Sequence[int], Y: MetricSpace) -> float:
    """Smallest ``eps`` for which ``f`` is eps-surjective onto ``Y``."""
    return float(Y.dist[list(f)].min(axis=0).max())


def defect(pair: MapPair, X: MetricSpace, Y: MetricSpace) -> IsometryDefect:
    pair.check(X, Y)
    fwd, bwd = pair.forward, pair.backward
    back_then_fwd = [bwd[fwd[x]] for x in range(len(X))]
    fwd_then_back = [fwd[bwd[y]] for y in range(len(Y))]
    return IsometryDefect(
        embed_fwd=embedding_defect(fwd, X, Y),
        embed_bwd=embedding_defect(bwd, Y, X),
        near_fwd=nearness(back_then_fwd, range(len(X)), X),
        near_bwd=nearness(fwd_then_back, range(len(Y)), Y),
        surj_fwd=surjectivity_gap(fwd, Y),
        surj_bwd=surjectivity_gap(bwd, X),
    )


class BudgetExceeded(ValueError):
    def __init__(self, required: int, allowed: int):
        self.required, self.allowed = required, allowed
        super().__init__(f"exhaustive search needs {required} map pairs, budget allows {allowed}")


@dataclass(frozen=True)
class RoughDistance:
    epsilon: float
    witness: MapPair


def worker_count() -> int:
    """Worker cap from ``COARSE_LIP_THREADS`` (unset or 0 means one per CPU)."""
    raw = os.environ.get("COARSE_LIP_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"COARSE_LIP_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("COARSE_LIP_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


class _SharedBound:
    """Best overall defect seen by any worker; only ever decreases."""

    def __init__(self):
        self._value = INF
        self._lock = threading.Lock()

    @property
    def value(self) -> float:
        return self._value

    def offer(self, v: float) -> None:
        with self._lock:
            if v < self._value:
                self._value = v


def _search_block(first: int, X: MetricSpace, Y: MetricSpace, backs: np.ndarray,
                  back_embed: np.ndarray, shared: _SharedBound):
    nx, ny = len(X), len(Y)
    dX, dY = X.dist, Y.dist
    ys = np.arange(ny)
    xs = np.arange(nx)
    best = (INF, None, None)
    fwd = [first] + [0] * (nx - 1)

    def leaf():
        e = np.array(fwd)
        near_bwd = dY[e[backs], ys].max(axis=1)
        near_fwd = dX[backs[:, e], xs].max(axis=1)
        total = np.maximum(np.maximum(back_embed, near_bwd), near_fwd)
        k = int(np.argmin(total))
        return float(total[k]), k

    def descend(depth: int, partial: float):
        nonlocal best
        if partial >= best[0] or partial > shared.value:
            return
        if depth == nx:
            total, k = leaf()
            total = max(total, partial)
            if total < best[0]:
                best = (total, tuple(fwd), tuple(int(i) for i in backs[k]))
                shared.offer(total)
            return
        for y in range(ny):
            fwd[depth] = y
            prev = np.array(fwd[:depth])
            step = ext_absdiff(dX[depth, :depth], dY[y, prev]).max() if depth else 0.0
            descend(depth + 1, max(partial, float(step)))

    descend(1, 0.0)
    return best


def rough_distance_exact(X: MetricSpace, Y: MetricSpace, budget: int = 5,
                         workers: int | None = None) -> RoughDistance:
    """Exact minimum defect over all map pairs, with a witness.

    The forward maps are enumerated lexicographically with branch-and-bound on
    their distortion; for each surviving forward map all backward maps are
    scored at once.  The witness is the lexicographically first minimiser.
    ``budget`` caps the search at ``budget**(2*budget)`` map pairs, the count
    for two spaces of ``budget`` points.
    """
    nx, ny = len(X), len(Y)
    required = ny ** nx * nx ** ny
    allowed = budget ** (2 * budget)
    if required > allowed:
        raise BudgetExceeded(required, allowed)
    backs = np.array(list(itertools.product(range(nx), repeat=ny)), dtype=int).reshape(-1, ny)
    back_embed = ext_absdiff(Y.dist[None, :, :],
                             X.dist[backs[:, :, None], backs[:, None, :]]).max(axis=(1, 2))
    shared = _SharedBound()
    n_workers = min(workers or worker_count(), ny)
    if n_workers > 1:
        with ThreadPoolExecutor(n_workers) as pool:
            results = list(pool.map(
                lambda y: _search_block(y, X, Y, backs, back_embed, shared), range(ny)))
    else:
        results = [_search_block(y, X, Y, backs, back_embed, shared) for y in range(ny)]
    eps, fwd, bwd = min(results, key=lambda r: r[0])
    if fwd is None:
        # every pair has infinite defect; report the first one
        fwd, bwd = (0,) * nx, (0,) * ny
    return RoughDistance(eps, MapPair(fwd, bwd))
