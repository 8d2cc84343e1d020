"""The lattice ``Lip X`` of 1-Lipschitz functions ``X -> [0, inf]``.

Functions are dense value arrays over a :class:`MetricSpace`.  The cone
``Lambda(x, r)(y) = max(r - d(x, y), 0)`` is the minimal 1-Lipschitz function
with value ``r`` at ``x``; joins of cones give both the decomposition of a
Lipschitz function and the Lipschitz envelope of a coarse-Lipschitz one.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass
from typing import Iterable, Sequence

import numpy as np

from .metric import INF, TOL, MetricSpace, components, ext_absdiff, ext_dist


class NotLipschitz(ValueError):
    pass


class SpaceMismatch(ValueError):
    pass


def _as_values(space: MetricSpace, values) -> np.ndarray:
    v = np.array(values, dtype=float)
    if v.shape != (len(space),):
        raise ValueError(f"expected {len(space)} values, got shape {v.shape}")
    if np.isnan(v).any() or (v < 0).any():
        raise ValueError("values must lie in [0, inf]")
    return v


def lipschitz_excess(space: MetricSpace, values) -> float:
    """Largest ``f(x) - f(y) - d(x, y)``; ``inf`` if an infinite value leaks
    into finite distance of a finite one."""
    v = np.asarray(values, dtype=float)
    d = space.dist
    # f(x) > f(y) + d(x,y) is the only way to fail; it needs f(y), d finite
    leak = np.isinf(v)[:, None] & np.isfinite(v)[None, :] & np.isfinite(d)
    if leak.any():
        return INF
    mask = np.isfinite(v)[:, None] & np.isfinite(v)[None, :] & np.isfinite(d)
    if not mask.any():
        return 0.0
    with np.errstate(invalid="ignore"):
        excess = (v[:, None] - v[None, :] - np.where(mask, d, 0.0))[mask]
    return float(max(excess.max(), 0.0))


@dataclass(frozen=True, eq=False)
class LipFn:
    """A 1-Lipschitz function, one value in ``[0, inf]`` per point."""

    space: MetricSpace
    values: np.ndarray
    check: InitVar[bool] = True

    def __post_init__(self, check):
        v = _as_values(self.space, self.values)
        if check:
            excess = lipschitz_excess(self.space, v)
            if excess > TOL:
                raise NotLipschitz(f"not 1-Lipschitz: excess {excess}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __eq__(self, other):
        if not isinstance(other, LipFn):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return float(self.values[i])

    def __le__(self, other: LipFn) -> bool:
        _same_space(self, other)
        return bool(np.all(self.values <= other.values))


@dataclass(frozen=True)
class LambdaFn:
    center: int
    radius: float

    @property
    def finite(self) -> bool:
        return not math.isinf(self.radius)

    def realize(self, space: MetricSpace) -> LipFn:
        return lambda_realize(space, self.center, self.radius)


def _same_space(*fns: LipFn) -> MetricSpace:
    space = fns[0].space
    for f in fns[1:]:
        if f.space is not space and f.space != space:
            raise SpaceMismatch("functions live on different spaces")
    return space


def constant(space: MetricSpace, c: float) -> LipFn:
    return LipFn(space, np.full(len(space), float(c)), check=False)


def is_k_eps_lipschitz(space: MetricSpace, values, k: float, eps: float,
                       tol: float = 0.0) -> bool:
    """Whether ``|f(x) - f(y)| <= k d(x, y) + eps`` for all pairs.

    Pairs at infinite distance impose no constraint when ``k > 0``; with
    ``k = 0`` the product ``0 * inf`` is undefined and such spaces are rejected.
    """
    if k < 0 or eps < 0:
        raise ValueError("k and eps must be nonnegative")
    v = _as_values(space, values)
    d = space.dist
    if k == 0 and not np.isfinite(d).all():
        raise ValueError("k = 0 on a space with infinite distances needs 0 * inf")
    with np.errstate(invalid="ignore"):
        bound = k * d + eps if k > 0 else np.full_like(d, eps)
    return bool(np.all(ext_absdiff(v[:, None], v[None, :]) <= bound + tol))


def meet(space: MetricSpace, family: Iterable[LipFn]) -> LipFn:
    """Pointwise infimum; the empty meet is the constant ``inf``."""
    family = list(family)
    if not family:
        return constant(space, INF)
    _same_space(*family)
    if family[0].space != space:
        raise SpaceMismatch("family does not live on the given space")
    return LipFn(space, np.min([f.values for f in family], axis=0), check=False)


def join(space: MetricSpace, family: Iterable[LipFn]) -> LipFn:
    """Pointwise supremum; the empty join is the constant ``0``."""
    family = list(family)
    if not family:
        return constant(space, 0.0)
    _same_space(*family)
    if family[0].space != space:
        raise SpaceMismatch("family does not live on the given space")
    return LipFn(space, np.max([f.values for f in family], axis=0), check=False)


def sup_dist(f: LipFn, g: LipFn) -> float:
    _same_space(f, g)
    return float(ext_absdiff(f.values, g.values).max())


def sup_dist_values(a, b) -> float:
    return float(ext_absdiff(a, b).max())


def pairwise_sup_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``out[i, j] = sup_dist(a[i], b[j])`` for stacked value rows."""
    return ext_absdiff(a[:, None, :], b[None, :, :]).max(axis=2)


def cone_matrix(dist: np.ndarray, radii) -> np.ndarray:
    """``out[x, z] = Lambda(x, radii[x])(z)`` under extended-real rules."""
    r = np.asarray(radii, dtype=float)
    with np.errstate(invalid="ignore"):
        c = r[:, None] - dist
    # infinite distance always gives 0; this also clears inf - inf
    c = np.where(np.isinf(dist), 0.0, c)
    return np.maximum(c, 0.0)


def lambda_realize(space: MetricSpace, center: int, radius: float) -> LipFn:
    radius = float(radius)
    if radius < 0 or math.isnan(radius):
        raise ValueError(f"radius must lie in [0, inf], got {radius}")
    row = cone_matrix(space.dist[center][None, :], [radius])[0]
    return LipFn(space, row, check=False)


def lambda_dist_closed(space: MetricSpace, x: int, r: float, y: int, s: float) -> float:
    """Closed-form sup-distance between ``Lambda(x, r)`` and ``Lambda(y, s)``."""
    dxy = space.d(x, y)
    lo, hi = min(r, s), max(r, s)
    if dxy >= lo:
        return float(hi)
    if not math.isinf(lo):
        return ext_dist(r, s) + dxy
    return 0.0


def lambda_decompose(f: LipFn) -> list[LambdaFn]:
    return [LambdaFn(i, float(v)) for i, v in enumerate(f.values)]


def join_lambdas(space: MetricSpace, lambdas: Sequence[LambdaFn]) -> LipFn:
    if not lambdas:
        return constant(space, 0.0)
    centers = [p.center for p in lambdas]
    radii = [p.radius for p in lambdas]
    return LipFn(space, cone_matrix(space.dist[centers], radii).max(axis=0), check=False)


def lipschitzise(space: MetricSpace, values, eps: float | None = None) -> LipFn:
    """Envelope ``max_x Lambda(x, g(x))`` of a (1, eps)-Lipschitz ``g``.

    The result is 1-Lipschitz, dominates ``g`` and stays within ``eps`` of it.
    When ``eps`` is given the input is checked against it first.
    """
    g = _as_values(space, values)
    if eps is not None and not is_k_eps_lipschitz(space, g, 1.0, eps, tol=TOL):
        raise NotLipschitz(f"input is not (1, {eps})-Lipschitz")
    return LipFn(space, cone_matrix(space.dist, g).max(axis=0), check=False)


def _radius_candidates(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Breakpoints and pairwise crossings of ``s -> max_z |(s - a_z)^+ - b_z|``."""
    fin = np.isfinite(a)
    a, b = a[fin], b[fin]
    apex = a + b
    mids = (apex[:, None] + apex[None, :]) / 2.0
    cands = np.concatenate([[0.0], a, apex, mids.ravel()])
    return np.unique(cands[cands >= 0])


def nearest_lambda(g: LipFn) -> tuple[int, float, float]:
    """The cone closest to ``g`` in sup-distance: ``(center, radius, distance)``.

    Exact for finite spaces.  Ties go to the lowest center, then the smallest
    radius.
    """
    space = g.space
    v = g.values
    any_inf = bool(np.isinf(v).any())
    best = (INF, len(space), INF)
    for y in range(len(space)):
        if math.isinf(v[y]):
            radius = INF
            dist = sup_dist_values(cone_matrix(space.dist[y][None, :], [INF])[0], v)
        elif any_inf:
            # a finite cone misses an infinite value by inf whatever the radius
            radius, dist = 0.0, INF
        else:
            cands = _radius_candidates(space.dist[y], v)
            rows = cone_matrix(np.broadcast_to(space.dist[y], (len(cands), len(space))), cands)
            objective = ext_absdiff(rows, v[None, :]).max(axis=1)
            k = int(np.argmin(objective))
            radius, dist = float(cands[k]), float(objective[k])
        if (dist, y, radius) < best:
            best = (dist, y, radius)
    dist, y, radius = best
    return y, radius, dist


def is_finite_lambda(f: LipFn, tol: float = TOL) -> tuple[int, float] | None:
    """``(x, f(x))`` when ``f`` is within ``tol`` of the finite cone at its
    first argmax ``x``, else ``None``."""
    x = int(np.argmax(f.values))
    r = float(f.values[x])
    if math.isinf(r):
        return None
    if sup_dist(f, lambda_realize(f.space, x, r)) <= tol:
        return x, r
    return None


def lambda_irreducibility_witness(space: MetricSpace, p: LambdaFn, family: Sequence[LipFn],
                                  bound: float, delta: float) -> int | None:
    """First index ``j`` with ``sup_dist(p, family[j]) <= bound + delta``.

    Requires ``p`` finite and within ``bound`` of the join of ``family``; a
    finite cone cannot be approximated by a join unless one member already
    approximates it, so for ``delta > 0`` and a nonempty family a witness exists.
    """
    if not p.finite:
        raise ValueError("p must be a finite Lambda-function")
    pf = p.realize(space)
    gap = sup_dist(pf, join(space, family))
    if gap > bound + TOL:
        raise ValueError(f"precondition violated: distance to join is {gap} > {bound}")
    for j, f in enumerate(family):
        if sup_dist(pf, f) <= bound + delta + TOL:
            return j
    return None


def component_indicator(space: MetricSpace, block: int, base: LipFn | None = None) -> LipFn:
    """``base`` with its values on one component replaced by ``inf``."""
    part = components(space)
    v = np.zeros(len(space)) if base is None else base.values.copy()
    v[list(part.blocks[block])] = INF
    return LipFn(space, v, check=False)
