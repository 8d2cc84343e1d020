"""Extended reals and finite extended metric spaces.

Distances live in ``[0, inf]``.  Infinity is IEEE ``inf``; the one operation
where IEEE semantics disagree with the extended-real conventions is the
difference ``inf - inf``, so every difference goes through :func:`ext_dist`
or :func:`ext_absdiff`, which decide the infinite cases before subtracting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

INF = math.inf
TOL = 1e-9


def ext_dist(a: float, b: float) -> float:
    """Distance ``|a - b|`` on ``[0, inf]`` with ``|inf - inf| = 0``."""
    if a == b:
        return 0.0
    if math.isinf(a) or math.isinf(b):
        return INF
    return abs(a - b)


def ext_absdiff(a, b) -> np.ndarray:
    """Elementwise :func:`ext_dist` for broadcastable arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore"):
        diff = np.abs(a - b)
    return np.where(a == b, 0.0, diff)


def ext_mul(scalar: float, z):
    """``scalar * z`` with ``scalar * inf = inf``; requires ``scalar > 0``."""
    if not scalar > 0:
        raise ValueError(f"0 * inf is undefined; scalar must be positive, got {scalar}")
    return np.asarray(z, dtype=float) * scalar


def parse_ext(token) -> float:
    """Read a JSON number or the string ``"inf"``."""
    if isinstance(token, str):
        if token == "inf":
            return INF
        raise ValueError(f"expected a number or 'inf', got {token!r}")
    if isinstance(token, bool) or not isinstance(token, (int, float)):
        raise ValueError(f"expected a number or 'inf', got {token!r}")
    value = float(token)
    if math.isnan(value):
        raise ValueError("NaN is not an extended real")
    return value


def format_ext(value: float):
    """Inverse of :func:`parse_ext`: ``inf`` becomes the string ``"inf"``."""
    value = float(value)
    if math.isinf(value):
        return "inf"
    return value


class InvalidMetric(ValueError):
    """Raised when a matrix is not an extended metric; carries every violation."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        lines = "; ".join(str(v) for v in violations[:10])
        more = f" (+{len(violations) - 10} more)" if len(violations) > 10 else ""
        super().__init__(f"{len(violations)} metric violation(s): {lines}{more}")


@dataclass(frozen=True)
class Violation:
    kind: str
    indices: tuple[int, ...]
    detail: str = ""

    def __str__(self):
        return f"{self.kind} at {self.indices}" + (f": {self.detail}" if self.detail else "")


def metric_violations(labels: Sequence, matrix, tol: float = TOL) -> list[Violation]:
    """Every violated axiom, each with the witnessing indices."""
    labels = list(labels)
    try:
        d = np.array(matrix, dtype=float)
    except (TypeError, ValueError) as exc:
        return [Violation("non-numeric", (), str(exc))]
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        return [Violation("non-square", tuple(d.shape))]
    n = d.shape[0]
    out: list[Violation] = []
    if n == 0:
        return [Violation("empty", ())]
    if len(labels) != n:
        out.append(Violation("label-count", (len(labels), n)))
    if len(set(labels)) != len(labels):
        out.append(Violation("duplicate-label", ()))
    for i, j in zip(*np.nonzero(np.isnan(d))):
        out.append(Violation("nan", (int(i), int(j))))
    if out:
        return out
    for i, j in zip(*np.nonzero(d < 0)):
        out.append(Violation("negative", (int(i), int(j)), f"{d[i, j]}"))
    for i in range(n):
        if d[i, i] != 0:
            out.append(Violation("nonzero-diagonal", (i, i), f"{d[i, i]}"))
    off = ~np.eye(n, dtype=bool)
    for i, j in zip(*np.nonzero(off & (d == 0))):
        out.append(Violation("zero-off-diagonal", (int(i), int(j))))
    asym = ext_absdiff(d, d.T) > tol
    for i, j in zip(*np.nonzero(np.triu(asym))):
        out.append(Violation("asymmetry", (int(i), int(j)), f"{d[i, j]} vs {d[j, i]}"))
    # d[x, z] <= d[x, y] + d[y, z]; inf + anything stays inf, no NaN can arise
    for y in range(n):
        bad = d > d[:, y, None] + d[None, y, :] + tol
        for x, z in zip(*np.nonzero(np.triu(bad))):
            out.append(Violation(
                "triangle", (int(x), y, int(z)),
                f"d({x},{z})={d[x, z]} > {d[x, y]} + {d[y, z]}",
            ))
    return out


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """A validated finite extended metric space; use :func:`validate_metric`."""

    labels: tuple
    dist: np.ndarray

    def __post_init__(self):
        violations = metric_violations(self.labels, self.dist)
        if violations:
            raise InvalidMetric(violations)
        d = np.array(self.dist, dtype=float)
        d.setflags(write=False)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "dist", d)

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        if not isinstance(other, MetricSpace):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.dist, other.dist)

    def __hash__(self):
        return hash((self.labels, self.dist.tobytes()))

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown point {label!r}") from None

    def d(self, i: int, j: int) -> float:
        return float(self.dist[i, j])

    def max_finite_distance(self) -> float:
        finite = self.dist[np.isfinite(self.dist)]
        return float(finite.max())


def validate_metric(labels: Sequence, matrix) -> MetricSpace:
    """Build a :class:`MetricSpace`, raising :class:`InvalidMetric` listing all violations."""
    return MetricSpace(tuple(labels), np.array(matrix, dtype=float))


@dataclass(frozen=True)
class ComponentPartition:
    blocks: tuple[tuple[int, ...], ...]
    block_of: tuple[int, ...]

    def __len__(self):
        return len(self.blocks)


def components(space: MetricSpace) -> ComponentPartition:
    """Classes of the finite-distance relation, ordered by smallest member."""
    n = len(space)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in zip(*np.nonzero(np.isfinite(space.dist))):
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots: dict[int, list[int]] = {}
    for i in range(n):
        roots.setdefault(find(i), []).append(i)
    blocks = tuple(tuple(members) for _, members in sorted(roots.items()))
    block_of = [0] * n
    for b, members in enumerate(blocks):
        for i in members:
            block_of[i] = b
    return ComponentPartition(blocks, tuple(block_of))


def cutoff(space: MetricSpace, r: float) -> MetricSpace:
    """The cut-off metric ``min(r, d)``."""
    if not r > 0:
        raise ValueError(f"cut-off radius must be positive, got {r}")
    return MetricSpace(space.labels, np.minimum(space.dist, r))


def scale(space: MetricSpace, factor: float) -> MetricSpace:
    """Multiply every distance by ``factor > 0`` (``factor * inf = inf``)."""
    if not (factor > 0 and math.isfinite(factor)):
        raise ValueError(f"scale factor must be positive and finite, got {factor}")
    return MetricSpace(space.labels, ext_mul(factor, space.dist))


def isometric_as_matrices(a: MetricSpace, b: MetricSpace, tol: float = 0.0) -> bool:
    """True when the labelled distance matrices agree entrywise."""
    if a.dist.shape != b.dist.shape:
        return False
    return bool(np.all(ext_absdiff(a.dist, b.dist) <= tol))
