"""Scaling of spaces and of Lipschitz functions, and the grid experiment
showing the lifted defect shrinking with the rough distance to a fine grid."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lipschitz import LipFn, constant, lipschitzise, pairwise_sup_dist
from .metric import INF, TOL, MetricSpace, ext_absdiff, scale
from .mliso import LIFT_FACTOR, check_ml_defect, lift
from .rough import MapPair, defect
from .sampling import labels_for, rng_from, sample_functions


def lipschitzized_scaling(f: LipFn, factor: float) -> LipFn:
    """``join_x Lambda(x, factor * f(x))``; ``factor = 0`` gives the zero function."""
    if factor < 0 or math.isnan(factor):
        raise ValueError(f"factor must be >= 0, got {factor}")
    if factor == 0:
        return constant(f.space, 0.0)
    return lipschitzise(f.space, f.values * factor)


def rescale_function(f: LipFn, factor: float, target: MetricSpace | None = None) -> LipFn:
    """``factor * f`` viewed as a 1-Lipschitz function on ``scale(X, factor)``."""
    target = target if target is not None else scale(f.space, factor)
    return LipFn(target, f.values * factor)


# -- grid families -------------------------------------------------------------

FAMILIES = ("path", "two-path", "grid")


def _grid_coords(n: int, family: str) -> tuple[np.ndarray, np.ndarray]:
    """Integer lattice coordinates and component ids for resolution ``n``."""
    ticks = np.arange(n + 1)
    if family == "path":
        return ticks[:, None].astype(float), np.zeros(n + 1, dtype=int)
    if family == "two-path":
        coords = np.concatenate([ticks, ticks])[:, None].astype(float)
        return coords, np.repeat([0, 1], n + 1)
    if family == "grid":
        xx, yy = np.meshgrid(ticks, ticks, indexing="ij")
        return np.stack([xx.ravel(), yy.ravel()], axis=1).astype(float), np.zeros((n + 1) ** 2, int)
    raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")


def _l1(a: np.ndarray, b: np.ndarray, ca: np.ndarray, cb: np.ndarray) -> np.ndarray:
    d = np.abs(a[:, None, :] - b[None, :, :]).sum(axis=2)
    return np.where(ca[:, None] == cb[None, :], d, INF)


def family_space(family: str, n: int) -> tuple[MetricSpace, np.ndarray, np.ndarray]:
    """Level-``n`` space: the integer lattice scaled by ``1/n``, so its points
    sit at spacing ``1/n`` in the unit interval or square."""
    coords, comp = _grid_coords(n, family)
    lattice = MetricSpace(labels_for(len(coords)), _l1(coords, coords, comp, comp))
    return scale(lattice, 1.0 / n), coords / n, comp


def rounding_pair(level: tuple, reference: tuple) -> MapPair:
    """Nearest-point maps both ways between two grids (first index on ties)."""
    (_, ca, pa), (_, cb, pb) = level, reference
    cross = _l1(ca, cb, pa, pb)
    return MapPair(np.argmin(cross, axis=1), np.argmin(cross.T, axis=1))


@dataclass(frozen=True)
class ScalingExperiment:
    family: str = "path"
    levels: tuple[int, ...] = (2, 4, 8)
    reference: int = 16
    samples: int = 64
    seed: int = 0

    def __post_init__(self):
        levels = tuple(int(n) for n in self.levels)
        if not levels or any(n < 1 for n in levels):
            raise ValueError("levels must be positive resolutions")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("levels must be strictly increasing")
        if self.reference < levels[-1]:
            raise ValueError("reference must be at least the finest level")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        object.__setattr__(self, "levels", levels)


def _rescale_error(space: MetricSpace, n: int, samples: int, seed: int) -> float:
    """Largest ``|d(f/n, g/n) - d(f, g)/n|`` over sample pairs on the integer lattice."""
    lattice = scale(space, float(n))
    fs = sample_functions(rng_from(seed), lattice, min(samples, 16))
    A = np.array([f.values for f in fs])
    B = np.array([rescale_function(f, 1.0 / n, target=space).values for f in fs])
    return float(ext_absdiff(pairwise_sup_dist(B, B), pairwise_sup_dist(A, A) / n).max())


def run_scaling_experiment(exp: ScalingExperiment) -> dict:
    ref = family_space(exp.family, exp.reference)
    rows = []
    for n in exp.levels:
        level = family_space(exp.family, n)
        pair = rounding_pair(level, ref)
        eps = defect(pair, level[0], ref[0]).overall
        report = check_ml_defect(lift(pair, level[0], ref[0]), samples=exp.samples, seed=exp.seed)
        rows.append({
            "level": n,
            "points": len(level[0]),
            "epsilon": eps,
            "ml_defect": {"measured": report.worst, "bound": LIFT_FACTOR * eps,
                          "ok": bool(report.worst <= LIFT_FACTOR * eps + TOL)},
            "rescale_error": _rescale_error(level[0], n, exp.samples, exp.seed),
        })
    defects = [r["ml_defect"]["measured"] for r in rows]
    return {
        "family": exp.family,
        "reference": exp.reference,
        "reference_points": len(ref[0]),
        "seed": exp.seed,
        "samples": exp.samples,
        "levels": rows,
        "epsilon_decreasing": all(b["epsilon"] <= a["epsilon"] + TOL
                                  for a, b in zip(rows, rows[1:])),
        "defect_nonincreasing": all(b <= a + TOL for a, b in zip(defects, defects[1:])),
    }
