"""Rough isometries of Lipschitz spaces that respect meets and joins.

An oracle is a pair of black-box maps ``kappa: Lip Y -> Lip X`` and
``kappa_prime: Lip X -> Lip Y`` with a declared defect ``epsilon``.  Lifting
turns a rough isometry of the underlying spaces into such an oracle, and
:func:`reconstruct` goes back by probing the oracle with cones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .lipschitz import (LambdaFn, LipFn, SpaceMismatch, constant, join, join_lambdas,
                        lambda_decompose, lambda_realize, lipschitzise, meet, nearest_lambda,
                        pairwise_sup_dist, sup_dist)
from .metric import INF, TOL, MetricSpace, ext_absdiff
from .rough import MapPair, defect
from .sampling import rng_from, sample_functions

# reconstruction constants, in units of the declared epsilon
LIFT_FACTOR = 4
PROBE_RADIUS = 22
LAMBDA_RESIDUAL = 6
PROBE_BOUND = 59
PROBE_BOUND_LARGE = 43
LARGE_RADIUS = 38
PROBE_BOUND_INF = 44
RECONSTRUCTED_DEFECT = 88
NEARNESS_BOUND = 62
NEARNESS_BOUND_TIGHT = 61


class NotMlIsomorphism(ValueError):
    """A probe of the oracle did not land near a finite cone."""


class WitnessError(ValueError):
    pass


@dataclass(frozen=True)
class MlOracle:
    X: MetricSpace
    Y: MetricSpace
    kappa: Callable[[LipFn], LipFn]
    kappa_prime: Callable[[LipFn], LipFn]
    epsilon: float
    descriptor: dict | None = field(default=None, compare=False)
    meta: dict = field(default_factory=dict, compare=False)


def _on(space: MetricSpace, fn: Callable[[LipFn], LipFn]) -> Callable[[LipFn], LipFn]:
    def wrapped(f: LipFn) -> LipFn:
        if f.space is not space and f.space != space:
            raise SpaceMismatch("oracle called on a function over the wrong space")
        return fn(f)
    return wrapped


def pullback(pair_map, space: MetricSpace) -> Callable[[LipFn], LipFn]:
    """``f -> envelope(f o map)``, a function on ``space``."""
    idx = np.asarray(pair_map, dtype=int)
    return lambda f: lipschitzise(space, f.values[idx])


def lift(pair: MapPair, X: MetricSpace, Y: MetricSpace) -> MlOracle:
    """The oracle ``kappa f = envelope(f o forward)``, declared ``4 * defect``."""
    d = defect(pair, X, Y).overall
    if math.isinf(d):
        raise ValueError("cannot lift a map pair with infinite defect")
    return MlOracle(
        X, Y,
        kappa=_on(Y, pullback(pair.forward, X)),
        kappa_prime=_on(X, pullback(pair.backward, Y)),
        epsilon=LIFT_FACTOR * d,
        descriptor={"kind": "lifted", "pair": pair},
        meta={"pair_defect": d},
    )


def perturbed_lift(pair: MapPair, X: MetricSpace, Y: MetricSpace, delta: float,
                   noise_x=None, noise_y=None, seed: int = 0) -> MlOracle:
    """Lift with a fixed bump of height up to ``delta`` added before the envelope.

    ``kappa f`` stays within ``defect + delta`` of ``f o forward``, so the
    pair is a ``4 * defect + 2 * delta`` ml-isomorphism.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    d = defect(pair, X, Y).overall
    if math.isinf(d):
        raise ValueError("cannot lift a map pair with infinite defect")
    rng = rng_from(seed)
    ux = np.asarray(noise_x if noise_x is not None else rng.random(len(X)), dtype=float)
    uy = np.asarray(noise_y if noise_y is not None else rng.random(len(Y)), dtype=float)
    if ux.shape != (len(X),) or uy.shape != (len(Y),) or (ux < 0).any() or (uy < 0).any() \
            or (ux > 1).any() or (uy > 1).any():
        raise ValueError("noise vectors must have one entry in [0, 1] per point")
    fwd, bwd = np.asarray(pair.forward), np.asarray(pair.backward)
    return MlOracle(
        X, Y,
        kappa=_on(Y, lambda f: lipschitzise(X, f.values[fwd] + delta * ux)),
        kappa_prime=_on(X, lambda g: lipschitzise(Y, g.values[bwd] + delta * uy)),
        epsilon=2 * d + 2 * (d + delta),
        descriptor={"kind": "perturbed-lifted", "pair": pair, "delta": delta,
                    "noise_x": [float(u) for u in ux], "noise_y": [float(u) for u in uy]},
        meta={"pair_defect": d, "nearness": d + delta},
    )


def identity_oracle(X: MetricSpace) -> MlOracle:
    ident = MapPair(range(len(X)), range(len(X)))
    return lift(ident, X, X)


def promote_surjective_homomorphism(kappa: Callable[[LipFn], LipFn], X: MetricSpace,
                                    Y: MetricSpace, epsilon: float, delta: float,
                                    chooser: Callable[[LipFn], LipFn]) -> MlOracle:
    """Complete a delta-surjective epsilon-ml-homomorphism to an oracle.

    ``chooser(f)`` must return some ``g`` with ``sup_dist(kappa g, f) <= delta``;
    that ``g`` becomes ``kappa_prime f``.  The declared bound is
    ``2 epsilon + 3 delta``; ``meta`` also records ``2 epsilon + 2 delta``.
    """
    def kappa_prime(f: LipFn) -> LipFn:
        g = chooser(f)
        if g is None:
            raise WitnessError("chooser returned no preimage")
        miss = sup_dist(kappa(g), f)
        if miss > delta + TOL:
            raise WitnessError(f"chosen preimage misses by {miss} > delta = {delta}")
        return g

    return MlOracle(
        X, Y, kappa=_on(Y, kappa), kappa_prime=_on(X, kappa_prime),
        epsilon=2 * epsilon + 3 * delta,
        meta={"homomorphism_epsilon": epsilon, "delta": delta,
              "bound_stated": 2 * epsilon + 2 * delta, "bound_proof": 2 * epsilon + 3 * delta},
    )


# -- defect measurement ------------------------------------------------------

@dataclass
class Measure:
    value: float = 0.0
    witness: dict | None = None

    def offer(self, value: float, witness: dict) -> None:
        if value > self.value or self.witness is None and value >= self.value:
            self.value = float(value)
            self.witness = witness


@dataclass
class MlDefectReport:
    epsilon: float
    iso_embed: Measure = field(default_factory=Measure)
    join_defect: Measure = field(default_factory=Measure)
    meet_defect: Measure = field(default_factory=Measure)
    roundtrip: Measure = field(default_factory=Measure)
    zero_defect: Measure = field(default_factory=Measure)
    monotonicity: Measure = field(default_factory=Measure)
    binary_join_defect: Measure = field(default_factory=Measure)
    samples: int = 0
    seed: int = 0

    AXIOMS = ("iso_embed", "join_defect", "meet_defect", "roundtrip", "zero_defect")
    EXTRAS = ("monotonicity", "binary_join_defect")

    @property
    def worst(self) -> float:
        return max(getattr(self, name).value for name in self.AXIOMS)

    def ok(self, tol: float = TOL) -> bool:
        return self.worst <= self.epsilon + tol


def _pos_excess(a: np.ndarray, b: np.ndarray) -> float:
    """``max (a - b)^+`` where ``inf - inf`` counts as 0."""
    with np.errstate(invalid="ignore"):
        diff = np.where(np.isinf(b), 0.0, a - b)
    return float(max(np.max(diff), 0.0))


def _measure_direction(report: MlDefectReport, name: str, fn, back, dom: MetricSpace,
                       samples: list[LipFn], rng: np.random.Generator,
                       family_sizes: tuple[int, ...], families_per_size: int) -> None:
    images = [fn(f) for f in samples]
    A = np.array([f.values for f in samples])
    B = np.array([g.values for g in images])

    gap = ext_absdiff(pairwise_sup_dist(A, A), pairwise_sup_dist(B, B))
    i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
    report.iso_embed.offer(gap[i, j], {"direction": name, "inputs": [int(i), int(j)]})

    zero, top = constant(dom, 0.0), constant(dom, INF)
    image_zero = fn(zero)
    report.zero_defect.offer(sup_dist(image_zero, constant(image_zero.space, 0.0)),
                             {"direction": name})
    cod = image_zero.space
    report.join_defect.offer(sup_dist(join(cod, []), image_zero),
                             {"direction": name, "family": "empty", "inputs": []})
    report.meet_defect.offer(sup_dist(meet(cod, []), fn(top)),
                             {"direction": name, "family": "empty", "inputs": []})

    def family_check(members, member_images, witness):
        report.join_defect.offer(
            sup_dist(join(cod, member_images), fn(join(dom, members))), witness)
        report.meet_defect.offer(
            sup_dist(meet(cod, member_images), fn(meet(dom, members))), witness)

    n = len(samples)
    for size in family_sizes:
        if size == 0:
            continue
        for _ in range(families_per_size):
            idx = rng.choice(n, size=size, replace=size > n)
            family_check([samples[k] for k in idx], [images[k] for k in idx],
                         {"direction": name, "family": "random", "inputs": [int(k) for k in idx]})
    # cone decompositions of a few samples
    for k in rng.choice(n, size=min(n, families_per_size), replace=False):
        cones = [p.realize(dom) for p in lambda_decompose(samples[k])]
        family_check(cones, [fn(c) for c in cones],
                     {"direction": name, "family": "lambda-decomposition", "inputs": [int(k)]})

    # ordered pairs f <= g built as (a meet b, a join b)
    for _ in range(n):
        a, b = rng.choice(n, size=2)
        lo, hi = meet(dom, [samples[a], samples[b]]), join(dom, [samples[a], samples[b]])
        k_lo, k_hi = fn(lo), fn(hi)
        w = {"direction": name, "family": "ordered-pair", "inputs": [int(a), int(b)]}
        report.monotonicity.offer(_pos_excess(k_lo.values, k_hi.values), w)
        binary = sup_dist(join(cod, [k_lo, k_hi]), fn(join(dom, [lo, hi])))
        report.binary_join_defect.offer(binary, w)
        report.join_defect.offer(binary, w)

    trips = [sup_dist(back(g), f) for f, g in zip(samples, images)]
    k = int(np.argmax(trips))
    report.roundtrip.offer(trips[k], {"direction": name, "inputs": [k]})


def check_ml_defect(oracle: MlOracle, samples: int = 64, seed: int = 0,
                    family_sizes: tuple[int, ...] | None = None,
                    families_per_size: int = 6) -> MlDefectReport:
    """Measure every ml-isomorphism axiom on seeded samples from both sides.

    Families have sizes ``{0, 1, 2, 5, n}`` with ``n`` the domain size; size 0
    compares ``kappa(0)`` with 0 and ``kappa(inf)`` with ``inf``.  Ordered pairs
    ``f <= g`` give the monotonicity defect and the binary join defect on the
    same inputs.
    """
    rng = rng_from(seed)
    report = MlDefectReport(epsilon=oracle.epsilon, samples=samples, seed=seed)
    for name, fn, back, dom in (("kappa", oracle.kappa, oracle.kappa_prime, oracle.Y),
                                ("kappa_prime", oracle.kappa_prime, oracle.kappa, oracle.X)):
        sizes = family_sizes if family_sizes is not None else (0, 1, 2, 5, len(dom))
        fs = sample_functions(rng, dom, samples)
        _measure_direction(report, name, fn, back, dom, fs, rng, tuple(sizes), families_per_size)
    return report


# -- cones under the oracle and reconstruction ---------------------------------

def lambda_image(oracle: MlOracle, x: int, r: float) -> tuple[int, float, float]:
    """Nearest cone to ``kappa_prime(Lambda(x, r))``: ``(center, radius, residual)``."""
    if math.isinf(r):
        raise ValueError("radius must be finite")
    return nearest_lambda(oracle.kappa_prime(lambda_realize(oracle.X, x, r)))


def _probe_radius(eps: float) -> float:
    return PROBE_RADIUS * eps if eps > 0 else 1.0


def _probe_center(fn, dom: MetricSpace, x: int, eps: float, tol: float) -> int:
    center, radius, residual = nearest_lambda(fn(lambda_realize(dom, x, _probe_radius(eps))))
    if math.isinf(radius) or residual > LAMBDA_RESIDUAL * eps + tol:
        raise NotMlIsomorphism(
            f"probe at point {x} is {residual} from the nearest finite cone "
            f"(allowed {LAMBDA_RESIDUAL * eps})")
    return center


def reconstruct(oracle: MlOracle, tol: float = TOL) -> MapPair:
    """Recover a rough isometry from the oracle by probing it with cones.

    ``forward(x)`` is the centre of the cone nearest to
    ``kappa_prime(Lambda(x, 22 eps))`` (radius 1 when ``eps = 0``);
    ``backward`` is built the same way from ``kappa``.
    """
    eps = oracle.epsilon
    fwd = [_probe_center(oracle.kappa_prime, oracle.X, x, eps, tol) for x in range(len(oracle.X))]
    bwd = [_probe_center(oracle.kappa, oracle.Y, y, eps, tol) for y in range(len(oracle.Y))]
    return MapPair(fwd, bwd)


def lambda_exchange_defect(pair: MapPair, X: MetricSpace, Y: MetricSpace, f: LipFn) -> float:
    """Distance between ``join_x Lambda(x, f(forward x))`` and
    ``join_y Lambda(backward y, f(y))`` on ``X``."""
    left = lipschitzise(X, f.values[list(pair.forward)])
    right = join_lambdas(X, [LambdaFn(pair.backward[y], float(f.values[y]))
                             for y in range(len(Y))])
    return sup_dist(left, right)


def bound_entry(measured: float, bound: float, tol: float = TOL, **extra) -> dict:
    return {"measured": float(measured), "bound": float(bound),
            "ok": bool(measured <= bound + tol), **extra}


def _probe_radii(eps: float, space: MetricSpace, rng: np.random.Generator) -> list[float]:
    diam = space.max_finite_distance()
    radii = {0.0, diam / 4, diam / 2, diam, 2 * diam}
    if eps > 0:
        radii |= {eps * k for k in (1, 6, 14, 22, 30, 37, LARGE_RADIUS, 43, 59, 88, 120)}
    else:
        radii.add(1.0)
    radii |= {float(v) for v in rng.integers(0, int(2 * diam * 16) + 1, 4) / 16}
    return sorted(radii)


def verify_reconstruction(oracle: MlOracle, pair: MapPair | None = None, samples: int = 64,
                    seed: int = 0, tol: float = TOL) -> dict:
    """Measure the reconstruction bounds against their constants.

    Reports the reconstructed pair's defect (bound 88 eps), the nearness of
    ``kappa`` to the lift of the reconstructed forward map (bound 62 eps, and
    whether 61 eps held), cone probes (59 eps; 43 eps for radius >= 38 eps;
    44 eps at radius inf) and cone-to-cone residuals (6 eps).
    """
    eps = oracle.epsilon
    X, Y = oracle.X, oracle.Y
    if pair is None:
        pair = reconstruct(oracle, tol)
    rng = rng_from(seed)

    pair_defect = defect(pair, X, Y).overall

    near = 0.0
    pull = pullback(pair.forward, X)
    for f in sample_functions(rng, Y, samples):
        near = max(near, sup_dist(oracle.kappa(f), pull(f)))

    probe = probe_large = probe_inf = residual = 0.0
    sides = ((oracle.kappa_prime, X, Y, pair.forward), (oracle.kappa, Y, X, pair.backward))
    for fn, dom, cod, point_map in sides:
        radii = _probe_radii(eps, dom, rng)
        for x in range(len(dom)):
            for r in radii:
                image = fn(lambda_realize(dom, x, r))
                dist = sup_dist(lambda_realize(cod, point_map[x], r), image)
                probe = max(probe, dist)
                if r >= LARGE_RADIUS * eps:
                    probe_large = max(probe_large, dist)
                residual = max(residual, nearest_lambda(image)[2])
            image = fn(lambda_realize(dom, x, INF))
            probe_inf = max(probe_inf, sup_dist(lambda_realize(cod, point_map[x], INF), image))

    return {
        "epsilon": float(eps),
        "pair": {"forward": list(pair.forward), "backward": list(pair.backward)},
        "pair_defect": bound_entry(pair_defect, RECONSTRUCTED_DEFECT * eps, tol),
        "kappa_nearness": bound_entry(near, NEARNESS_BOUND * eps, tol,
                                      bound_61=NEARNESS_BOUND_TIGHT * eps,
                                      holds_61=bool(near <= NEARNESS_BOUND_TIGHT * eps + tol)),
        "lambda_probe": bound_entry(probe, PROBE_BOUND * eps, tol),
        "lambda_probe_large": bound_entry(probe_large, PROBE_BOUND_LARGE * eps, tol,
                                          min_radius=LARGE_RADIUS * eps),
        "lambda_infinite": bound_entry(probe_inf, PROBE_BOUND_INF * eps, tol),
        "lambda_to_lambda": bound_entry(residual, LAMBDA_RESIDUAL * eps, tol),
    }
