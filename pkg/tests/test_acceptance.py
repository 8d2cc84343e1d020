"""Acceptance checks, one test per criterion.  Each prints a single
PASS/FAIL line with the measured numbers."""

import functools
import json
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from coarselip.lipschitz import (LipFn, join, join_lambdas, lambda_decompose, lambda_dist_closed,
                                 lambda_realize, lipschitz_excess, lipschitzise, meet, sup_dist)
from coarselip.metric import INF, components, cutoff
from coarselip.mliso import (MlOracle, check_ml_defect, lambda_exchange_defect, lambda_image,
                             lift, reconstruct, verify_reconstruction)
from coarselip.rough import MapPair, defect, rough_distance_exact
from coarselip.sampling import (inverse_permutation, isometries, line_space, path_space,
                                random_instance, random_lipfn, random_space, rng_from,
                                sample_functions, symmetric_space)
from coarselip.serialize import dumps, oracle_to_json, pair_to_json, space_to_json

import oracles

TOL = 1e-9


@pytest.fixture
def verdict(capsys):
    def report(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, detail
    return report


@functools.lru_cache(maxsize=None)
def lifted_instances(count=200, seed=5000):
    return [random_instance(rng_from(seed + k)) for k in range(count)]


@functools.lru_cache(maxsize=None)
def positive_instances(count=100, seed=9000):
    out, k = [], 0
    while len(out) < count:
        X, Y, pair = random_instance(rng_from(seed + k))
        k += 1
        if defect(pair, X, Y).overall > 0:
            out.append((X, Y, pair))
    return out


def test_criterion_01_lambda_distance_closed_form(verdict):
    start = time.perf_counter()
    worst, draws, inf_radii, split = 0.0, 0, 0, 0
    for k in range(1200):
        rng = rng_from(10_000 + k)
        n = int(rng.integers(1, 13))
        comps = 1 if rng.random() < 0.6 else int(rng.integers(1, min(n, 3) + 1))
        space = random_space(rng, n, comps)
        d = oracles.matrix(space)
        x, y = (int(i) for i in rng.integers(0, n, 2))

        def radius():
            u = rng.random()
            if u < 0.15:
                return INF
            if u < 0.6:
                return rng.integers(0, 160) / 16
            return float(rng.uniform(0, 10))
        r, s = radius(), radius()
        closed = lambda_dist_closed(space, x, r, y, s)
        brute = oracles.sup_dist(oracles.cone(d, x, r), oracles.cone(d, y, s))
        gap = oracles.absdiff(closed, brute)
        worst = max(worst, gap)
        draws += 1
        inf_radii += np.isinf(r) or np.isinf(s)
        split += len(components(space)) > 1
    elapsed = time.perf_counter() - start
    ok = worst <= TOL and elapsed < 5 and inf_radii > 0 and split > 0
    verdict(1, "closed-form cone distance", ok,
            f"{draws} draws ({inf_radii} with inf radius, {split} multi-component), "
            f"max gap {worst:.3g}, {elapsed:.2f}s")


def test_criterion_02_lipschitzisation(verdict):
    start = time.perf_counter()
    failures, worst_slack, count = [], -INF, 0
    for k in range(600):
        rng = rng_from(20_000 + k)
        n = int(rng.integers(1, 11))
        space = random_space(rng, n, 1 if rng.random() < 0.7 else int(rng.integers(1, n + 1)))
        g = rng.integers(0, 160, n) / 16
        for block in components(space).blocks:
            if rng.random() < 0.15:
                g[list(block)] = INF
        eps = lipschitz_excess(space, g) + rng.integers(0, 4) / 8
        f = lipschitzise(space, g, eps=eps)
        d = oracles.matrix(space)
        one_lip = oracles.is_one_lipschitz(d, list(f.values))
        dominates = all(a >= b for a, b in zip(f.values, g))
        dist = oracles.sup_dist(list(f.values), list(g))
        worst_slack = max(worst_slack, dist - eps)
        if not (one_lip and dominates and dist <= eps + TOL):
            failures.append(k)
        count += 1
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 5
    verdict(2, "Lipschitz envelope", ok,
            f"{count} inputs, failures {failures[:5]}, max(dist - eps) {worst_slack:.3g}, "
            f"{elapsed:.2f}s")


def test_criterion_03_cone_decomposition(verdict):
    bad = 0
    for k in range(600):
        rng = rng_from(30_000 + k)
        n = int(rng.integers(1, 11))
        space = random_space(rng, n, 1 if k % 3 else int(rng.integers(1, n + 1)))
        f = random_lipfn(rng, space, inf_prob=0.2)
        rebuilt = join_lambdas(space, lambda_decompose(f))
        reference = oracles.envelope(oracles.matrix(space), list(f.values))
        deviation = oracles.sup_dist(list(rebuilt.values), list(f.values))
        bad += deviation != 0 or reference != list(f.values)
    verdict(3, "join of cone decomposition", bad == 0,
            f"600 functions, {bad} with nonzero deviation")


def test_criterion_04_lattice_contraction(verdict):
    bad, with_inf, count = 0, 0, 0
    for k in range(600):
        rng = rng_from(40_000 + k)
        n = int(rng.integers(1, 9))
        space = random_space(rng, n, 1 if k % 2 else int(rng.integers(1, n + 1)))
        size = int(rng.integers(0, 7))
        fs = [random_lipfn(rng, space, inf_prob=0.25) for _ in range(size)]
        gs = [random_lipfn(rng, space, inf_prob=0.25) for _ in range(size)]
        if size and rng.random() < 0.3:
            fs[0] = LipFn(space, np.full(n, INF))
        with_inf += any(np.isinf(f.values).any() for f in fs + gs)
        bound = max((sup_dist(f, g) for f, g in zip(fs, gs)), default=0.0)
        bad += sup_dist(meet(space, fs), meet(space, gs)) > bound
        bad += sup_dist(join(space, fs), join(space, gs)) > bound
        count += 1
    verdict(4, "meet/join contraction", bad == 0 and with_inf > 0,
            f"{count} family pairs ({with_inf} containing inf), {bad} violations")


def test_criterion_05_lift_constant(verdict):
    start = time.perf_counter()
    worst_ratio, violations, positive = 0.0, [], 0
    for k, (X, Y, pair) in enumerate(lifted_instances()):
        eps = defect(pair, X, Y).overall
        report = check_ml_defect(lift(pair, X, Y), seed=k)
        values = {name: getattr(report, name).value
                  for name in report.AXIOMS + report.EXTRAS}
        if any(v > 4 * eps + TOL for v in values.values()):
            violations.append((k, eps, values))
        if eps > 0:
            positive += 1
            worst_ratio = max(worst_ratio, max(values.values()) / (4 * eps))
    elapsed = time.perf_counter() - start
    ok = not violations and elapsed < 60
    verdict(5, "lifted defects <= 4 eps", ok,
            f"{len(lifted_instances())} instances ({positive} with eps > 0), worst "
            f"measured/(4 eps) {worst_ratio:.3f}, violations {violations[:2]}, {elapsed:.1f}s")


def test_criterion_06_exact_reconstruction(verdict):
    cases = []
    for n in range(1, 7):
        P = path_space(n)
        cases += [(P, sigma) for sigma in isometries(P)]
    for seed in range(12):
        X, group = symmetric_space(rng_from(60_000 + seed))
        cases += [(X, sigma) for sigma in group]
    failures = []
    for X, sigma in cases:
        pair = MapPair(sigma, inverse_permutation(sigma))
        oracle = lift(pair, X, X)
        got = reconstruct(oracle)
        report = verify_reconstruction(oracle, samples=24, seed=1)
        measured = [v["measured"] for v in report.values()
                    if isinstance(v, dict) and "measured" in v]
        if got != pair or any(m != 0 for m in measured):
            failures.append((X.labels, sigma, got))
    nontrivial = sum(1 for _, s in cases if list(s) != sorted(s))
    verdict(6, "exact reconstruction at eps = 0", not failures,
            f"{len(cases)} isometries ({nontrivial} nontrivial), failures {failures[:2]}")


def test_criterion_07_reconstruction_constants(verdict):
    start = time.perf_counter()
    keys = ("pair_defect", "lambda_probe", "lambda_probe_large", "lambda_infinite",
            "kappa_nearness")
    worst = dict.fromkeys(keys, 0.0)
    failures, held_61 = [], 0
    for k, (X, Y, pair) in enumerate(positive_instances()):
        oracle = lift(pair, X, Y)
        report = verify_reconstruction(oracle, seed=k)
        eps = report["epsilon"]
        assert eps == 4 * defect(pair, X, Y).overall
        for key in keys:
            worst[key] = max(worst[key], report[key]["measured"] / eps)
            if not report[key]["ok"]:
                failures.append((k, key, report[key]))
        held_61 += report["kappa_nearness"]["holds_61"]
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 120
    ratios = ", ".join(f"{k} {v:.3f}" for k, v in worst.items())
    verdict(7, "reconstruction bounds 88/59/43/62", ok,
            f"{len(positive_instances())} instances, worst measured/eps: {ratios}; "
            f"61 eps held in {held_61}/{len(positive_instances())}; failures {failures[:2]}; "
            f"{elapsed:.1f}s")


def test_criterion_08_cone_to_cone(verdict):
    worst, probes = 0.0, 0
    for X, Y, pair in positive_instances():
        oracle = lift(pair, X, Y)
        eps = oracle.epsilon
        mirrored = MlOracle(Y, X, oracle.kappa_prime, oracle.kappa, eps)
        diam = max(X.max_finite_distance(), Y.max_finite_distance())
        radii = [0.0, eps, 6 * eps, 22 * eps, 38 * eps, 60 * eps, diam / 2, diam, 2 * diam]
        for o, dom in ((oracle, X), (mirrored, Y)):
            for x in range(len(dom)):
                for r in radii:
                    worst = max(worst, lambda_image(o, x, r)[2] / eps)
                    probes += 1
    verdict(8, "cone images within 6 eps of a cone", worst <= 6 + TOL,
            f"{probes} probes, worst residual/eps {worst:.3f}")


def test_criterion_09_cutoff_embedding(verdict):
    mismatches, recovered, checked = 0, 0, 0
    for k in range(20):
        rng = rng_from(90_000 + k)
        n = int(rng.integers(2, 10))
        space = random_space(rng, n, 1 if k % 3 else 2)
        # a radius must be positive even when every component is a single point
        top = max(space.max_finite_distance(), 1 / 8)
        radii = [rng.integers(1, 16) / 8 for _ in range(3)] + [top, top + rng.integers(1, 9) / 4]
        for r in radii:
            cut = cutoff(space, r)
            cones = [lambda_realize(space, x, r) for x in range(n)]
            for x in range(n):
                for y in range(n):
                    mismatches += sup_dist(cones[x], cones[y]) != cut.d(x, y)
                    checked += 1
                    if r >= top and np.isfinite(space.d(x, y)):
                        recovered += lambda_dist_closed(space, x, r, y, r) != space.d(x, y)
    verdict(9, "cut-off embedding and metric recovery", mismatches == 0 and recovered == 0,
            f"20 spaces x 5 radii, {checked} pairs, {mismatches} cut-off mismatches, "
            f"{recovered} recovery mismatches")


def test_criterion_10_rough_distance(verdict):
    A, B = line_space([0, 2]), line_space([0, 1, 2])
    res = rough_distance_exact(A, B)
    example_ok = res.epsilon == 1 and defect(res.witness, A, B).overall == 1
    asym, tri = 0, 0
    for k in range(50):
        rng = rng_from(100_000 + k)
        X, Y, Z = (random_space(rng, int(rng.integers(1, 5)), 1) for _ in range(3))
        xy, yx = rough_distance_exact(X, Y), rough_distance_exact(Y, X)
        asym += xy.epsilon != yx.epsilon
        asym += defect(xy.witness.swapped(), Y, X).overall != xy.epsilon
        xz = rough_distance_exact(X, Z).epsilon
        tri += xz > xy.epsilon + rough_distance_exact(Y, Z).epsilon + TOL
    verdict(10, "rough distance example, symmetry, triangle", example_ok and not asym and not tri,
            f"d_R({{0,2}}, {{0,1,2}}) = {res.epsilon} via {pair_to_json(res.witness)}; "
            f"50 triples: {asym} symmetry and {tri} triangle failures")


def test_criterion_11_cone_exchange(verdict):
    worst_excess, count = -INF, 0
    for k, (X, Y, pair) in enumerate(lifted_instances()):
        eps = defect(pair, X, Y).overall
        for f in sample_functions(rng_from(k), Y, 12):
            worst_excess = max(worst_excess, lambda_exchange_defect(pair, X, Y, f) - eps)
            count += 1
    verdict(11, "cone exchange within pair defect", worst_excess <= TOL,
            f"{count} (instance, f) samples, max(exchange - eps) {worst_excess:.3g}")


def test_criterion_12_cli_determinism(verdict, tmp_path):
    X, Y = line_space([0, 2]), line_space([0, 1, 2])
    pair = MapPair([0, 2], [0, 0, 1])
    line = line_space([0, 1, 3])
    paths = {}
    for name, obj in {"X": space_to_json(X), "Y": space_to_json(Y), "line": space_to_json(line),
                      "pair": pair_to_json(pair), "oracle": oracle_to_json(lift(pair, X, Y)),
                      "f": {"space": "line.json", "values": [0, 1, 3]},
                      "g": {"space": "line.json", "values": [0, 2, 3]}}.items():
        paths[name] = tmp_path / f"{name}.json"
        paths[name].write_text(dumps(obj))
    p = {k: str(v) for k, v in paths.items()}
    commands = [
        ["validate", p["line"]], ["components", p["line"]], ["cutoff", p["line"], "2"],
        ["scale", p["line"], "0.5"], ["lambda-dist", p["line"], "p0", "2", "p1", "inf"],
        ["lipschitzise", p["g"]], ["lambda-decompose", p["f"]], ["nearest-lambda", p["f"]],
        ["rough-dist", p["X"], p["Y"]], ["lift", p["X"], p["Y"], p["pair"]],
        ["ml-check", p["oracle"]], ["reconstruct", p["oracle"]], ["verify-thm2", p["oracle"]],
        ["scaling-experiment", "--levels", "2,4", "--reference", "8"],
    ]
    differing = []
    for cmd in commands:
        outputs = []
        for hashseed, threads in (("1", "1"), ("2", "4")):
            env = dict(os.environ, PYTHONHASHSEED=hashseed, COARSE_LIP_THREADS=threads)
            proc = subprocess.run([sys.executable, "-m", "coarselip.cli", *cmd, "--seed", "11",
                                   "--samples", "24", "--format", "json"],
                                  capture_output=True, env=env)
            assert proc.returncode == 0, proc.stderr
            json.loads(proc.stdout)
            outputs.append(proc.stdout)
        if outputs[0] != outputs[1]:
            differing.append(cmd[0])
    verdict(12, "byte-identical CLI JSON", not differing,
            f"{len(commands)} subcommands run twice, differing: {differing or 'none'}")
