"""Command-line entry point.

Exit codes: 0 success, 1 domain or input error (JSON message on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from . import serialize as io
from .lipschitz import lambda_decompose, lambda_dist_closed, lipschitzise, nearest_lambda
from .metric import TOL, components, cutoff, metric_violations, parse_ext, scale
from .mliso import check_ml_defect, lift, reconstruct, verify_reconstruction
from .rough import rough_distance_exact
from .scaling import FAMILIES, ScalingExperiment, run_scaling_experiment


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: int = 0
    samples: int = 64
    budget: int = 5
    tol: float = TOL
    format: str = "text"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def _num(v) -> str:
    if isinstance(v, str):
        return v
    if math.isinf(v):
        return "inf"
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def _ext_arg(text: str) -> float:
    if text == "inf":
        return math.inf
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'inf', got {text!r}") from None
    return parse_ext(value)


def _levels(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level list {text!r}") from None


def _point(space, label: str) -> int:
    for i, lab in enumerate(space.labels):
        if str(lab) == label:
            return i
    raise KeyError(f"unknown point {label!r}")


# -- subcommands; each returns (json payload, text rendering) -------------------

def cmd_validate(args, cfg):
    raw = io.read_json(args.space)
    if not isinstance(raw, dict) or "points" not in raw or "d" not in raw:
        raise io.InputError(args.space, "a space needs 'points' and 'd'")
    try:
        matrix = [[parse_ext(t) for t in row] for row in raw["d"]]
    except (TypeError, ValueError) as exc:
        raise io.InputError(args.space, f"bad distance entry: {exc}") from None
    violations = metric_violations(raw["points"], matrix, cfg.tol)
    if violations:
        payload = {"valid": False, "violations": [
            {"kind": v.kind, "indices": list(v.indices), "detail": v.detail} for v in violations]}
        text = "invalid:\n" + "\n".join(f"  {v}" for v in violations)
        return payload, text, 1
    space = io.space_from_json(raw, args.space)
    k = len(components(space))
    payload = {"valid": True, "points": len(space), "components": k}
    return payload, f"valid, {k} component{'s' if k != 1 else ''}"


def cmd_components(args, cfg):
    space = io.load_space(args.space)
    blocks = [[space.labels[i] for i in b] for b in components(space).blocks]
    text = "\n".join(" ".join(str(x) for x in b) for b in blocks)
    return {"components": blocks}, text


def cmd_cutoff(args, cfg):
    out = io.space_to_json(cutoff(io.load_space(args.space), args.r))
    return out, io.dumps(out).rstrip()


def cmd_scale(args, cfg):
    out = io.space_to_json(scale(io.load_space(args.space), args.factor))
    return out, io.dumps(out).rstrip()


def cmd_lambda_dist(args, cfg):
    space = io.load_space(args.space)
    d = lambda_dist_closed(space, _point(space, args.x), args.r, _point(space, args.y), args.s)
    return {"distance": d}, _num(d)


def _raw_function(path):
    """A function document whose values need not be 1-Lipschitz."""
    obj = io.read_json(path)
    if not isinstance(obj, dict) or "space" not in obj or "values" not in obj:
        raise io.InputError(path, "a function needs 'space' and 'values'")
    ref = obj["space"]
    if isinstance(ref, str):
        p = Path(ref)
        space = io.load_space(p if p.is_absolute() else Path(path).parent / p)
    else:
        space = io.space_from_json(ref, path)
    try:
        values = [parse_ext(t) for t in obj["values"]]
    except (TypeError, ValueError) as exc:
        raise io.InputError(path, f"bad value: {exc}") from None
    return space, values, ref


def cmd_lipschitzise_raw(args, cfg):
    space, values, ref = _raw_function(args.function)
    f = lipschitzise(space, values, args.eps)
    out = io.function_to_json(f, ref)
    return out, " ".join(_num(v) for v in out["values"])


def cmd_lambda_decompose(args, cfg):
    f, _ = io.load_function(args.function)
    lams = [{"center": f.space.labels[p.center], "radius": p.radius} for p in lambda_decompose(f)]
    text = "\n".join(f"Lambda({p['center']}, {_num(p['radius'])})" for p in lams)
    return {"lambdas": lams}, text


def cmd_nearest_lambda(args, cfg):
    f, _ = io.load_function(args.function)
    c, r, d = nearest_lambda(f)
    label = f.space.labels[c]
    return ({"center": label, "radius": r, "distance": d},
            f"Lambda({label}, {_num(r)}) at distance {_num(d)}")


def cmd_rough_dist(args, cfg):
    res = rough_distance_exact(io.load_space(args.a), io.load_space(args.b), budget=cfg.budget)
    out = {"epsilon": res.epsilon, **io.pair_to_json(res.witness)}
    text = (f"epsilon = {_num(res.epsilon)}\nforward  {list(res.witness.forward)}\n"
            f"backward {list(res.witness.backward)}")
    return out, text


def cmd_lift(args, cfg):
    X, Y = io.load_space(args.x), io.load_space(args.y)
    pair = io.load_pair(args.pair)
    pair.check(X, Y)
    out = io.oracle_to_json(lift(pair, X, Y))
    return out, io.dumps(out).rstrip()


def cmd_ml_check(args, cfg):
    report = check_ml_defect(io.load_oracle(args.oracle), samples=cfg.samples, seed=cfg.seed)
    out = io.report_to_json(report, cfg.tol)
    lines = [f"declared epsilon {_num(report.epsilon)}"]
    for name in report.AXIOMS + report.EXTRAS:
        lines.append(f"  {name:20s} {_num(getattr(report, name).value)}")
    lines.append("ok" if out["ok"] else "VIOLATED")
    return out, "\n".join(lines)


def cmd_reconstruct(args, cfg):
    pair = reconstruct(io.load_oracle(args.oracle), tol=cfg.tol)
    out = io.pair_to_json(pair)
    return out, f"forward  {out['forward']}\nbackward {out['backward']}"


def _bounds_text(report: dict) -> str:
    lines = [f"declared epsilon {_num(report['epsilon'])}"]
    for key, entry in report.items():
        if isinstance(entry, dict) and "bound" in entry:
            mark = "ok" if entry["ok"] else "VIOLATED"
            lines.append(f"  {key:20s} {_num(entry['measured'])} <= {_num(entry['bound'])}  {mark}")
    return "\n".join(lines)


def cmd_verify_reconstruction(args, cfg):
    report = verify_reconstruction(io.load_oracle(args.oracle), samples=cfg.samples, seed=cfg.seed,
                             tol=cfg.tol)
    out = io.jsonable(report)
    return out, _bounds_text(out)


def cmd_scaling_experiment(args, cfg):
    exp = ScalingExperiment(family=args.family, levels=args.levels, reference=args.reference,
                            samples=cfg.samples, seed=cfg.seed)
    out = io.jsonable(run_scaling_experiment(exp))
    lines = [f"{exp.family}, reference {exp.reference}"]
    for row in out["levels"]:
        ml = row["ml_defect"]
        lines.append(f"  n={row['level']:<4d} eps={_num(row['epsilon']):10s} "
                     f"ml-defect={_num(ml['measured'])} <= {_num(ml['bound'])}")
    return out, "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=64)
    common.add_argument("--budget", type=int, default=5)
    common.add_argument("--tol", type=float, default=TOL)
    common.add_argument("--format", choices=("json", "text"), default="text")

    parser = argparse.ArgumentParser(
        prog="coarselip", description="Coarse geometry of finite extended metric spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(handler=fn)
        return p

    add("validate", cmd_validate, "check the metric axioms").add_argument("space")
    add("components", cmd_components, "finite-distance components").add_argument("space")
    p = add("cutoff", cmd_cutoff, "cut-off metric min(r, d)")
    p.add_argument("space")
    p.add_argument("r", type=_ext_arg)
    p = add("scale", cmd_scale, "multiply all distances")
    p.add_argument("space")
    p.add_argument("factor", type=float)
    p = add("lambda-dist", cmd_lambda_dist, "sup-distance of two cones")
    p.add_argument("space")
    p.add_argument("x")
    p.add_argument("r", type=_ext_arg)
    p.add_argument("y")
    p.add_argument("s", type=_ext_arg)
    p = add("lipschitzise", cmd_lipschitzise_raw, "Lipschitz envelope of a function")
    p.add_argument("function")
    p.add_argument("--eps", type=float, default=None)
    add("lambda-decompose", cmd_lambda_decompose, "cones whose join is f").add_argument("function")
    add("nearest-lambda", cmd_nearest_lambda, "closest cone to f").add_argument("function")
    p = add("rough-dist", cmd_rough_dist, "exact rough distance of tiny spaces")
    p.add_argument("a")
    p.add_argument("b")
    p = add("lift", cmd_lift, "lift a map pair to an oracle descriptor")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("pair")
    add("ml-check", cmd_ml_check, "measure ml-isomorphism defects").add_argument("oracle")
    add("reconstruct", cmd_reconstruct, "rough isometry from an oracle").add_argument("oracle")
    add("verify-thm2", cmd_verify_reconstruction, "reconstruction bounds").add_argument("oracle")
    p = add("scaling-experiment", cmd_scaling_experiment, "grid refinement experiment")
    p.add_argument("--family", choices=FAMILIES, default="path")
    p.add_argument("--levels", type=_levels, default=(2, 4, 8))
    p.add_argument("--reference", type=int, default=16)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(args.command, args.seed, args.samples, args.budget, args.tol, args.format)
        result = args.handler(args, cfg)
    except (ValueError, KeyError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc).strip("'\"")}
        if isinstance(exc, io.InputError):
            err["path"] = exc.path
        sys.stderr.write(json.dumps(err) + "\n")
        return 1
    payload, text, *code = result
    if cfg.format == "json":
        sys.stdout.write(io.dumps(io.jsonable(payload)))
    else:
        sys.stdout.write(text + "\n")
    return code[0] if code else 0


if __name__ == "__main__":
    sys.exit(main())
