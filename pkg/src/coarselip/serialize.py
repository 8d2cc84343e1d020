"""JSON documents for spaces, functions, map pairs, oracles and reports.

``inf`` is written and read as the string ``"inf"``; no other spelling is
accepted.
"""

from __future__ import annotations

import json
from dataclasses import fields
from pathlib import Path

from .lipschitz import LipFn
from .metric import MetricSpace, format_ext, parse_ext, validate_metric
from .mliso import Measure, MlDefectReport, MlOracle, lift, perturbed_lift
from .rough import MapPair


class InputError(ValueError):
    """An input document could not be read; names the path and location."""

    def __init__(self, path, message: str):
        self.path = str(path)
        super().__init__(f"{path}: {message}")


def read_json(path) -> object:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(path, exc.strerror or str(exc)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(path, f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _ext_list(values) -> list:
    return [format_ext(v) for v in values]


def space_to_json(space: MetricSpace) -> dict:
    return {"points": list(space.labels), "d": [_ext_list(row) for row in space.dist]}


def space_from_json(obj, where="<inline>") -> MetricSpace:
    if not isinstance(obj, dict) or "points" not in obj or "d" not in obj:
        raise InputError(where, "a space needs 'points' and 'd'")
    try:
        matrix = [[parse_ext(t) for t in row] for row in obj["d"]]
    except (TypeError, ValueError) as exc:
        raise InputError(where, f"bad distance entry: {exc}") from None
    return validate_metric(obj["points"], matrix)


def load_space(path) -> MetricSpace:
    return space_from_json(read_json(path), path)


def function_to_json(f: LipFn, space_ref=None) -> dict:
    return {"space": space_ref if space_ref is not None else space_to_json(f.space),
            "values": _ext_list(f.values)}


def function_from_json(obj, where="<inline>", base_dir=None) -> tuple[LipFn, object]:
    """Parse a function document; ``space`` is a path (relative to ``base_dir``)
    or an inline space.  Returns the function and the original space field."""
    if not isinstance(obj, dict) or "space" not in obj or "values" not in obj:
        raise InputError(where, "a function needs 'space' and 'values'")
    ref = obj["space"]
    if isinstance(ref, str):
        path = Path(ref)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        space = load_space(path)
    else:
        space = space_from_json(ref, where)
    try:
        values = [parse_ext(t) for t in obj["values"]]
    except (TypeError, ValueError) as exc:
        raise InputError(where, f"bad value: {exc}") from None
    return LipFn(space, values), ref


def load_function(path) -> tuple[LipFn, object]:
    return function_from_json(read_json(path), path, Path(path).parent)


def pair_to_json(pair: MapPair) -> dict:
    return {"forward": list(pair.forward), "backward": list(pair.backward)}


def pair_from_json(obj, where="<inline>") -> MapPair:
    if not isinstance(obj, dict) or "forward" not in obj or "backward" not in obj:
        raise InputError(where, "a map pair needs 'forward' and 'backward' index arrays")
    try:
        return MapPair(obj["forward"], obj["backward"])
    except (TypeError, ValueError) as exc:
        raise InputError(where, f"bad index: {exc}") from None


def load_pair(path) -> MapPair:
    return pair_from_json(read_json(path), path)


def oracle_to_json(oracle: MlOracle) -> dict:
    desc = oracle.descriptor
    if not desc:
        raise ValueError("only lifted oracles can be serialised")
    out = {"kind": desc["kind"], "X": space_to_json(oracle.X), "Y": space_to_json(oracle.Y),
           "pair": pair_to_json(desc["pair"]), "epsilon": oracle.epsilon}
    if desc["kind"] == "perturbed-lifted":
        out.update(delta=desc["delta"], noise_x=desc["noise_x"], noise_y=desc["noise_y"])
    return out


def oracle_from_json(obj, where="<inline>") -> MlOracle:
    if not isinstance(obj, dict) or obj.get("kind") not in ("lifted", "perturbed-lifted"):
        raise InputError(where, "oracle kind must be 'lifted' or 'perturbed-lifted'")
    X = space_from_json(obj.get("X"), where)
    Y = space_from_json(obj.get("Y"), where)
    pair = pair_from_json(obj.get("pair"), where)
    pair.check(X, Y)
    if obj["kind"] == "lifted":
        return lift(pair, X, Y)
    return perturbed_lift(pair, X, Y, float(obj["delta"]), obj["noise_x"], obj["noise_y"])


def load_oracle(path) -> MlOracle:
    return oracle_from_json(read_json(path), path)


def jsonable(obj):
    """Replace infinities by ``"inf"`` throughout a nested report."""
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, float):
        return format_ext(obj)
    return obj


def report_to_json(report: MlDefectReport, tol: float = 1e-9) -> dict:
    out = {"epsilon": report.epsilon, "samples": report.samples, "seed": report.seed}
    for f in fields(report):
        m = getattr(report, f.name)
        if isinstance(m, Measure):
            entry = {"measured": m.value, "witness": m.witness}
            if f.name in MlDefectReport.AXIOMS:
                entry.update(bound=report.epsilon, ok=bool(m.value <= report.epsilon + tol))
            out[f.name] = entry
    out["worst"] = report.worst
    out["ok"] = report.ok(tol)
    return jsonable(out)

