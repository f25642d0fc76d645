"""Experiment configs, dispatch and reports.

A config names one experiment kind (or a batch of experiments), the space
and action, the scales, the scale rule and resource caps.  The resolved
config is echoed verbatim in the report.  Reports are deterministic apart
from the top-level ``timings`` block.
"""

from __future__ import annotations

import copy
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import jsonschema

from . import __version__
from .boxspaces import dk_check, margulis_model, model_from_json, multigraph
from .errors import ConfigError
from .expanders import MultiGraph, expansion_scan
from .export import to_plain
from .pipelines import predicted_vs_computed, slab_compare, stability_scan, warped_multigraph, warped_pi1
from .spaces import (
    GeneratorAction,
    NetSpace,
    as_fraction,
    build_cycle_net,
    build_torus_net,
    make_affine_generator,
    make_permutation_generator,
    warp,
)

FORMAT_VERSION = "1.0"
KINDS = ("warped_pi1", "predicted_vs_computed", "dk_check", "stability_scan", "expansion_scan", "slab_compare")
CAP_NAMES = ("max_vertices", "max_words", "max_cells")


def load_schema(name: str = "config") -> dict:
    text = resources.files("warpgroups").joinpath("data", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _field_of(error: jsonschema.ValidationError) -> str:
    path = ".".join(str(p) for p in error.absolute_path)
    if error.validator == "additionalProperties":
        extra = sorted(set(error.instance) - set(error.schema.get("properties", {})))
        if extra:
            return ".".join(filter(None, [path, extra[0]]))
    if error.validator == "required":
        missing = [p for p in error.validator_value if p not in error.instance]
        if missing:
            return ".".join(filter(None, [path, missing[0]]))
    return path or "<root>"


def validate_config(config: Mapping) -> None:
    """Raise :class:`ConfigError` naming the offending field."""
    schema = load_schema("config")
    validator = jsonschema.Draft202012Validator(schema)
    errors = list(validator.iter_errors(config))
    if not errors:
        return
    # oneOf hides the useful message; descend to the deepest context error
    best = jsonschema.exceptions.best_match(errors)
    while best.context:
        best = jsonschema.exceptions.best_match(best.context)
    raise ConfigError(best.message, _field_of(best))


def validate_report(report: Mapping) -> None:
    jsonschema.validate(to_plain(report), load_schema("report"))


def load_config(path: str | Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", "<file>") from None
    validate_config(config)
    return config


# ---------------------------------------------------------------------------
# config pieces


def build_space(spec: Mapping, max_vertices: int | None = None) -> NetSpace:
    L = spec.get("total_length", 1)
    if spec["kind"] == "cycle":
        return build_cycle_net(spec["N"], L, max_vertices)
    return build_torus_net(spec["N"], spec.get("d", 2), L, max_vertices)


def build_actions(net: NetSpace, specs) -> list[GeneratorAction]:
    out = []
    for i, spec in enumerate(specs or []):
        try:
            if "images" in spec:
                out.append(make_permutation_generator(net, spec["label"], spec["images"]))
            else:
                d = net.dimension
                A = spec.get("matrix", [[1 if r == c else 0 for c in range(d)] for r in range(d)])
                b = spec.get("translation", [0] * d)
                if not isinstance(b, list):
                    b = [b]
                out.append(make_affine_generator(net, spec["label"], A, [as_fraction(x) for x in b]))
        except ValueError as exc:
            raise ConfigError(str(exc), f"actions.{i}") from None
    return out


def resolve_caps(config: Mapping, overrides: Mapping | None = None) -> dict:
    """CLI overrides, then config caps; unset caps fall back to the environment."""
    caps = dict(config.get("caps", {}))
    for k, v in (overrides or {}).items():
        if v is not None:
            caps[k] = v
    return {k: caps.get(k) for k in CAP_NAMES}


def _t_of(config: Mapping):
    rule = config.get("t_rule", {"mode": "auto_t0"})
    if rule["mode"] == "explicit":
        if "t" not in rule:
            raise ConfigError("explicit t rule needs a value", "t_rule.t")
        return as_fraction(rule["t"])
    return None


def _require(config: Mapping, *names: str) -> None:
    for n in names:
        if n not in config:
            raise ConfigError(f"'{n}' is required for kind {config['kind']}", n)


# ---------------------------------------------------------------------------
# runners


@dataclass
class ExperimentResult:
    name: str
    kind: str
    rows: list[dict]
    verdicts: list[str | None]
    summary: dict
    timings: dict

    def to_json(self) -> dict:
        return {"name": self.name, "kind": self.kind, "rows": self.rows, "verdicts": self.verdicts, "summary": self.summary}


def _timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start


def _run_space_cases(config: Mapping, caps: Mapping, fn) -> tuple[list, list, dict]:
    _require(config, "space", "thetas")
    net = build_space(config["space"], caps["max_vertices"])
    gens = build_actions(net, config.get("actions"))
    t = _t_of(config)
    rows, verdicts, timings = [], [], {}
    for th in config["thetas"]:
        res, dt = _timed(
            fn, net, gens, th, t, bool(config.get("float_mode", False)), caps["max_vertices"], caps["max_words"], caps["max_cells"]
        )
        rows.append(res.to_json())
        verdicts.append(res.verdict)
        timings[f"theta={th}"] = dt
    return rows, verdicts, timings


def _family(config: Mapping, caps: Mapping) -> list[tuple[str, MultiGraph]]:
    out = []
    for i, member in enumerate(config.get("family", [])):
        kind = member["type"]
        sizes = member.get("sizes", [])
        if kind == "margulis":
            out += [(f"margulis k={k}", multigraph(margulis_model(k))) for k in sizes]
        elif kind == "warped_margulis":
            for k in sizes:
                net = build_torus_net(k, 2, 1, caps["max_vertices"])
                gens = [make_affine_generator(net, a, M, [0, 0]) for a, M in (("a", ((1, 1), (0, 1))), ("b", ((1, 0), (1, 1))))]
                out.append((f"warped torus k={k}", warped_multigraph(warp(net, gens, k))))
        elif kind == "cycle":
            out += [(f"cycle n={n}", MultiGraph.cycle(n)) for n in sizes]
        elif kind == "complete":
            out += [(f"complete n={n}", MultiGraph.complete(n)) for n in sizes]
        elif kind == "quotient":
            if "model" not in member:
                raise ConfigError("quotient family member needs a model", f"family.{i}.model")
            m = model_from_json(member["model"])
            out.append((m.name or f"quotient {i}", multigraph(m)))
    return out


def run_single(config: Mapping, cli_caps: Mapping | None = None, seed: int | None = None) -> ExperimentResult:
    kind = config["kind"]
    caps = resolve_caps(config, cli_caps)
    seed = int(config.get("seed", 0) if seed is None else seed)
    name = config.get("name", kind)
    rows: list = []
    verdicts: list = []
    timings: dict = {}
    summary: dict = {}
    if kind == "warped_pi1":
        rows, verdicts, timings = _run_space_cases(config, caps, warped_pi1)
    elif kind == "predicted_vs_computed":
        rows, verdicts, timings = _run_space_cases(config, caps, predicted_vs_computed)
    elif kind == "stability_scan":
        _require(config, "space", "thetas")
        net = build_space(config["space"], caps["max_vertices"])
        gens = build_actions(net, config.get("actions"))
        rep, dt = _timed(
            stability_scan, net, gens, config["thetas"], config.get("window", 3), caps["max_vertices"], caps["max_words"], caps["max_cells"]
        )
        data = rep.to_json()
        rows = data.pop("cases")
        verdicts = [r["verdict"] for r in rows]
        summary = data
        if "stable" in config.get("expect", {}):
            verdicts.append("match" if rep.stable == config["expect"]["stable"] else "mismatch")
        timings["scan"] = dt
    elif kind == "slab_compare":
        _require(config, "space", "thetas")
        net = build_space(config["space"], caps["max_vertices"])
        gens = build_actions(net, config.get("actions"))
        lv = config.get("levels", {})
        for th in config["thetas"]:
            res, dt = _timed(
                slab_compare, net, gens, th, lv.get("values"), lv.get("count", 3), lv.get("step", 1),
                caps["max_vertices"], caps["max_words"], caps["max_cells"],
            )
            rows.append(res.to_json())
            verdicts.append(res.verdict)
            timings[f"theta={th}"] = dt
    elif kind == "dk_check":
        _require(config, "quotients", "thetas")
        for i, spec in enumerate(config["quotients"]):
            try:
                model = model_from_json(spec)
            except ValueError as exc:
                raise ConfigError(str(exc), f"quotients.{i}") from None
            for th in config["thetas"]:
                rep, dt = _timed(dk_check, model, th, caps["max_cells"])
                rows.append(rep.to_json())
                verdicts.append(rep.verdict)
                timings[f"{model.name or i} theta={th}"] = dt
    elif kind == "expansion_scan":
        _require(config, "family")
        family = _family(config, caps)
        rep, dt = _timed(expansion_scan, family, config.get("lambda2_floor", 0.0), config.get("tolerance", 1e-9), seed)
        data = rep.to_json()
        rows = data.pop("rows")
        summary = data
        for flag, want in config.get("expect", {}).items():
            if flag in data:
                verdicts.append("match" if data[flag] == want else "mismatch")
        timings["scan"] = dt
    else:
        raise ConfigError(f"unknown experiment kind {kind!r}", "kind")
    return ExperimentResult(name, kind, to_plain(rows), verdicts, to_plain(summary), timings)


def _run_packed(args):
    config, cli_caps, seed = args
    return run_single(config, cli_caps, seed)


def _aggregate(verdicts: list[str | None]) -> dict:
    counts: dict[str, int] = {}
    for v in verdicts:
        key = v if v is not None else "none"
        counts[key] = counts.get(key, 0) + 1
    if counts.get("mismatch"):
        verdict, code = "mismatch", 2
    elif counts.get("match"):
        verdict, code = "match", 0
    else:
        verdict, code = "no-verdict", 0
    return {"verdict": verdict, "exit_code": code, "counts": counts}


def run_experiment(config: Mapping, cli_caps: Mapping | None = None, seed: int | None = None, workers: int | None = None) -> dict:
    """Validate, run and assemble a report dictionary (with a ``timings`` block)."""
    validate_config(config)
    config = copy.deepcopy(dict(config))
    if seed is not None:
        config["seed"] = int(seed)
    if "experiments" in config:
        shared_caps = config.get("caps", {})
        jobs = []
        for sub in config["experiments"]:
            sub = dict(sub)
            if shared_caps:
                sub["caps"] = {**shared_caps, **sub.get("caps", {})}
            sub.setdefault("seed", config.get("seed", 0))
            jobs.append((sub, cli_caps, None))
        n = workers or config.get("workers", 1)
        if n > 1:
            with ProcessPoolExecutor(max_workers=n) as pool:
                results = list(pool.map(_run_packed, jobs))
        else:
            results = [_run_packed(j) for j in jobs]
    else:
        results = [run_single(config, cli_caps)]
    verdicts = [v for r in results for v in r.verdicts]
    report = {
        "format_version": FORMAT_VERSION,
        "tool": {"name": "warpgroups", "version": __version__},
        "config": config,
        "results": [r.to_json() for r in results],
        "summary": _aggregate(verdicts),
        "timings": {f"{i}:{r.name}": r.timings for i, r in enumerate(results)},
    }
    return to_plain(report)


def strip_timings(report: Mapping) -> dict:
    out = dict(report)
    out.pop("timings", None)
    return out
