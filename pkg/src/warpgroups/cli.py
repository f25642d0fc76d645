"""Command line entry point.

Every subcommand reads an experiment config (``--config``).  ``report`` runs
the config as written; ``pi1``, ``compare``, ``boxspace``, ``expander``,
``slab`` force the matching experiment kind; ``net``, ``warp`` and
``predict`` emit a single artifact.  Exit codes: 0 when every verdict
matches (or there is none), 2 on any mismatch, 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError, WarpError
from .experiments import build_actions, build_space, load_config, resolve_caps, run_experiment, validate_config
from .export import dumps, edges_csv, graph_dot, write_text
from .groups import predicted_presentation_torus
from .spaces import WeightedGraph, as_fraction, auto_t0, warp

FORCED_KIND = {
    "pi1": "warped_pi1",
    "compare": "predicted_vs_computed",
    "boxspace": "dk_check",
    "expander": "expansion_scan",
    "slab": "slab_compare",
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="warpgroups", description="Discrete fundamental groups of warped nets and box spaces.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("net", "warp", "pi1", "predict", "compare", "boxspace", "expander", "slab", "report"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="experiment config (JSON)")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="seed for randomized steps")
        sp.add_argument("--max-vertices", type=int, default=None, help="vertex cap (overrides config and environment)")
        sp.add_argument("--float-mode", action="store_true", help="use float distances with a fixed tolerance")
        if name in ("net", "warp"):
            sp.add_argument("--format", choices=("json", "csv", "dot"), default="json")
        if name == "report":
            sp.add_argument("--workers", type=int, default=None, help="parallel workers for batch configs")
    return p


def _out_dir(args, config) -> Path:
    if args.out:
        return Path(args.out)
    path = config.get("output", {}).get("path")
    return Path(path).parent if path else Path(".")


def _graph_text(graph: WeightedGraph, fmt: str, extra: dict) -> str:
    if fmt == "csv":
        return edges_csv(graph)
    if fmt == "dot":
        return graph_dot(graph)
    return dumps({**extra, "edges": [[e.u, e.v, str(e.weight), e.kind, e.label] for e in graph.edges]})


def _single(config: dict) -> dict:
    if "experiments" in config:
        raise ConfigError("this subcommand needs a single experiment, not a batch", "experiments")
    if "space" not in config:
        raise ConfigError("'space' is required", "space")
    return config


def _scale(config, net, gens, caps):
    rule = config.get("t_rule", {"mode": "auto_t0"})
    theta = config.get("thetas", [1])[0]
    if rule["mode"] == "explicit":
        return as_fraction(rule["t"]), net, gens, theta, None
    auto = auto_t0(net, gens, theta, max_vertices=caps["max_vertices"], max_words=caps["max_words"])
    return auto.t, auto.net, auto.generators, theta, auto


def run(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.float_mode:
            config["float_mode"] = True
        cli_caps = {"max_vertices": args.max_vertices}
        out = _out_dir(args, config)
        if args.command in ("net", "warp", "predict"):
            config = _single(config)
            caps = resolve_caps(config, cli_caps)
            net = build_space(config["space"], caps["max_vertices"])
            gens = build_actions(net, config.get("actions"))
            if args.command == "net":
                graph = warp(net, [], 1)
                text = _graph_text(graph, args.format, {"net": net.to_json()})
                path = write_text(out / f"net.{args.format}", text)
            elif args.command == "warp":
                t, net, gens, _, auto = _scale(config, net, gens, caps)
                graph = warp(net, gens, t, float_mode=bool(config.get("float_mode")))
                extra = {"net": net.to_json(), "t": str(t), "scale": auto.to_json() if auto else None}
                path = write_text(out / f"warp.{args.format}", _graph_text(graph, args.format, extra))
            else:
                t, net, gens, theta, auto = _scale(config, net, gens, caps)
                pred = predicted_presentation_torus(net, gens, theta, t, check_t0=auto is None, max_words=caps["max_words"])
                data = {"config": config, "prediction": pred.to_json(), "abelianization": pred.abelianization().to_json()}
                path = write_text(out / "prediction.json", dumps(data))
            print(path)
            return 0
        if args.command in FORCED_KIND:
            config = dict(config)
            if "experiments" in config:
                raise ConfigError(f"'{args.command}' needs a single experiment, not a batch", "experiments")
            config["kind"] = FORCED_KIND[args.command]
            validate_config(config)
        report = run_experiment(config, cli_caps, args.seed, getattr(args, "workers", None))
        target = Path(args.out) / "report.json" if args.out else Path(config.get("output", {}).get("path", "report.json"))
        write_text(target, dumps(report))
        summary = report["summary"]
        print(json.dumps({"report": str(target), "verdict": summary["verdict"], "counts": summary["counts"]}, sort_keys=True))
        return int(summary["exit_code"])
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (WarpError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
