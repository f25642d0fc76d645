"""Bit-stable JSON, CSV and DOT output.

JSON keys are sorted, floats are written with 17 significant digits and every
file ends with a single ``\\n``.  Fractions are written as strings.
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable

from .spaces import Edge, WeightedGraph

EDGE_COLUMNS = ("u", "v", "weight", "kind", "label")


def format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def to_plain(obj: Any) -> Any:
    """Convert Fractions, tuples, numpy scalars and dataclass reports to JSON types."""
    if hasattr(obj, "to_json"):
        return to_plain(obj.to_json())
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return int(obj)
    if isinstance(obj, float):
        return float(obj)
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    # numpy scalars
    if hasattr(obj, "item"):
        return to_plain(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(obj: Any, indent: int, level: int, out: list[str]) -> None:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = sorted(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(pad + json.dumps(k) + ": ")
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    elif isinstance(obj, float):
        out.append(format_float(obj))
    else:
        out.append(json.dumps(obj))


def dumps(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON text (sorted keys, 17-digit floats, trailing newline)."""
    out: list[str] = []
    _emit(to_plain(obj), indent, 0, out)
    return "".join(out) + "\n"


def write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def write_json(obj: Any, path: str | Path) -> Path:
    return write_text(path, dumps(obj))


# ---------------------------------------------------------------------------
# graphs


def edges_csv(graph: WeightedGraph) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EDGE_COLUMNS)
    for e in graph.edges:
        writer.writerow([e.u, e.v, str(Fraction(e.weight)), e.kind, e.label])
    return buf.getvalue()


def read_edges_csv(text: str, n: int | None = None) -> WeightedGraph:
    """Inverse of :func:`edges_csv`; ``n`` defaults to one more than the largest id."""
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != EDGE_COLUMNS:
        raise ValueError(f"expected columns {','.join(EDGE_COLUMNS)}")
    edges = [Edge(int(r["u"]), int(r["v"]), Fraction(r["weight"]), r["kind"], r["label"]) for r in reader]
    if n is None:
        n = 1 + max((max(e.u, e.v) for e in edges), default=-1)
    return WeightedGraph(n, edges)


def graph_dot(graph: WeightedGraph, name: str = "G") -> str:
    """Undirected DOT; nodes are vertex ids, edges keep weight, kind and label."""
    lines = [f"graph {json.dumps(name)} {{"]
    for v in range(graph.n):
        lines.append(f"  {v};")
    for e in graph.edges:
        attrs = f'weight="{Fraction(e.weight)}", kind="{e.kind}"'
        if e.label:
            attrs += f', label="{e.label}"'
        lines.append(f"  {e.u} -- {e.v} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def rows_csv(rows: Iterable[dict], columns: Iterable[str] | None = None) -> str:
    """Flat CSV of report rows; floats use the 17-digit format."""
    rows = [to_plain(r) for r in rows]
    if columns is None:
        columns = sorted({k for r in rows for k in r})
    columns = list(columns)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        out = []
        for c in columns:
            v = r.get(c)
            if isinstance(v, float):
                out.append(format_float(v))
            elif isinstance(v, (dict, list)):
                out.append(json.dumps(v, sort_keys=True))
            elif v is None:
                out.append("")
            else:
                out.append(v)
        writer.writerow(out)
    return buf.getvalue()


def export(obj: Any, path: str | Path, fmt: str | None = None) -> Path:
    """Write a report or graph as ``json``, ``csv`` or ``dot`` (inferred from the suffix)."""
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    if fmt == "json":
        return write_json(obj, path)
    if fmt == "csv":
        if isinstance(obj, WeightedGraph):
            return write_text(path, edges_csv(obj))
        if hasattr(obj, "rows"):
            return write_text(path, rows_csv(r.to_json() if hasattr(r, "to_json") else r for r in obj.rows))
        return write_text(path, rows_csv(obj))
    if fmt == "dot":
        if not isinstance(obj, WeightedGraph):
            raise TypeError("DOT export needs a graph")
        return write_text(path, graph_dot(obj))
    raise ValueError(f"unknown export format {fmt!r}")
