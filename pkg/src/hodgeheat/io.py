"""Complex ingestion (JSON / OFF / edge list) and deterministic report emission.

The JSON complex format::

    {"weights_default": 1.0,
     "simplices": {"0": [[0], ...], "1": [[0, 1], ...], ...},
     "weights":   {"1": [w, ...], ...},
     "cochain":   {"degree": 1, "values": [...]}}        # optional

Degrees are string keys; vertex tuples are sorted ascending.  OFF meshes
are accepted for 2-complexes (vertices plus triangular faces; edges are
closed automatically).  Edge lists are plain text, one ``u v [w]`` per
line with ``#`` comments.
"""

import csv
import io as _io
import json
import math
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .complexes import Cochain, SimplicialComplex, build_complex


@dataclass
class ParsedInput:
    complex: SimplicialComplex
    cochain: Cochain | None
    warnings: list


_EXTENSIONS = {".json": "json", ".off": "off", ".txt": "edgelist", ".edges": "edgelist"}


def parse_input(path: str, fmt: str | None = None) -> ParsedInput:
    """Read a complex (and optional cochain) from a file in a declared format."""
    if fmt is None:
        fmt = _EXTENSIONS.get(os.path.splitext(path)[1].lower())
        if fmt is None:
            raise ValueError(f"cannot infer format of {path!r}; pass json, off, or edgelist")
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if fmt == "json":
        return parse_json_complex(text)
    if fmt == "off":
        return parse_off(text)
    if fmt == "edgelist":
        return parse_edgelist(text)
    raise ValueError(f"unknown format {fmt!r}")


def parse_json_complex(text: str) -> ParsedInput:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or "simplices" not in doc:
        raise ValueError("JSON complex needs a 'simplices' mapping")

    spec = {}
    listing: dict[int, list[tuple[int, ...]]] = {}
    for key, simplices in doc["simplices"].items():
        ell = int(key)
        spec[ell] = [tuple(s) for s in simplices]
        listing[ell] = [tuple(sorted(s)) for s in simplices]
    if "weights" in doc:
        spec["weights"] = doc["weights"]
    if "weights_default" in doc:
        spec["weights_default"] = doc["weights_default"]
    K = build_complex(spec)

    cochain = None
    if "cochain" in doc:
        c = doc["cochain"]
        ell = int(c["degree"])
        values = [float(x) for x in c["values"]]
        order = listing.get(ell, [])
        if len(values) != len(order) or K.n_simplices(ell) != len(order):
            raise ValueError(
                f"cochain of degree {ell} needs one value per listed simplex "
                f"({K.n_simplices(ell)} after closure, {len(order)} listed, "
                f"{len(values)} values)"
            )
        arranged = np.zeros(len(order))
        for value, simplex in zip(values, order):
            arranged[K.index_of(ell, simplex)] = value
        cochain = Cochain(ell, arranged)
    return ParsedInput(K, cochain, [])


def parse_off(text: str) -> ParsedInput:
    """OFF triangle mesh, with orientation and manifoldness diagnostics.

    Two faces inducing the same direction on a shared two-face edge is an
    orientation error; edges shared by more than two faces are allowed but
    flagged as non-manifold.
    """
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            lines.append((lineno, stripped))
    if not lines or lines[0][1].upper() != "OFF":
        raise ValueError("not an OFF file: missing OFF header")
    if len(lines) < 2:
        raise ValueError("OFF file ends after the header")
    lineno, counts = lines[1]
    try:
        nv, nf, _ = (int(tok) for tok in counts.split()[:3])
    except ValueError:
        raise ValueError(f"line {lineno}: expected 'nv nf ne' counts") from None
    if len(lines) < 2 + nv + nf:
        raise ValueError(f"OFF file truncated: expected {nv} vertices and {nf} faces")

    for lineno, line in lines[2:2 + nv]:
        try:
            coords = [float(tok) for tok in line.split()]
        except ValueError:
            raise ValueError(f"line {lineno}: invalid vertex coordinates") from None
        if len(coords) < 3:
            raise ValueError(f"line {lineno}: vertex needs 3 coordinates")

    oriented_faces = []
    for lineno, line in lines[2 + nv:2 + nv + nf]:
        toks = line.split()
        try:
            n = int(toks[0])
            ids = [int(tok) for tok in toks[1:1 + n]]
        except (ValueError, IndexError):
            raise ValueError(f"line {lineno}: invalid face record") from None
        if n != 3:
            raise ValueError(f"line {lineno}: only triangular faces are accepted, got {n}-gon")
        if len(set(ids)) != 3:
            raise ValueError(f"line {lineno}: degenerate face {ids}")
        if not all(0 <= i < nv for i in ids):
            raise ValueError(f"line {lineno}: face {ids} references a missing vertex")
        oriented_faces.append((lineno, tuple(ids)))

    directed: dict[tuple[int, int], list[int]] = {}
    for lineno, (a, b, c) in oriented_faces:
        for u, v in ((a, b), (b, c), (c, a)):
            directed.setdefault((u, v), []).append(lineno)

    warnings = []
    seen = set()
    for (u, v), users in directed.items():
        edge = (min(u, v), max(u, v))
        if edge in seen:
            continue
        seen.add(edge)
        forward = len(users)
        backward = len(directed.get((v, u), []))
        total = forward + backward
        if total > 2:
            warnings.append(f"non-manifold edge {edge}: shared by {total} faces")
        elif forward == 2 or backward == 2:
            raise ValueError(
                f"orientation-inconsistent faces at edge {edge} "
                f"(lines {users if forward == 2 else directed[(v, u)]})"
            )

    K = build_complex({
        "vertices": list(range(nv)),
        "triangles": [tuple(sorted(f)) for _, f in oriented_faces],
    })
    return ParsedInput(K, None, warnings)


def parse_edgelist(text: str) -> ParsedInput:
    edges, weights = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        toks = stripped.split()
        if len(toks) not in (2, 3):
            raise ValueError(f"line {lineno}: expected 'u v [w]', got {raw!r}")
        try:
            u, v = int(toks[0]), int(toks[1])
            w = float(toks[2]) if len(toks) == 3 else 1.0
        except ValueError:
            raise ValueError(f"line {lineno}: expected 'u v [w]', got {raw!r}") from None
        if u == v:
            raise ValueError(f"line {lineno}: self-loop {u}")
        if w <= 0:
            raise ValueError(f"line {lineno}: non-positive weight {w}")
        edges.append(tuple(sorted((u, v))))
        weights.append(w)
    if not edges:
        raise ValueError("edge list is empty")
    K = build_complex({"edges": edges, "weights": {1: weights}})
    return ParsedInput(K, None, [])


def complex_to_json_dict(K: SimplicialComplex) -> dict:
    """Normalized JSON form of a complex (round-trips through parse)."""
    return {
        "weights_default": 1.0,
        "simplices": {str(ell): [list(s) for s in level]
                      for ell, level in enumerate(K.simplices)},
        "weights": {str(ell): [float(x) for x in K.weights[ell]]
                    for ell in range(K.max_degree + 1)},
    }


def sanitize(obj):
    """Recursively convert to JSON-safe values; non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def report_to_json(report: dict) -> str:
    return json.dumps(sanitize(report), indent=2, sort_keys=True) + "\n"


def report_to_csv(report: dict) -> str:
    """Flat CSV tables: spectrum, norms, gamma profile, checks."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")

    writer.writerow(["# spectrum"])
    writer.writerow(["degree", "index", "eigenvalue"])
    spectrum = report.get("spectrum", {})
    for i, lam in enumerate(spectrum.get("eigenvalues", [])):
        writer.writerow([spectrum.get("degree", ""), i, _csv_num(lam)])

    writer.writerow(["# norms"])
    writer.writerow(["p", "component", "norm", "ratio"])
    dec = report.get("decomposition") or {}
    norms = dec.get("component_norms", {})
    ratios = dec.get("c_p", {})
    for p in sorted(norms, key=_float_key):
        table = norms[p]
        denom = table.get("omega", 0.0)
        for component in sorted(table):
            value = table[component]
            ratio = ""
            if component != "omega" and isinstance(value, (int, float)) and denom:
                ratio = _csv_num(value / denom)
            writer.writerow([p, component, _csv_num(value), ratio])
        if p in ratios:
            writer.writerow([p, "max_ratio", _csv_num(ratios[p]), _csv_num(ratios[p])])

    writer.writerow(["# gamma"])
    writer.writerow(["p", "lower", "upper", "gamma"])
    interval = report.get("interval") or {}
    for row in interval.get("profile", []):
        writer.writerow([
            _csv_num(row.get("p")), _csv_num(row.get("lower")),
            _csv_num(row.get("upper")), _csv_num(row.get("gamma")),
        ])

    writer.writerow(["# checks"])
    writer.writerow(["name", "passed", "value", "threshold"])
    for check in report.get("checks", []):
        writer.writerow([
            check.get("name"), check.get("passed"),
            _csv_num(check.get("value")), _csv_num(check.get("threshold")),
        ])
    return buf.getvalue()


def _float_key(p):
    try:
        return float(p)
    except (TypeError, ValueError):
        return math.inf


def _csv_num(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def emit_report(report: dict, path: str, fmt: str = "json") -> None:
    """Write a report deterministically; identical reports give identical bytes."""
    if fmt == "json":
        payload = report_to_json(report)
    elif fmt == "csv":
        payload = report_to_csv(sanitize(report))
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(payload)


def report_schema() -> dict:
    """The JSON schema shipped with the package."""
    text = resources.files("hodgeheat").joinpath("report_schema.json").read_text()
    return json.loads(text)
