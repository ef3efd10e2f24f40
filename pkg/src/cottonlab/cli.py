"""Command-line front end.

Subcommands: curvature, cotton, cs, lcf, verify, specs.  Inputs are JSON
spec files (schema below); outputs are JSON documents with a fixed key
order and shortest round-trip float formatting, so identical invocations
produce byte-identical output.

Spec file schema::

    {
      "name": "flat",
      "coords": ["x1", "x2", "x3"],
      "metric": {"g11": "1", "g12": "0", "g13": "0",
                 "g22": "1", "g23": "0", "g33": "1"},
      "domain": {"min": [-1, -1, -1], "max": [1, 1, 1]},
      "orientation": 1,
      "conformal_factor": "0.3*x1",            # optional
      "frame": [["1","0","0"],["0","1","0"],["0","0","1"]],  # optional
      "group": "berger:t=2"                    # optional, variational suite
    }

Exit codes: 0 success, 1 failed verification, 2 usage error, 3 numeric or
domain error.  A NaN anywhere in the output is reported as exit 3.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import charts, jets, lcf, liegroup, quad
from .errors import CottonlabError, ExprSyntaxError, IoError, SchemaError
from .frames import ExprFrame
from .geometry import (
    Box,
    MetricData,
    MetricSpec,
    bianchi_residuals,
    conformal_rescale,
    cotton_tensor_field,
    curvature_packet,
    divergence_sym2,
    tensor_norm_02,
    tensor_norm_03,
)

_CATALOG_KEYS = (
    "flat",
    "hyperbolic",
    "round-s3-chart",
    "conformal-flat",
    "perturbed",
    "berger",
)


@dataclass
class SpecFile:
    name: str
    metric: dict
    domain: Box
    orientation: int
    conformal_factor: str | None = None
    frame: list | None = None
    group: str | None = None

    def to_metric_spec(self) -> MetricSpec:
        return MetricSpec.from_components(
            self.name, self.metric, self.domain, self.orientation
        )

    def frame_field(self):
        return ExprFrame(self.frame) if self.frame else None


def _catalog_path(name):
    from importlib.resources import files

    base = name[:-5] if name.endswith(".json") else name
    if base in _CATALOG_KEYS:
        return files("cottonlab").joinpath("specs", f"{base}.json")
    return None


def load_spec(path) -> SpecFile:
    """Load and validate a spec file; catalog names resolve as a fallback."""
    text = None
    if os.path.exists(path):
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise IoError(f"cannot read spec file {path!r}: {exc}") from None
    else:
        res = _catalog_path(os.path.basename(str(path)))
        if res is not None:
            text = res.read_text(encoding="utf-8")
        else:
            raise IoError(f"spec file {path!r} does not exist")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"spec file is not valid JSON: {exc}") from None

    def need(key, typ):
        if key not in raw:
            raise SchemaError(key)
        val = raw[key]
        if typ is not None and not isinstance(val, typ):
            raise SchemaError(key, f"key '{key}' has the wrong type")
        return val

    name = need("name", str)
    coords = need("coords", list)
    if coords != ["x1", "x2", "x3"]:
        raise SchemaError("coords", "coords must be [\"x1\", \"x2\", \"x3\"]")
    metric = need("metric", dict)
    for key in ("g11", "g12", "g13", "g22", "g23", "g33"):
        if key not in metric:
            raise SchemaError(key)
    domain = need("domain", dict)
    for key in ("min", "max"):
        if key not in domain or len(domain[key]) != 3:
            raise SchemaError(f"domain.{key}")
    orientation = need("orientation", int)
    if orientation not in (1, -1):
        raise SchemaError("orientation", "orientation must be +1 or -1")

    def parse_checked(key, text_expr):
        try:
            return jets.parse(text_expr)
        except ExprSyntaxError as exc:
            raise ExprSyntaxError(f"in key '{key}': {exc.args[0]}", exc.offset) from None

    for key, expr in metric.items():
        parse_checked(key, expr)
    cf = raw.get("conformal_factor")
    if cf is not None:
        parse_checked("conformal_factor", cf)
    frame = raw.get("frame")
    if frame is not None:
        if len(frame) != 3 or any(len(row) != 3 for row in frame):
            raise SchemaError("frame", "frame must be a 3x3 array of expressions")
        for a, row in enumerate(frame):
            for i, comp in enumerate(row):
                parse_checked(f"frame[{a}][{i}]", comp)
    box = Box(tuple(domain["min"]), tuple(domain["max"]))
    return SpecFile(name, dict(metric), box, orientation, cf, frame, raw.get("group"))


def _thread_count():
    raw = os.environ.get("COTTONLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    if n == 0:
        n = min(os.cpu_count() or 1, 8)
    return max(1, n)


def _chunked_metric_data(m, pts, fields):
    """Evaluate pipeline fields over points, chunked across worker threads."""
    n = _thread_count()
    if n == 1 or pts.shape[0] < 64:
        d = MetricData(m, pts)
        return {f: getattr(d, f) for f in fields}
    chunks = np.array_split(pts, n)

    def work(chunk):
        d = MetricData(m, chunk)
        return {f: getattr(d, f) for f in fields}

    with ThreadPoolExecutor(max_workers=n) as pool:
        parts = list(pool.map(work, chunks))
    return {f: np.concatenate([p[f] for p in parts]) for f in fields}


def _emit(obj):
    text = json.dumps(obj, indent=2)
    if "NaN" in text or "Infinity" in text:
        print(text)
        print("error: non-finite value in output", file=sys.stderr)
        return 3
    print(text)
    return 0


def _parse_triple(text):
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated numbers")
    return tuple(parts)


# --- subcommands ---------------------------------------------------------------


def cmd_curvature(args):
    spec = load_spec(args.spec)
    m = spec.to_metric_spec()
    if not m.domain.contains(np.asarray(args.point)):
        print("error: point outside the spec domain", file=sys.stderr)
        return 2
    packet = curvature_packet(m, args.point)
    return _emit(packet.to_json_dict())


def cmd_cotton(args):
    spec = load_spec(args.spec)
    m = spec.to_metric_spec()
    rng = np.random.default_rng(args.seed)
    pts = m.domain.sample(rng, args.samples, margin=0.02)
    data = _chunked_metric_data(m, pts, ("g0", "cotton", "riem"))
    from .geometry import tensor_norm_04

    norm = tensor_norm_03(data["g0"], data["cotton"])
    scale = 1.0 + tensor_norm_04(data["g0"], data["riem"])
    worst = float(np.max(norm / scale))
    ok = worst < args.tol
    code = _emit(
        {
            "spec": spec.name,
            "samples": args.samples,
            "max_cotton_norm": worst,
            "tol": args.tol,
            "pass": bool(ok),
        }
    )
    return code if code else (0 if ok else 1)


def _cs_closed(group):
    if group == "so3":
        return liegroup.cs_invariant_group(liegroup.algebra("so3"))
    if group == "s3":
        return liegroup.cs_invariant_group(liegroup.algebra("su2"))
    if group.startswith("berger:t="):
        return liegroup.cs_invariant_group(liegroup.algebra(group))
    raise CottonlabError(f"unknown group {group!r}")


def _cs_chart(group):
    if group == "so3":
        return charts.so3_euler_chart()
    if group == "s3":
        return charts.s3_quaternion_chart()
    if group.startswith("berger:t="):
        return charts.berger_euler_chart(float(group.split("=", 1)[1]))
    raise CottonlabError(f"unknown group {group!r}")


def cmd_cs(args):
    closed = _cs_closed(args.group)
    out = {"group": args.group, "method": args.method}
    if args.method == "closed":
        out["cs"] = closed
    else:
        chart = _cs_chart(args.group)
        value = quad.cs_invariant_chart(chart, order=args.order)
        out["cs"] = value
        out["order"] = args.order
        out["closed_form"] = closed
        out["abs_error"] = abs(value - closed)
    return _emit(out)


def cmd_lcf(args):
    spec = load_spec(args.spec)
    m = spec.to_metric_spec()
    grid = lcf.integrate_conformal_system(
        m,
        args.center,
        X0=args.x0,
        half_width=args.radius,
        resolution=args.resolution,
        cotton_tol=args.tol,
    )
    grid = lcf.potential_from_closed_form(grid, basepoint=args.center)
    residual = lcf.flatness_residual(m, grid)
    grid.diagnostics["flatness_residual"] = residual
    doc = grid.to_json_dict()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
        return _emit(
            {
                "out": args.out,
                "resolution": args.resolution,
                "diagnostics": doc["diagnostics"],
            }
        )
    return _emit(doc)


def _suite_bianchi(m, rng, report):
    pts = m.domain.sample(rng, 40, margin=0.05)
    r1, r2 = bianchi_residuals(m, pts)
    report("bianchi-first", r1, 1e-9)
    report("bianchi-second", r2, 1e-7)


def _suite_cotton(m, rng, report):
    pts = m.domain.sample(rng, 40, margin=0.05)
    d = MetricData(m, pts)
    ct = d.cotton_tensor
    scale = 1.0 + tensor_norm_02(d.g0, ct)
    sym = np.max(np.abs(ct - ct.transpose(0, 2, 1)), axis=(1, 2)) / scale
    tr = np.abs(np.einsum("nij,nij->n", d.ginv0, ct)) / scale
    report("cotton-symmetric", float(np.max(sym)), 1e-6)
    report("cotton-tracefree", float(np.max(tr)), 1e-6)
    field = cotton_tensor_field(m)
    divs = []
    for p in m.domain.sample(rng, 5, margin=0.1):
        divs.append(np.max(np.abs(divergence_sym2(m, field, p))))
    report("cotton-divergence", float(np.max(divs)) , 1e-6)


def _suite_conformal(m, rng, report, factor):
    pts = m.domain.sample(rng, 30, margin=0.05)
    resc = conformal_rescale(m, factor)
    d0 = MetricData(m, pts)
    d1 = MetricData(resc, pts)
    diff = tensor_norm_03(d0.g0, d1.cotton - d0.cotton)
    scale = 1.0 + tensor_norm_03(d0.g0, d0.cotton)
    report("cotton-conformal-invariance", float(np.max(diff / scale)), 1e-7)


def _suite_variational(group, report):
    if not group or not group.startswith("berger"):
        raise CottonlabError(
            "the variational suite needs a spec with a \"group\": \"berger:t=..\" key"
        )
    for t in (0.5, 1.0, 2.0):
        fd, pairing = liegroup.berger_variational_check(t)
        err = abs(fd - pairing) / (1.0 + abs(pairing))
        report(f"variational-t={t:g}", err, 1e-4)


def cmd_verify(args):
    spec = load_spec(args.spec)
    m = spec.to_metric_spec()
    rng = np.random.default_rng(args.seed)
    failures = []
    lines = []

    def report(name, value, tol):
        ok = value < tol
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}: {value:.3e} (tol {tol:g})")
        if not ok:
            failures.append(name)

    suites = (
        ["bianchi", "cotton", "conformal", "variational"]
        if args.suite == "all"
        else [args.suite]
    )
    factor = spec.conformal_factor or "0.2*x1 + 0.1*sin(x2)"
    for suite in suites:
        if suite == "bianchi":
            _suite_bianchi(m, rng, report)
        elif suite == "cotton":
            _suite_cotton(m, rng, report)
        elif suite == "conformal":
            _suite_conformal(m, rng, report, factor)
        elif suite == "variational":
            if args.suite == "all" and not (spec.group or "").startswith("berger"):
                lines.append("SKIP variational: spec has no berger group key")
                continue
            _suite_variational(spec.group, report)
    for line in lines:
        print(line)
    print(f"{'OK' if not failures else 'FAILED'}: {len(lines) - len(failures)} passed, "
          f"{len(failures)} failed")
    return 1 if failures else 0


def cmd_specs(args):
    for key in _CATALOG_KEYS:
        print(key)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="cottonlab",
        description="Curvature, Cotton tensors and Chern-Simons invariants "
        "of Riemannian 3-manifolds",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curvature", help="full curvature packet at a point")
    p.add_argument("--spec", required=True)
    p.add_argument("--point", required=True, type=_parse_triple)
    p.set_defaults(run=cmd_curvature)

    p = sub.add_parser("cotton", help="max Cotton norm over sampled points")
    p.add_argument("--spec", required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(run=cmd_cotton)

    p = sub.add_parser("cs", help="Chern-Simons invariant of a group metric")
    p.add_argument("--group", required=True)
    p.add_argument("--method", choices=("closed", "quadrature"), default="closed")
    p.add_argument("--order", type=int, default=32)
    p.set_defaults(run=cmd_cs)

    p = sub.add_parser("lcf", help="local conformal flattening solver")
    p.add_argument("--spec", required=True)
    p.add_argument("--center", required=True, type=_parse_triple)
    p.add_argument("--radius", type=float, default=0.5)
    p.add_argument("--resolution", type=int, default=33)
    p.add_argument("--x0", type=_parse_triple, default=(0.0, 0.0, 0.0))
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", default=None)
    p.set_defaults(run=cmd_lcf)

    p = sub.add_parser("verify", help="bundled verification suites")
    p.add_argument("--spec", required=True)
    p.add_argument(
        "--suite",
        choices=("all", "bianchi", "cotton", "conformal", "variational"),
        default="all",
    )
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("specs", help="list built-in spec catalog names")
    p.set_defaults(run=cmd_specs)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.run(args)
    except CottonlabError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
