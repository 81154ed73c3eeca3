"""Command-line front end.

Every run is a pure function of its parsed arguments; outputs embed the
configuration and the library version. Exit codes: 0 success, 1 a
verification found a violation, 2 usage error, 3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys

import numpy as np

from . import __version__
from .bounds import (
    APPROX1_GATES,
    big_c_table_check,
    check_charfn_bounds,
    l2_distance_exact,
    lemma_suite,
    maineq_vs_approx1,
    theorem_bounds,
)
from .detform import char_fn_det
from .fredholm import ConvergenceError, char_fn_fredholm, verify_basor_ehrhardt
from .groups import GroupKind, group_spec
from .moments import moment_identity_check, moment_range
from .sampling import sample_batch

__all__ = ["main", "build_parser", "run", "emit_convergence_series", "parse_int"]

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_NONCONVERGENCE = 0, 1, 2, 3
SUITES = ("moments", "basor-ehrhardt", "charfn", "pointwise", "lemmas", "big-c", "all")
TABLES = ("big-c", "gates", "convergence")


class UsageError(ValueError):
    pass


def parse_int(text: str) -> int:
    """Integer from ``123``, ``10^19``, ``1000**4`` or an integral ``1e19``."""
    t = text.strip().replace("**", "^")
    m = re.fullmatch(r"(\d+)\^(\d+)", t)
    if m:
        return int(m.group(1)) ** int(m.group(2))
    if re.fullmatch(r"\d+", t):
        return int(t)
    m = re.fullmatch(r"(\d+)[eE](\d+)", t)
    if m:
        return int(m.group(1)) * 10 ** int(m.group(2))
    raise argparse.ArgumentTypeError(f"not an integer: {text!r}")


def _int_list(text: str) -> list[int]:
    return [parse_int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="haartraces", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, group=True, fmt="json"):
        if group:
            sp.add_argument("--group", choices=[k.value for k in GroupKind], default="sp")
            sp.add_argument("--n", type=parse_int, default=4)
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default=fmt)

    sp = sub.add_parser("bounds", help="theorem and corollary bounds at (m, n)")
    sp.add_argument("--m", type=parse_int, required=True)
    sp.add_argument("--n", type=parse_int, required=True)
    common(sp, group=False)

    sp = sub.add_parser("moments", help="exact moments against the Gaussian side")
    common(sp)
    sp.add_argument("--max-weight", type=int, default=None)

    sp = sub.add_parser("charfn", help="characteristic function at xi")
    common(sp)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--xi", type=_float_list, required=True)
    sp.add_argument("--truncation", type=int, default=None)

    sp = sub.add_parser("sample", help="Haar sample of the trace vector")
    common(sp, fmt="csv")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=1000)
    sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("verify", help="run an identity or inequality suite")
    common(sp)
    sp.add_argument("--suite", choices=SUITES, default="all")
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=None, help="trials per check")
    sp.add_argument("--max-weight", type=int, default=None)

    sp = sub.add_parser("report", help="CSV tables")
    sp.add_argument("--table", choices=TABLES, required=True)
    sp.add_argument("--group", choices=[k.value for k in GroupKind], default="sp")
    sp.add_argument("--n", type=_int_list, default=[2, 4, 8], help="n list for the convergence table")
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--out", default=None)
    sp.add_argument("--format", choices=("csv",), default="csv")
    return p


def _config(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("out",)}
    return json.loads(json.dumps(cfg, default=str))


def _json_default(o):
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    if isinstance(o, int):
        return o
    return str(o)


def _clean(o):
    """Replace non-finite floats so the JSON stays standard."""
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, (float, np.floating)):
        f = float(o)
        return f if math.isfinite(f) else str(f)
    if isinstance(o, (np.integer, np.bool_)):
        return o.item()
    if isinstance(o, complex):
        return {"re": _clean(o.real), "im": _clean(o.imag)}
    if isinstance(o, int) and abs(o) > 2**53:
        return str(o)
    return o


def _dump_json(payload: dict, cfg: dict) -> str:
    doc = {"haartraces_version": __version__, "config": cfg, "result": payload}
    return json.dumps(_clean(doc), sort_keys=True, indent=2, default=_json_default) + "\n"


def _csv_text(header: list[str], rows, cfg: dict | None) -> str:
    buf = io.StringIO()
    if cfg is not None:
        buf.write(f"# haartraces {__version__} config={json.dumps(cfg, sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def _write(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def emit_convergence_series(kind, n_list, m: int = 2, grid=(8.0, 0.1), *, header: dict | None = None) -> str:
    """CSV rows ``(n, delta)`` of :func:`l2_distance_exact` along ``n_list``.

    Duplicates are removed and ``n`` sorted; an empty list yields the header
    only.
    """
    if m > 2:
        raise ValueError("convergence series needs m <= 2")
    radius, h = grid
    rows = []
    for n in sorted(set(int(x) for x in n_list)):
        rows.append((n, l2_distance_exact(group_spec(kind, n), m, radius=radius, h=h)))
    return _csv_text(["n", "delta"], rows, header)


def _moments_payload(spec, max_weight):
    entries = moment_identity_check(spec, max_weight)
    rows = [
        {"mult": {str(j): mj for j, mj in sorted(e.mult.items())}, "weight": e.weight, "group": e.group,
         "gaussian": e.gaussian, "in_range": e.in_range, "pass": e.passed}
        for e in entries
    ]
    bad = sum(1 for e in entries if e.in_range and not e.passed)
    return {"range": moment_range(spec), "entries": rows, "violations": bad}, bad


def _ball(rng, count, m, radius):
    d = rng.standard_normal((count, m))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return d * (radius * rng.uniform(0, 1, count) ** (1 / m))[:, None]


def _verify(args) -> tuple[dict, int]:
    suites = SUITES[:-1] if args.suite == "all" else (args.suite,)
    spec = group_spec(args.group, args.n)
    out, bad = {}, 0
    rng = np.random.default_rng(args.seed)
    for s in suites:
        if s == "moments":
            mw = args.max_weight or min(moment_range(spec), 8)
            out[s], v = _moments_payload(spec, mw)
        elif s == "basor-ehrhardt":
            count = args.count or 20
            res = []
            for case in (1, 2, 3, 4):
                for _ in range(count):
                    deg = int(rng.integers(0, 4))
                    b = rng.uniform(-0.5, 0.5, deg + 1) + 1j * rng.uniform(-0.5, 0.5, deg + 1)
                    b *= 0.5 / max(0.5, float(np.max(np.abs(b))))
                    res.append(verify_basor_ehrhardt(case, b, args.n))
            v = int(np.count_nonzero(np.asarray(res) > 1e-9))
            out[s] = {"trials": len(res), "max_residual": max(res), "violations": v}
        elif s == "charfn":
            count = args.count or 20
            diffs = [abs(char_fn_det(spec, x) - char_fn_fredholm(spec, x)) for x in _ball(rng, count, args.m, 2.0)]
            v = int(np.count_nonzero(np.asarray(diffs) > 1e-8))
            out[s] = {"trials": count, "max_diff": max(diffs), "violations": v}
        elif s == "pointwise":
            count = args.count or 1000
            lam1 = spec.num_angles / (2 * args.m * math.sqrt(math.log(args.m) + 1))
            rep = check_charfn_bounds(spec, _ball(rng, count, args.m, max(lam1, 8.0)))
            v = rep["violations"]
            out[s] = rep
        elif s == "lemmas":
            res = lemma_suite(args.count or 1000, args.seed)
            v = sum(r.violations for r in res.values())
            out[s] = {k: r.to_dict() for k, r in res.items()}
        elif s == "big-c":
            rows = big_c_table_check()
            v = sum(not r["pass"] for r in rows)
            out[s] = {"rows": rows, "violations": v}
        bad += v
    out["violations"] = bad
    return out, (EXIT_VIOLATION if bad else EXIT_OK)


def run(args) -> int:
    cfg = _config(args)
    cmd = args.command
    if cmd == "bounds":
        rep = theorem_bounds(args.m, args.n)
        if args.format == "csv":
            rows = [(b.name, b.applicable, b.log_value if b.applicable else "", b.gate)
                    for b in rep.l2_summands + [rep.l2_total, rep.tv] + list(rep.corollaries.values())
                    + list(rep.remarks.values())]
            _write(_csv_text(["name", "applicable", "log", "gate"], rows, cfg), args.out)
        else:
            _write(_dump_json(rep.to_dict(), cfg), args.out)
        return EXIT_OK
    if cmd == "moments":
        spec = group_spec(args.group, args.n)
        payload, bad = _moments_payload(spec, args.max_weight or moment_range(spec))
        if args.format == "csv":
            rows = [(json.dumps(e["mult"], sort_keys=True), e["weight"], e["group"], e["gaussian"],
                     e["in_range"], e["pass"]) for e in payload["entries"]]
            _write(_csv_text(["mult", "weight", "group", "gaussian", "in_range", "pass"], rows, cfg), args.out)
        else:
            _write(_dump_json(payload, cfg), args.out)
        return EXIT_VIOLATION if bad else EXIT_OK
    if cmd == "charfn":
        spec = group_spec(args.group, args.n)
        xi = args.xi
        if args.m is not None and len(xi) != args.m:
            raise UsageError(f"--xi has {len(xi)} entries but --m is {args.m}")
        det = char_fn_det(spec, xi, K=args.truncation)
        fred = char_fn_fredholm(spec, xi, K=args.truncation)
        payload = {"xi": xi, "det": det, "fredholm": fred, "value": det.real,
                   "abs_diff": abs(det - fred)}
        if args.format == "csv":
            _write(_csv_text(["route", "re", "im"], [("det", det.real, det.imag),
                                                     ("fredholm", fred.real, fred.imag)], cfg), args.out)
        else:
            _write(_dump_json(payload, cfg), args.out)
        return EXIT_OK
    if cmd == "sample":
        spec = group_spec(args.group, args.n)
        if args.count < 1:
            raise UsageError("--count must be >= 1")
        batch = sample_batch(spec, args.m, args.count, args.seed, workers=args.workers)
        cfg.pop("workers", None)  # output does not depend on the worker count
        if args.format == "json":
            payload = dict(batch.metadata(), xs=batch.xs.tolist())
            _write(_dump_json(payload, cfg), args.out)
            return EXIT_OK
        header = f"haartraces {__version__} config={json.dumps(cfg, sort_keys=True)}"
        if args.out is None:
            buf = io.StringIO()
            buf.write(f"# {header}\n")
            w = csv.writer(buf, lineterminator="\n")
            w.writerow([f"X{k}" for k in range(1, args.m + 1)])
            for row in batch.xs:
                w.writerow([repr(float(x)) for x in row])
            sys.stdout.write(buf.getvalue())
        else:
            batch.write_csv(args.out, header)
            batch.write_sidecar(args.out + ".json", {"haartraces_version": __version__, "config": cfg})
        return EXIT_OK
    if cmd == "verify":
        payload, code = _verify(args)
        _write(_dump_json(payload, cfg), args.out)
        return code
    if cmd == "report":
        if args.table == "big-c":
            rows = [(r["m"], r["computed"], r["tabulated"], r["pass"]) for r in big_c_table_check()]
            text = _csv_text(["m", "computed", "tabulated", "pass"], rows, cfg)
        elif args.table == "gates":
            rows = []
            for p, m_min in APPROX1_GATES:
                m = max(m_min, 4)
                rep = theorem_bounds(m, m**p)
                a1 = rep.corollaries["approx1_l2"]
                rows.append((p, m, a1.applicable, a1.log_value / math.log(10), maineq_vs_approx1(m, m**p)))
            text = _csv_text(["power", "m_min", "applicable", "approx1_log10", "log_ratio_total_to_approx1"],
                             rows, cfg)
        else:
            text = emit_convergence_series(args.group, args.n, args.m, header=cfg)
        _write(text, args.out)
        return EXIT_OK
    raise UsageError(f"unknown command {cmd}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return run(args)
    except ConvergenceError as exc:
        diag = {"error": "non-convergence", "message": str(exc), "values": [complex(v) for v in exc.values]}
        sys.stdout.write(_dump_json(diag, _config(args)))
        return EXIT_NONCONVERGENCE
    except (UsageError, ValueError) as exc:
        sys.stderr.write(f"haartraces: error: {exc}\n")
        return EXIT_USAGE
