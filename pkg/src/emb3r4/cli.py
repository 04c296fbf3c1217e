"""Command-line front end.

Every subcommand writes JSON records carrying ``schema_version``.  A header
record holds the timestamp and any wall-clock timings, so report bodies
are identical across runs with the same inputs and seed.

Exit codes: 0 all embeddable or all checks passed, 2 something not
embeddable, 3 inconclusive points present, 1 errors or failed checks.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import logging
import sys
from fractions import Fraction
from typing import List, Optional

from . import __version__
from .embed import DEFAULT_TOL, Status
from .errors import ConfigError, Emb3r4Error

SCHEMA_VERSION = 1
log = logging.getLogger("emb3r4")


class Sink:
    """Serializes records to one output in jsonl, json or csv-summary form."""

    def __init__(self, path: Optional[str], fmt: str, command: str):
        self.path = path
        self.fmt = fmt
        self.command = command
        self.body: List[dict] = []
        self.timings: dict = {}
        self._fh = None
        self._streamed_header = False

    def _out(self):
        if self._fh is None:
            self._fh = open(self.path, "w", encoding="utf-8") if self.path else sys.stdout
        return self._fh

    def header(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "record": "header", "command": self.command,
                "version": __version__,
                "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
                "timings": self.timings}

    def emit(self, rec: dict, stream: bool = False) -> None:
        rec = {"schema_version": SCHEMA_VERSION, **rec}
        if stream and self.fmt == "jsonl":
            fh = self._out()
            if not self._streamed_header:
                fh.write(json.dumps(self.header()) + "\n")
                self._streamed_header = True
            fh.write(json.dumps(rec) + "\n")
            return
        self.body.append(rec)

    def close(self) -> None:
        fh = self._out()
        if self.fmt == "jsonl":
            if not self._streamed_header:
                fh.write(json.dumps(self.header()) + "\n")
            for rec in self.body:
                fh.write(json.dumps(rec) + "\n")
        elif self.fmt == "json":
            json.dump({"header": self.header(), "records": self.body}, fh, indent=1)
            fh.write("\n")
        else:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["record", "key", "value"])
            for rec in self.body:
                if rec.get("record") == "point":
                    label = rec.get("verdict", {}).get("label") if "verdict" in rec else rec.get("status")
                    w.writerow(["point", ";".join(f"{x:g}" for x in rec["point"]),
                                label or rec.get("error", "")])
                    continue
                for k, v in rec.items():
                    if k in ("schema_version", "record") or isinstance(v, (dict, list)):
                        continue
                    w.writerow([rec.get("record", ""), k, v])
                if isinstance(rec.get("labels"), dict):
                    for k, v in rec["labels"].items():
                        w.writerow([rec.get("record", ""), f"labels.{k}", v])
            fh.write(buf.getvalue())
        if fh is not sys.stdout:
            fh.close()
        else:
            fh.flush()


def _tolerances(args, base=DEFAULT_TOL):
    return base.replace(tau_nd=args.tol_nd, tau_rivertz=args.tol_rivertz, tau_gauss=args.tol_gauss,
                        tau_codazzi=args.tol_codazzi, tau_flat=args.tol_flat,
                        consistency=args.tol_consistency)


def parse_region(text: str, coords=("x1", "x2", "x3")):
    """'x1:lo:hi,x2:lo:hi,x3:lo:hi' -> (lo, hi)."""
    lo, hi = {}, {}
    for part in text.split(","):
        bits = part.strip().split(":")
        if len(bits) != 3 or bits[0] not in coords:
            raise ConfigError(f"bad region entry {part!r}; expected name:lo:hi")
        try:
            lo[bits[0]], hi[bits[0]] = float(bits[1]), float(bits[2])
        except ValueError:
            raise ConfigError(f"bad number in region entry {part!r}") from None
    missing = [c for c in coords if c not in lo]
    if missing:
        raise ConfigError(f"region misses {missing}")
    return [lo[c] for c in coords], [hi[c] for c in coords]


def _scalar(text: str):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        return float(text)


# subcommands

def cmd_check(args, sink: Sink) -> int:
    from .geometry.chart import CONVENTION_ALIASES, MetricChart, exit_code, load_metric_config, scan
    cfg = load_metric_config(args.metric)
    chart: MetricChart = cfg["chart"]
    if args.convention:
        chart.convention = CONVENTION_ALIASES.get(args.convention, args.convention)
    if args.derivative:
        chart.derivative_mode = args.derivative
    lo, hi = cfg["lo"], cfg["hi"]
    if args.region:
        lo, hi = parse_region(args.region, chart.coords)
    n = args.grid or cfg["grid"]
    c = _scalar(str(args.ambient_c)) if args.ambient_c is not None else _scalar(str(cfg["ambient_c"]))
    tol = _tolerances(args, cfg["tolerances"])
    reports, agg = scan(chart, lo, hi, n, tol, c)
    for r in reports:
        sink.emit(r.to_json(), stream=True)
    sink.emit(agg)
    return exit_code(agg)


def _load_json(path: str) -> dict:
    from .geometry.chart import _parse_json
    with open(path, encoding="utf-8") as fh:
        return _parse_json(fh.read(), path)


def _status_exit(statuses) -> int:
    statuses = set(statuses)
    if Status.NOT_EMBEDDABLE.value in statuses:
        return 2
    if Status.INCONCLUSIVE.value in statuses:
        return 3
    return 0 if statuses else 1


def cmd_warped(args, sink: Sink) -> int:
    from . import warped as W
    cfg = _load_json(args.config)
    consts = cfg.get("constants", {})
    region = cfg.get("region", {})
    lo = [float(v) for v in region.get("min", [0, 0, 0])]
    hi = [float(v) for v in region.get("max", [1, 1, 1])]
    if args.region:
        lo, hi = parse_region(args.region)
    n = args.grid or int(cfg.get("grid", 5))
    check = cfg.get("check", {})
    tol = _tolerances(args)
    kind = cfg.get("type")
    if kind == 1:
        fib = cfg.get("fiber", {})
        w = W.WarpedType1.from_strings(cfg["f"], fib.get("E", "1"), fib.get("F", "0"), fib.get("G", "1"), consts)
        points, summary = W.type1_check(w, lo, hi, n, tol)
    elif kind == 2:
        base = cfg.get("base", {})
        w = W.WarpedType2.from_strings(cfg["f"], base.get("E", "1"), base.get("F", "0"), base.get("G", "1"), consts)
        c = check.get("c")
        points, summary = W.type2_check(w, lo, hi, n, c=c, ma_tol=float(check.get("tol", 1e-8)), tol=tol)
    else:
        raise ConfigError("warped config needs \"type\": 1 or 2")
    for p in points:
        sink.emit(p.to_json(), stream=True)
    sink.emit(summary)
    return _status_exit(summary["statuses"])


def cmd_lie(args, sink: Sink) -> int:
    from . import liegroup as L
    if args.lie_cmd == "classify":
        p = L.SolvableParams(*(_scalar(v) for v in (args.a, args.b, args.c, args.d)))
        res = L.classify_solvable(p, _tolerances(args))
        sink.emit(res.to_json())
        return _status_exit([res.verdict.status.value])
    if args.lie_cmd == "sweep":
        results = L.catalog_sweep(_tolerances(args))
        for r in results:
            sink.emit(r.to_json())
        lat = L.lattice_check()
        sink.emit(lat)
        ok = all(r.matches for r in results) and lat["disagreements"] == 0 and lat["identity_failures"] == 0
        sink.emit({"record": "aggregate", "entries": len(results),
                   "mismatches": sum(not r.matches for r in results), "passed": ok})
        return 0 if ok else 1
    if args.lie_cmd == "simple":
        p = L.SimpleParams(_scalar(args.l2), _scalar(args.l3), _scalar(args.mu1))
        rec = L.simple_report(p, _tolerances(args))
        sink.emit(rec)
        return _status_exit([rec["verdict"]["status"]])
    if args.lie_cmd == "galpha":
        alpha = _scalar(args.alpha)
        region = parse_region(args.region) if args.region else None
        phi, info = L.g_alpha_embedding(alpha, None if args.k is None else float(args.k), region)
        lo, hi = info["region"]
        res = phi.pullback_residual(L.g_alpha_chart(alpha), lo, hi, args.grid or 9)
        ok = res <= 1e-9
        sink.emit({"record": "galpha", **info, "target_dim": phi.target_dim, "pullback_residual": res,
                   "passed": ok})
        return 0 if ok else 1
    raise ConfigError(f"unknown lie subcommand {args.lie_cmd}")


def cmd_verify_identities(args, sink: Sink) -> int:
    from .symbolic import run_identities
    from .symbolic.identities import IDENTITIES, _register
    if args.list:
        if not IDENTITIES:
            _register()
        for name in IDENTITIES:
            sink.emit({"record": "identity_name", "identity_name": name})
        return 0
    only = [s for item in (args.only or []) for s in item.split(",") if s]
    reports = run_identities(only or None, self_test=args.self_test)
    total = 0.0
    for rec in reports:
        ms = rec.pop("wall_time_ms")
        sink.timings[rec["identity_name"]] = ms
        total += ms
        sink.emit({"record": "identity", **rec})
    sink.timings["total_ms"] = round(total, 1)
    passed = all(r["status"] == "pass" for r in reports)
    sink.emit({"record": "aggregate", "identities": len(reports),
               "failed": sum(r["status"] != "pass" for r in reports), "passed": passed,
               "self_test": bool(args.self_test)})
    return 0 if passed else 1


def cmd_oracle(args, sink: Sink) -> int:
    from . import oracle as O
    if args.replay:
        rec = O.replay(args.replay)
        sink.emit(rec)
        return 0 if rec["passed"] else 1
    if args.trials == 0:
        log.warning("zero trials requested; the suite passes vacuously")
    suites = ["roundtrip", "negative"] if args.suite == "all" else [args.suite]
    ok = True
    for s in suites:
        run = O.run_roundtrip if s == "roundtrip" else O.run_negative
        rec = run(args.seed, args.trials, dump=args.dump)
        sink.timings[s + "_s"] = rec.pop("wall_time_s")
        sink.emit(rec)
        ok = ok and rec["passed"]
    if "negative" in suites and args.trials:
        rec = O.negative_symbolic()
        sink.emit(rec)
        ok = ok and rec["passed"]
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("jsonl", "json", "csv-summary"), default="jsonl")
    common.add_argument("--grid", type=int, help="points per axis")
    common.add_argument("--region", help='box as "x1:lo:hi,x2:lo:hi,x3:lo:hi"')
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--trials", type=int, default=1000)
    common.add_argument("-v", "--verbose", action="store_true")
    for name in ("nd", "rivertz", "gauss", "codazzi", "flat", "consistency"):
        common.add_argument(f"--tol-{name}", type=float, dest=f"tol_{name}")

    p = argparse.ArgumentParser(prog="emb3r4", description="Local isometric embeddability of 3-manifolds in R^4.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="scan a metric chart")
    c.add_argument("--metric", required=True, metavar="PATH")
    c.add_argument("--ambient-c", type=str, dest="ambient_c")
    c.add_argument("--convention", choices=("standard", "paper", "negated"))
    c.add_argument("--derivative", choices=("exact", "fd"))

    w = sub.add_parser("warped", parents=[common], help="warped-product criteria")
    w.add_argument("--config", required=True, metavar="PATH")

    lie = sub.add_parser("lie", help="left-invariant metrics")
    lsub = lie.add_subparsers(dest="lie_cmd", required=True)
    lc = lsub.add_parser("classify", parents=[common])
    for k in "abcd":
        lc.add_argument(f"--{k}", required=True)
    lsub.add_parser("sweep", parents=[common])
    ls = lsub.add_parser("simple", parents=[common])
    ls.add_argument("--l2", required=True)
    ls.add_argument("--l3", required=True)
    ls.add_argument("--mu1", default="1", help="coefficient of e1 in [e2, e3] (default 1)")
    lg = lsub.add_parser("galpha", parents=[common])
    lg.add_argument("--alpha", required=True)
    lg.add_argument("--k")

    v = sub.add_parser("verify-identities", parents=[common], help="exact identity suite")
    v.add_argument("--only", action="append", help="identity name (repeatable or comma separated)")
    v.add_argument("--self-test", action="store_true", help="flip one coefficient per identity")
    v.add_argument("--list", action="store_true")

    o = sub.add_parser("oracle", parents=[common], help="randomized exact suites")
    o.add_argument("--suite", choices=("roundtrip", "negative", "all"), default="all")
    o.add_argument("--replay", metavar="PATH")
    o.add_argument("--dump", metavar="PATH", help="write the first failing trial here")
    return p


COMMANDS = {"check": cmd_check, "warped": cmd_warped, "lie": cmd_lie,
            "verify-identities": cmd_verify_identities, "oracle": cmd_oracle}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    sink = Sink(args.json, args.format, args.command)
    try:
        code = COMMANDS[args.command](args, sink)
    except (Emb3r4Error, KeyError, OSError, ValueError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        sink.emit({"record": "error", "error": type(exc).__name__, "message": str(exc)})
        code = 1
    sink.close()
    return code


if __name__ == "__main__":
    sys.exit(main())
