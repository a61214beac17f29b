"""Command-line driver.

Exit codes: 0 for an answer (including "infeasible" / "separated"), 1 for
domain errors and failed verification, 2 when a resource cap is hit, 64 for
usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import certs
from .cones import member_C, member_D, member_O, member_Ostar
from .errors import CspolyError, ResourceCapExceeded
from .exact import DENOMINATOR_MODES, SymMatrix, format_rational
from .game import VARIANTS, coloring_certificate, lambda_kr, sweep
from .graphio import GraphFormatError, chromatic_number, load_graph, MAX_BRUTE_FORCE_VERTICES
from .gridgen import DEFAULT_MAX_TUPLES, enum_tuples
from .lpcore import DEFAULT_MAX_PIVOTS, LpProblem

EXIT_OK, EXIT_DOMAIN, EXIT_CAP, EXIT_USAGE = 0, 1, 2, 64

ENV_MAX_TUPLES = "CSPOLY_MAX_TUPLES"
ENV_MAX_PIVOTS = "CSPOLY_MAX_PIVOTS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunConfig:
    command: str
    params: dict[str, Any] = field(default_factory=dict)
    max_tuples: int = DEFAULT_MAX_TUPLES
    max_pivots: int = DEFAULT_MAX_PIVOTS
    output: str = "text"
    threads: int = 1

    def validate(self) -> None:
        for name in ("max_tuples", "max_pivots", "threads"):
            if getattr(self, name) < 1:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        for key, val in self.params.items():
            if key.endswith("_path") and val is not None and not os.path.isfile(val):
                raise UsageError(f"file not found: {val}")
        for key in ("n", "r", "k", "tmax", "t"):
            v = self.params.get(key)
            vals = v if isinstance(v, list) else [v]
            if any(x is not None and x < 1 for x in vals):
                raise UsageError(f"--{key} must be a positive integer")


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"environment variable {name} must be an integer, got {raw!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cspoly", description="Polyhedral approximations of the completely positive semidefinite cone.")
    p.add_argument("--max-tuples", type=int, default=None, help=f"grid size cap (env {ENV_MAX_TUPLES})")
    p.add_argument("--max-pivots", type=int, default=None, help=f"simplex pivot cap (env {ENV_MAX_PIVOTS})")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--mode", choices=DENOMINATOR_MODES, default="reduced", help="reading of 'denominator at most r'")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gridgen", help="enumerate tuples of small rational PSD matrices")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--count-only", action="store_true")
    g.add_argument("--emit", metavar="FILE.jsonl", help="write one tuple per line ('-' for stdout)")

    c = sub.add_parser("cone", help="membership in C_r, D_r, O_r, O_r*")
    c.add_argument("test", choices=["member-c", "member-d", "member-o", "member-ostar"])
    c.add_argument("--matrix", required=True, metavar="FILE", help="JSON matrix ({dim, upper} or list of rows)")
    c.add_argument("--r", type=int, required=True)
    c.add_argument("--json", action="store_true", help="print the certificate as JSON")
    c.add_argument("--find-min", action="store_true", help="member-d/member-o: report the grid minimum too")
    c.add_argument("--certificate-out", metavar="FILE")

    gm = sub.add_parser("game", help="coloring-game LP relaxations")
    gsub = gm.add_subparsers(dest="game_command", required=True, parser_class=_Parser)
    lam = gsub.add_parser("lambda", help="smallest feasible t")
    lam.add_argument("--graph", required=True, metavar="FILE")
    lam.add_argument("--k", type=int, required=True)
    lam.add_argument("--r", type=int, required=True)
    lam.add_argument("--tmax", type=int, required=True)
    lam.add_argument("--variant", choices=VARIANTS, default="q")
    lam.add_argument("--certificate-out", metavar="FILE")
    sw = gsub.add_parser("sweep", help="feasibility table over t, k, r (CSV)")
    sw.add_argument("--graph", required=True, metavar="FILE")
    sw.add_argument("--k", type=_int_list, required=True, metavar="K1,K2,...")
    sw.add_argument("--r", type=_int_list, required=True, metavar="R1,R2,...")
    sw.add_argument("--tmax", type=int, required=True)
    sw.add_argument("--variant", choices=VARIANTS, default="q")
    col = gsub.add_parser("coloring", help="certificate from a proper coloring (no enumeration)")
    col.add_argument("--graph", required=True, metavar="FILE")
    col.add_argument("--coloring", type=_int_list, required=True, metavar="C0,C1,...", help="0-based colors")
    col.add_argument("--t", type=int, default=None)
    col.add_argument("--k", type=int, required=True)
    col.add_argument("--r", type=int, default=None)
    col.add_argument("--certificate-out", metavar="FILE")

    gr = sub.add_parser("graph", help="graph utilities")
    grs = gr.add_subparsers(dest="graph_command", required=True, parser_class=_Parser)
    info = grs.add_parser("info")
    info.add_argument("file")
    info.add_argument("--json", action="store_true")

    v = sub.add_parser("verify", help="re-check a certificate")
    v.add_argument("certificate")
    v.add_argument("problem", nargs="?", default=None, help="matrix JSON, graph file, or LP JSON")
    return p


def _load_json(path: str) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _write_json(path: str, data: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def _dump(data: Any, out) -> None:
    out.write(json.dumps(data, indent=2) + "\n")


def _cmd_gridgen(cfg: RunConfig, out) -> int:
    grid = enum_tuples(cfg.params["n"], cfg.params["r"], cfg.params["mode"], cfg.max_tuples)
    if cfg.params["count_only"]:
        out.write(f"{grid.count}\n")
        return EXIT_OK
    grid.check_cap()
    emit = cfg.params.get("emit")
    if emit:
        fh = out if emit == "-" else open(emit, "w", encoding="utf-8")
        try:
            for t in grid:
                fh.write(json.dumps(t.to_json()) + "\n")
        finally:
            if fh is not out:
                fh.close()
        if emit != "-":
            out.write(f"{grid.emitted}\n")
    else:
        out.write(f"{sum(1 for _ in grid)}\n")
    return EXIT_OK


def _cmd_cone(cfg: RunConfig, out) -> int:
    p = cfg.params
    a = SymMatrix.from_json(_load_json(p["matrix_path"]))
    r, mode, test = p["r"], p["mode"], p["test"]
    if test == "member-c":
        res = member_C(a, r, mode, cfg.max_tuples)
        cert = certs.conic_certificate(test, a, r, res, mode)
    elif test == "member-ostar":
        res = member_Ostar(a, r)
        cert = certs.conic_certificate(test, a, r, res, mode)
    elif test == "member-d":
        res = member_D(a, r, mode, cfg.max_tuples, find_min=p["find_min"])
        cert = certs.dual_certificate(test, a, r, res, mode)
    else:
        res = member_O(a, r, find_min=p["find_min"])
        cert = certs.dual_certificate(test, a, r, res, mode)
    if p.get("certificate_out"):
        _write_json(p["certificate_out"], cert)
    if cfg.output == "json":
        _dump(cert, out)
    else:
        out.write(f"{cert['status']}\n")
        if "witness" in cert:
            out.write(f"value {cert['value']}\n")
            out.write(json.dumps(cert["witness"]) + "\n")
        if "separator" in cert:
            out.write("separator " + json.dumps(cert["separator"]["upper"]) + "\n")
        if "min_value" in cert:
            out.write(f"min {cert['min_value']}\n")
    return EXIT_OK


def _cmd_game(cfg: RunConfig, out) -> int:
    p = cfg.params
    g = load_graph(p["graph_path"])
    mode = p["mode"]
    sub = p["game_command"]
    if sub == "lambda":
        res = lambda_kr(g, p["k"], p["r"], p["tmax"], p["variant"], mode, cfg.max_tuples, cfg.max_pivots)
        path = p.get("certificate_out")
        if path:
            _write_json(path, certs.game_certificate(res, mode))
        _dump({"schema": certs.SCHEMA, "t": res.t, "status": res.status, "certificate_path": path}, out)
        return EXIT_OK
    if sub == "sweep":
        results = sweep(g, p["k"], p["r"], p["tmax"], p["variant"], mode, cfg.max_tuples, cfg.threads)
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["variant", "k", "r", "t", "feasible"])
        for res in results:
            for cell in res.cells:
                w.writerow([res.variant, res.k, res.r, cell.t, "yes" if cell.feasible else "no"])
        return EXIT_OK
    coloring = p["coloring"]
    t = p["t"] if p["t"] is not None else max(coloring) + 1
    cell = coloring_certificate(g, coloring, t, p["k"], p["r"])
    cert = certs.cell_certificate(cell, mode)
    path = p.get("certificate_out")
    if path:
        _write_json(path, cert)
    _dump({"schema": certs.SCHEMA, "t": t, "r": cell.r, "status": "feasible", "certificate_path": path}, out)
    return EXIT_OK


def _cmd_graph(cfg: RunConfig, out) -> int:
    g = load_graph(cfg.params["file_path"])
    degrees = [len(g.neighbors(u)) for u in range(g.n)]
    chi = chromatic_number(g) if g.n <= MAX_BRUTE_FORCE_VERTICES else None
    info = {"n": g.n, "m": g.m, "max_degree": max(degrees), "chromatic_number": chi}
    if cfg.output == "json":
        _dump(info, out)
    else:
        for key, val in info.items():
            out.write(f"{key} {val if val is not None else '-'}\n")
    return EXIT_OK


def _load_problem(path: str | None, kind: str):
    if path is None:
        return None
    if kind in ("game", "game-cell"):
        return load_graph(path)
    data = _load_json(path)
    if kind == "lp":
        return LpProblem.from_json(data)
    return SymMatrix.from_json(data)


def _cmd_verify(cfg: RunConfig, out) -> int:
    cert = _load_json(cfg.params["certificate_path"])
    problem = _load_problem(cfg.params.get("problem_path"), cert.get("kind"))
    ok = certs.verify(cert, problem, cfg.max_tuples)
    out.write("valid\n" if ok else "invalid\n")
    return EXIT_OK if ok else EXIT_DOMAIN


def make_config(args: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(args).items() if k not in ("max_tuples", "max_pivots", "threads", "verbose", "json")}
    for old, new in (("matrix", "matrix_path"), ("graph", "graph_path"), ("file", "file_path"), ("certificate", "certificate_path"), ("problem", "problem_path")):
        if old in params:
            params[new] = params.pop(old)
    cfg = RunConfig(
        command=args.command,
        params=params,
        max_tuples=args.max_tuples if args.max_tuples is not None else _env_int(ENV_MAX_TUPLES, DEFAULT_MAX_TUPLES),
        max_pivots=args.max_pivots if args.max_pivots is not None else _env_int(ENV_MAX_PIVOTS, DEFAULT_MAX_PIVOTS),
        output="json" if getattr(args, "json", False) else "text",
        threads=args.threads,
    )
    cfg.validate()
    return cfg


_COMMANDS = {
    "gridgen": _cmd_gridgen,
    "cone": _cmd_cone,
    "game": _cmd_game,
    "graph": _cmd_graph,
    "verify": _cmd_verify,
}


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=err)
        cfg = make_config(args)
        return _COMMANDS[cfg.command](cfg, out)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_USAGE
    except ResourceCapExceeded as exc:
        err.write(f"resource cap exceeded: {exc}\n")
        return EXIT_CAP
    except (CspolyError, GraphFormatError, certs.CertificateError, ValueError, KeyError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
