"""Command-line entry point.

Exit codes: 0 on success, 1 on a typed scenario error or a failed
time-symmetry check, 2 on usage or file errors.
"""

import argparse
import json
import sys

from .errors import ParseError, PPSEError
from .scenario import build, builtin, builtin_names, parse, render, run
from .scenario.runner import CHECK_TOL, default_tol
from .timesym import ProcessTag, reverse_ppse


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _source(p, batch=False):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--builtin", metavar="NAME", help="scenario from the catalog")
    src.add_argument("--file", metavar="PATH", help="scenario text file")
    if batch:
        src.add_argument("--all-builtins", action="store_true", help="every catalog scenario")


def make_parser():
    p = _Parser(prog="ppse", description="Pre- and post-selected ensemble calculator.")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run a scenario and print its report")
    _source(r, batch=True)
    r.add_argument("--format", choices=("table", "json", "csv"), default="table")
    r.add_argument("--tol", type=float, help="numerical tolerance (default: PPSE_TOL or 1e-10)")
    r.add_argument("--processes", help="comma-separated time-symmetry processes, e.g. ii,iii")

    c = sub.add_parser("check-timesym", help="compare reverse-time weights with forward ones")
    _source(c)
    c.add_argument("--format", choices=("table", "json"), default="table")
    c.add_argument("--tol", type=float, help="pass/fail tolerance (default: PPSE_TOL or 1e-9)")
    c.add_argument("--processes", help="comma-separated processes (default: all of row one)")

    sub.add_parser("list-builtins", help="list catalog scenario names")

    rb = sub.add_parser("render-builtin", help="print a catalog scenario as text")
    rb.add_argument("name")

    v = sub.add_parser("validate", help="parse and check a scenario without running it")
    _source(v)
    return p


def _load(args):
    if getattr(args, "builtin", None):
        return builtin(args.builtin)
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror or exc}") from None
    return parse(text)


def _processes(raw):
    if raw is None:
        return None
    try:
        return tuple(ProcessTag(p.strip()) for p in raw.split(",") if p.strip())
    except ValueError:
        raise UsageError(f"bad process list {raw!r}; use i, ii, ..., viii") from None


def cmd_run(args, out):
    procs = _processes(args.processes)
    if args.all_builtins:
        reports = [run(builtin(n), args.tol, procs) for n in builtin_names()]
    else:
        reports = [run(_load(args), args.tol, procs)]
    if args.format == "json":
        body = reports[0].to_dict() if len(reports) == 1 else {r.name: r.to_dict() for r in reports}
        out.write(json.dumps(body, indent=2) + "\n")
    elif args.format == "csv" and len(reports) > 1:
        out.write("scenario,kind,key,probability\n")
        for r in reports:
            out.write("".join(f"{r.name},{k},{key},{v!r}\n" for k, key, v in r.csv_rows()))
    else:
        out.write("\n".join(r.format(args.format) for r in reports))
    return 0


def cmd_check_timesym(args, out):
    spec = _load(args)
    built = build(spec, args.tol)
    exp = built.experiment
    tol = args.tol if args.tol is not None else max(CHECK_TOL, default_tol())
    procs = _processes(args.processes)
    if procs is None:
        procs = (ProcessTag.II,) if exp.theta is None else (ProcessTag.II, ProcessTag.III, ProcessTag.IV)
    procs = tuple(p for p in procs if p is not ProcessTag.I)
    rep = reverse_ppse(exp, procs)
    rows = []
    for p in procs:
        dev = rep.deviation(p)
        verdict = ("PASS" if dev <= tol else "FAIL") if p.row == 1 else "info"
        rows.append((p.value, dev, verdict))
    ok = all(v != "FAIL" for _, _, v in rows) and rep.recovered_initial is not False
    if args.format == "json":
        body = {
            "scenario": spec.name,
            "tolerance": tol,
            "probabilities": {str(k): v for k, v in rep.probabilities.items()},
            "forward_weights": [float(w) for w in rep.forward_weights],
            "processes": {p: {"deviation": d, "verdict": v} for p, d, v in rows},
            "motion_reversal": rep.motion_reversal,
            "recovered_initial": rep.recovered_initial,
            "result": "PASS" if ok else "FAIL",
        }
        out.write(json.dumps(body, indent=2) + "\n")
    else:
        out.write(f"scenario {spec.name}\n")
        for k, v in rep.probabilities.items():
            out.write(f"Prob[k={k}] = {v:.6f}\n")
        for p, d, v in rows:
            out.write(f"process ({p}){'':<{6 - len(p)}}deviation {d:.3e}  {v}\n")
        if rep.motion_reversal is not None:
            out.write(f"motion reversal holds: {'yes' if rep.motion_reversal else 'no'}\n")
        if rep.recovered_initial is not None:
            out.write(f"initial state recovered: {'yes' if rep.recovered_initial else 'no'}\n")
        out.write(("PASS" if ok else "FAIL") + "\n")
    return 0 if ok else 1


def cmd_validate(args, out):
    spec = _load(args)
    built = build(spec)
    out.write(f"ok: {spec.name} (dim {spec.dim}, {built.experiment.model.mode.value})\n")
    for w in built.warnings:
        out.write(f"warning: {w}\n")
    return 0


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = make_parser().parse_args(argv)
        if args.verb == "list-builtins":
            out.write("\n".join(builtin_names()) + "\n")
            return 0
        if args.verb == "render-builtin":
            out.write(render(builtin(args.name)))
            return 0
        handler = {"run": cmd_run, "check-timesym": cmd_check_timesym, "validate": cmd_validate}
        return handler[args.verb](args, out)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return 2
    except PPSEError as exc:
        stage = f" [{exc.stage}]" if exc.stage else ""
        msg = str(exc) if isinstance(exc, ParseError) else exc.message
        err.write(f"error{stage} {type(exc).__name__}: {msg}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
