"""Command-line front end.

Reports are JSON on stdout; diagnostics are JSON on stderr.  Exit codes:
0 success, 1 input or validation error, 2 undefined quantity, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from typing import Sequence

from . import __version__, classify as cl, measures as ms, oracle, sensitivity as sn
from .errors import BiasBoundError, UndefinedQuantityError, UsageError
from .io import InputDocument, dumps, parse_input

SCHEMA_VERSION = "1.0"
SEED_ENV = "BIASBOUND_SEED"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer",
                         code="bad_seed", field=SEED_ENV) from None


def load_schema() -> dict:
    """The published JSON schema every report validates against."""
    text = resources.files(__package__).joinpath("report_schema.json").read_text()
    return json.loads(text)


def _report(command: str, **body) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, **body}


def _read_input(args) -> InputDocument:
    if args.input is None:
        return InputDocument()
    if args.input == "-":
        data = sys.stdin.buffer.read()
    else:
        try:
            with open(args.input, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {args.input}: {exc.strerror}",
                             code="unreadable_input", field="input") from None
    fmt = args.format
    if fmt is None:
        fmt = "csv" if str(args.input).lower().endswith(".csv") else "json"
    return parse_input(data, fmt, default_block=args.block)


def _try(fn, *a):
    try:
        return fn(*a)
    except UndefinedQuantityError:
        return None


# -- subcommands -------------------------------------------------------------

def _measures_body(doc: InputDocument, scale: cl.Scale | None) -> dict:
    body: dict = {}
    if doc.target is not None:
        t = doc.target
        body["target"] = {"or": _try(ms.true_or, t), "rr": _try(ms.risk_ratio, t),
                          "rd": _try(ms.risk_difference, t)}
    if doc.selection is not None:
        s = doc.selection
        if scale is cl.Scale.ODDS_RATIO:
            ms.inter_or(s)
        elif scale is cl.Scale.RISK_RATIO:
            ms.inter_rr(s)
        summary = ms.interactions(s)
        body["interaction"] = {"inter_rr": summary.inter_rr,
                               "inter_or": summary.inter_or,
                               "inter_rd": summary.inter_rd}
        body["logistic"] = _try(lambda: ms.fit_logistic(s)._asdict())
        body["linear"] = ms.fit_linear(s)._asdict()
        body["collapsible"] = ms.is_collapsible(s)
        if doc.target is not None:
            sj = ms.selected_joint(doc.target, s)
            body["selected"] = {"joint": list(sj.cells()),
                                "or": _try(ms.true_or, sj),
                                "rr": _try(ms.risk_ratio, sj),
                                "rd": _try(ms.risk_difference, sj)}
            dec = ms.decomposition(doc.target, s)
            body["decomposition"] = {**dec._asdict(), "residual": dec.residual}
    return body


def cmd_measures(args) -> tuple[dict, int]:
    doc = _read_input(args)
    scale = cl.parse_scale(args.scale) if args.scale else None
    if doc.target is None and doc.selection is None and not doc.strata:
        doc.require("selection", command="measures")
    body = _measures_body(doc, scale)
    if doc.strata:
        body["strata"] = [{"label": s.label, **_measures_body(s, scale)}
                          for s in doc.strata]
    return _report("measures", **body), 0


def _verdict_entry(label, verdict: cl.BoundVerdict) -> dict:
    out = verdict.to_dict()
    if label is not None:
        out["label"] = label
    return out


def cmd_classify(args) -> tuple[dict, int]:
    doc = _read_input(args)
    numeric = args.scale is not None
    if numeric:
        if doc.selection is None and not any(s.selection for s in doc.strata):
            doc.require("selection", command="classify --scale")
        entries = []
        if doc.selection is not None:
            entries.append((None, doc.target, doc.selection))
        entries += [(s.label, s.target, s.selection) for s in doc.strata
                    if s.selection is not None]
        verdicts = [_verdict_entry(label, cl.classify_numeric(t, s, args.scale, args.tol))
                    for label, t, s in entries]
        mode = "numeric"
    else:
        if doc.assumptions is None and not any(s.assumptions for s in doc.strata):
            raise UsageError("classify needs an 'assumptions' block, or a "
                             "'selection' block together with --scale",
                             code="missing_block", field="assumptions")
        verdicts = []
        if doc.assumptions is not None:
            verdicts.append(_verdict_entry(None, cl.classify(doc.assumptions)))
        strata = [(s.label, s.assumptions) for s in doc.strata
                  if s.assumptions is not None]
        if strata:
            verdicts += [_verdict_entry(label, v)
                         for label, v in cl.stratified_classify(strata)]
        mode = "assumptions"
    return _report("classify", mode=mode, verdicts=verdicts), 0


def _estimate(args, doc: InputDocument) -> sn.IntervalEstimate:
    if args.point is not None:
        lo = args.lo if args.lo is not None else args.point
        hi = args.hi if args.hi is not None else args.point
        return sn.IntervalEstimate(args.point, lo, hi, args.level)
    if doc.counts is None:
        raise UsageError("adjust needs --point or a 'counts' block",
                         code="missing_block", field="counts")
    return sn.woolf_ci(doc.counts, args.level, args.continuity_correction)


def cmd_adjust(args) -> tuple[dict, int]:
    doc = _read_input(args)
    est = _estimate(args, doc)
    if args.inter_rr is not None and args.inter_rr_range is not None:
        raise UsageError("give either --inter-rr or --inter-rr-range",
                         code="conflicting_flags")
    if args.inter_rr is not None:
        rng = (args.inter_rr, args.inter_rr)
    elif args.inter_rr_range is not None:
        rng = tuple(args.inter_rr_range)
    else:
        rng = None
    body = {"estimate": est.to_dict()}
    if rng is not None:
        adj = sn.adjust_interval(est, rng)
        body["inter_rr_range"] = list(rng)
        body["adjusted"] = adj._asdict()
    if doc.assumptions is not None:
        verdict = cl.classify(doc.assumptions)
        body["bound"] = sn.bound_report(est, verdict)
    if rng is None and "bound" not in body:
        raise UsageError("adjust needs --inter-rr, --inter-rr-range or an "
                         "'assumptions' block", code="missing_block",
                         field="inter_rr")
    return _report("adjust", **body), 0


def cmd_verify(args) -> tuple[dict, int]:
    seed = args.seed if args.seed is not None else _default_seed()
    ids = oracle.RESULT_IDS if args.result == "all" else (args.result,)
    reports = []
    for rid in ids:
        cfg = oracle.SamplerConfig(mode=args.mode, count=args.n,
                                   resolution=args.resolution, seed=seed,
                                   constraint="none" if args.unconstrained else rid,
                                   tol=args.tol, workers=args.workers)
        reports.append(oracle.verify_result(rid, cfg).to_dict())
    failed = any(r["violations"] for r in reports)
    report = _report("verify", mode=args.mode, seed=seed, reports=reports,
                     passed=not failed)
    return report, 3 if failed else 0


def cmd_simulate(args) -> tuple[dict, int]:
    doc = _read_input(args)
    doc.require("target", "selection", command="simulate")
    seed = args.seed if args.seed is not None else _default_seed()
    sim = oracle.simulate_study(doc.target, doc.selection, args.n, seed)
    dec = ms.decomposition(doc.target, doc.selection)
    return _report("simulate", n=args.n, seed=seed,
                   counts_by_eds=sim.counts.tolist(),
                   selected_counts=list(sim.selected_counts()),
                   empirical_selected_or=sim.empirical_selected_or,
                   population_selected_or=dec.or_sel), 0


def cmd_recode(args) -> tuple[dict, int]:
    doc = _read_input(args)
    which = args.which.upper()

    def _recode(obj):
        if obj.target is not None:
            obj.target = cl.recode(obj.target, which)
        if obj.selection is not None:
            obj.selection = cl.recode(obj.selection, which)
        if obj.counts is not None:
            obj.counts = cl.recode(obj.counts, which)
        if obj.assumptions is not None:
            obj.assumptions = cl.recode_assumptions(obj.assumptions, which)

    _recode(doc)
    for s in doc.strata:
        _recode(s)
    return _report("recode", which=which, document=doc.to_dict()), 0


COMMANDS = {"measures": cmd_measures, "classify": cmd_classify,
            "adjust": cmd_adjust, "verify": cmd_verify,
            "simulate": cmd_simulate, "recode": cmd_recode}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="biasbound",
        description="Direction and size of selection bias in the odds ratio.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def with_input(sp):
        sp.add_argument("input", nargs="?", help="input file, or - for stdin")
        sp.add_argument("--format", choices=("json", "csv"),
                        help="input format (default: by extension, else json)")
        sp.add_argument("--block", default="selection",
                        choices=("target", "selection", "counts"),
                        help="block for csv rows without a 'block' column")
        return sp

    sp = with_input(sub.add_parser("measures", help="association and interaction measures"))
    sp.add_argument("--scale", help="require the interaction on this scale (rr, or, rd)")

    sp = with_input(sub.add_parser("classify", help="bound verdict"))
    sp.add_argument("--scale", help="classify the selection block numerically on this scale")
    sp.add_argument("--tol", type=float, default=cl.DEFAULT_TOL)

    sp = with_input(sub.add_parser("adjust", help="sensitivity adjustment by Inter_RR"))
    sp.add_argument("--point", type=float)
    sp.add_argument("--lo", type=float)
    sp.add_argument("--hi", type=float)
    sp.add_argument("--level", type=float, default=0.95)
    sp.add_argument("--continuity-correction", action="store_true")
    sp.add_argument("--inter-rr", type=float)
    sp.add_argument("--inter-rr-range", type=float, nargs=2, metavar=("LO", "HI"))

    sp = sub.add_parser("verify", help="brute-force check of the bound results")
    sp.add_argument("--result", default="all",
                    choices=("all",) + oracle.RESULT_IDS)
    sp.add_argument("--n", type=int, default=100_000)
    sp.add_argument("--seed", type=int, help=f"default: ${SEED_ENV} or 0")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--mode", choices=("uniform", "grid"), default="uniform")
    sp.add_argument("--resolution", type=int, default=9)
    sp.add_argument("--tol", type=float, default=oracle.DEFAULT_TOL)
    sp.add_argument("--unconstrained", action="store_true",
                    help="sample without constraints and check only the "
                         "models meeting the hypotheses")

    sp = with_input(sub.add_parser("simulate", help="finite-sample study simulation"))
    sp.add_argument("--n", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int, help=f"default: ${SEED_ENV} or 0")

    sp = with_input(sub.add_parser("recode", help="relabel E or D"))
    sp.add_argument("--which", required=True, type=str.upper, choices=("E", "D"))
    return p


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; map onto the input-error code
        return 0 if exc.code == 0 else 1
    try:
        report, code = COMMANDS[args.command](args)
    except BiasBoundError as exc:
        diag = exc.to_dict() if hasattr(exc, "to_dict") else \
            {"code": exc.code, "message": str(exc)}
        stderr.write(dumps({"schema_version": SCHEMA_VERSION, "error": diag}) + "\n")
        return exc.exit_code
    stdout.write(dumps(report) + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
