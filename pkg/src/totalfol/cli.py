"""Batch command line: invariants, plans, verification and the block catalog.

Exit codes: 0 pass, 1 verification failure, 2 precondition failure,
3 parse error.  Output is JSON unless ``--human`` is given.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from typing import Sequence

from . import braidlink as bl
from . import folblocks, planner

EXIT_OK, EXIT_FAIL, EXIT_PRECONDITION, EXIT_PARSE = 0, 1, 2, 3


class CommandConfig(argparse.Namespace):
    """Parsed flags; validated by ``check``."""

    def check(self) -> None:
        if getattr(self, "grid", 8) < 8:
            raise ValueError("grid size must be at least 8")
        if getattr(self, "tol", 1.0) <= 0:
            raise ValueError("tolerance must be positive")


def _emit(payload, args, human_lines: Sequence[str] | None = None) -> None:
    if getattr(args, "human", False) and human_lines is not None:
        text = "\n".join(human_lines) + "\n"
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    out = getattr(args, "output", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _error(kind: str, message: str, code: int, **extra) -> int:
    record = {"error": kind, "message": message, **extra}
    sys.stderr.write(json.dumps(record, sort_keys=True) + "\n")
    return code


def _load(path):
    try:
        return bl.load_braid_file(path)
    except bl.BraidFileError as exc:
        raise _ParseFailure(exc) from None


class _ParseFailure(Exception):
    def __init__(self, exc: bl.BraidFileError):
        super().__init__(str(exc))
        self.exc = exc


# --- subcommands --------------------------------------------------------------

def cmd_invariants(args) -> int:
    word, _, _ = _load(args.braid)
    link = bl.close(word)
    try:
        parity = {p.label: p for p in bl.parity_check(link)}
    except bl.ParityViolation as exc:
        return _error("ParityViolation", str(exc), EXIT_FAIL)
    labels = link.labels()
    rows = []
    for c in link.components:
        p = parity[c.label]
        rows.append({
            "component": c.label,
            "strands": c.strand_count,
            "writhe": c.writhe,
            "positive": c.positive,
            "negative": c.negative,
            "parity_witness": {"writhe_plus_strands": c.writhe + c.strand_count,
                               "cycle_sign": p.cycle_sign, "crossing_sign": p.crossing_sign},
            "blackboard_framing": bl.framing_from_braid(link, c.label, args.m),
        })
    matrix = [[0 if K == L else link.linking_number(K, L) for L in labels] for K in labels]
    payload = {"components": rows, "labels": labels, "linking_matrix": matrix, "axis_framing": args.m}
    lines = [f"{'K':>3} {'n':>3} {'w':>4} {'w+n':>4} {'framing':>8}"]
    for r in rows:
        lines.append(f"{r['component']:>3} {r['strands']:>3} {r['writhe']:>4} "
                     f"{r['parity_witness']['writhe_plus_strands']:>4} {r['blackboard_framing']:>8}")
    lines.append("linking: " + "; ".join(" ".join(f"{v:>3}" for v in row) for row in matrix))
    _emit(payload, args, lines)
    return EXIT_OK


def _kirby_from_file(path, m_star: int) -> planner.KirbyInput:
    word, targets, raw = _load(path)
    aux = raw.get("aux")
    if aux is None:
        return planner.KirbyInput.with_aux(word, targets, m_star)
    try:
        plus, minus = int(aux["plus"]), int(aux["minus"])
    except (KeyError, TypeError, ValueError):
        raise _ParseFailure(bl.BraidFileError("'aux' must be {\"plus\": k, \"minus\": k}")) from None
    return planner.KirbyInput(word, targets, plus, minus, m_star)


def _plan_report(plan: planner.ConstructionPlan, args) -> int:
    violations = planner.verify_certificate(plan)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(plan.dumps())
    payload = {"plan": plan.to_json() if not args.output else args.output,
               "violations": [v.to_json() for v in violations]}
    lines = [f"{i:>3} {s.kind:<20} {s.scope:<14} {s.component!s:>5} {s.rule}"
             for i, s in enumerate(plan.steps)]
    lines.append(f"hopf offset {plan.hopf_offset}; violations: {len(violations)}")
    for v in violations:
        lines.append(f"  step {v.step}: {v.error} ({v.rule}) {v.message}")
    text_args = argparse.Namespace(human=args.human, output=None)
    _emit(payload, text_args, lines)
    return EXIT_OK if not violations else EXIT_FAIL


def cmd_plan(args) -> int:
    if args.braid:
        kirby = _kirby_from_file(args.braid, args.m_star)
    else:
        kirby = planner.KirbyInput.empty(args.m_star)
    try:
        plan = planner.total_plan(kirby, args.hopf)
    except planner.OddKirbyFraming as exc:
        return _error("OddKirbyFraming", str(exc), EXIT_PRECONDITION, components=list(exc.components))
    except (planner.MissingAuxiliaryUnknots, planner.MissingTarget, bl.ParityViolation) as exc:
        return _error(type(exc).__name__, str(exc), EXIT_PRECONDITION)
    return _plan_report(plan, args)


def cmd_gn(args) -> int:
    return _plan_report(planner.build_gn(args.n), args)


def cmd_verify(args) -> int:
    results: dict = {}
    ok = True
    if args.plan:
        try:
            with open(args.plan, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            return _error("ParseError", exc.msg, EXIT_PARSE, line=exc.lineno, column=exc.colno)
        try:
            violations = planner.verify_certificate(data)
        except (KeyError, TypeError, ValueError) as exc:
            return _error("ParseError", f"malformed plan: {exc}", EXIT_PARSE)
        results["violations"] = [v.to_json() for v in violations]
        if violations:
            ok = False
            results["first_failure"] = violations[0].rule
    if args.models:
        from .geomcheck import resolve_pending, run_model_suite

        reports = run_model_suite(args.grid, args.n, args.tol, workers=args.workers)
        results["checks"] = [r.to_json() for r in reports]
        results["oracle_pending"] = resolve_pending(args.n)
        failed = [r for r in reports if not r.passed]
        failed_pending = [k for k, v in results["oracle_pending"].items() if not v["agree"]]
        if failed or failed_pending:
            ok = False
            results.setdefault("first_failure", failed[0].name if failed else f"oracle:{failed_pending[0]}")
    if not args.plan and not args.models:
        return _error("UsageError", "give a plan file and/or --models", EXIT_PRECONDITION)
    results["passed"] = ok
    lines = []
    for v in results.get("violations", []):
        lines.append(f"step {v['step']}: {v['error']} rule={v['rule']} {v['message']}")
    for r in results.get("checks", []):
        lines.append(f"{'PASS' if r['passed'] else 'FAIL'} {r['name']:<22} {r['grid'].get('model', '')!s:<40} "
                     f"value={r['value']} tol={r['tolerance']}")
    for k, v in results.get("oracle_pending", {}).items():
        lines.append(f"{'PASS' if v['agree'] else 'FAIL'} oracle {k}: ledger {v['ledger']} oracle {v['oracle']}")
    if "first_failure" in results:
        lines.append(f"first failing rule: {results['first_failure']}")
    lines.append("passed" if ok else "failed")
    _emit(results, args, lines)
    if not ok:
        sys.stderr.write(f"failed rule: {results['first_failure']}\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_blocks(args) -> int:
    names = ["std", "F1", "F2", "F1inv", "F2inv", "G"]
    blocks = [folblocks.catalog(nm, args.n) for nm in names]
    blocks.append(folblocks.catalog("rotation", args.n, m=1))
    payload = {"blocks": [b.to_json() for b in blocks]}
    lines = [f"{b.name:<12} twist={b.twist.to_list()} theta=({b.theta1[0]:g}, {b.theta2[0]:g})"
             f"{' pending' if b.pending else ''}" for b in blocks]
    _emit(payload, args, lines)
    return EXIT_OK


def cmd_selftest(args) -> int:
    """Seeded random parity and framing checks on braid words."""
    rng = random.Random(args.seed)
    failures = []
    for trial in range(args.trials):
        n = rng.randint(1, 8)
        letters = [rng.choice([1, -1]) * rng.randint(1, n - 1) for _ in range(rng.randint(0, 40))] if n > 1 else []
        word = bl.BraidWord.from_signed(n, letters)
        try:
            link = bl.close(word)
            bl.parity_check(link)
        except bl.ParityViolation as exc:
            failures.append({"trial": trial, "word": letters, "strands": n, "message": str(exc)})
    payload = {"seed": args.seed, "trials": args.trials, "failures": failures}
    _emit(payload, args, [f"seed {args.seed}: {args.trials} trials, {len(failures)} failures"])
    return EXIT_OK if not failures else EXIT_FAIL


# --- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--human", action="store_true", help="readable text instead of JSON")
    common.add_argument("-o", "--output", help="write the report (or plan) here")
    p = argparse.ArgumentParser(prog="totalfol", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("invariants", parents=[common], help="per-component table of a closed braid")
    s.add_argument("braid")
    s.add_argument("--m", type=int, default=0, help="framing of the braid axis")
    s.set_defaults(func=cmd_invariants)

    s = sub.add_parser("plan", parents=[common], help="construction plan for a framed braid link")
    s.add_argument("braid", nargs="?", help="braid file; omit for the empty link")
    s.add_argument("--hopf", type=int, default=0)
    s.add_argument("--m-star", type=int, default=0)
    s.set_defaults(func=cmd_plan)

    s = sub.add_parser("verify", parents=[common], help="replay a plan and/or run the geometric checks")
    s.add_argument("plan", nargs="?")
    s.add_argument("--models", action="store_true")
    s.add_argument("--grid", type=int, default=64)
    s.add_argument("--tol", type=float, default=1e-5)
    s.add_argument("--n", type=int, default=1, help="strand count for the models")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("gn", parents=[common], help="plan for the Hopf-degree block G_n")
    s.add_argument("n", type=int)
    s.set_defaults(func=cmd_gn)

    s = sub.add_parser("blocks", parents=[common], help="catalog ledger")
    s.add_argument("--n", type=int, default=1)
    s.set_defaults(func=cmd_blocks)

    s = sub.add_parser("selftest", parents=[common], help="seeded random braid parity checks")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=200)
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv, namespace=CommandConfig())
    try:
        args.check()
    except ValueError as exc:
        return _error("ConfigError", str(exc), EXIT_PRECONDITION)
    if getattr(args, "seed", None) is not None:
        sys.stderr.write(f"seed: {args.seed}\n")
    try:
        return args.func(args)
    except _ParseFailure as exc:
        e = exc.exc
        return _error("ParseError", e.reason, EXIT_PARSE, line=e.line, column=e.column)
    except OSError as exc:
        return _error("IOError", str(exc), EXIT_PRECONDITION)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
