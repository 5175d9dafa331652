"""Command-line front end: ``ltyn analyze``, ``ltyn check`` and ``ltyn typecheck``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .core import (
    DEFAULT_STEP_BUDGET,
    IllTyped,
    StepBudgetExceeded,
    TypingContext,
    TypingError,
    normalize,
    type_of,
)
from .discourse import DiscourseError, load_discourse
from .engine import (
    EngineConfig,
    Felicitous,
    Missing,
    Reading,
    compose,
    diagnose_missing,
    readings_by_sentence,
)
from .lexicon import Lexicon, ValidationError, load_lexicon_file, merge_overlay, validate_lexicon
from .logical_form import NotErasable, erase, print_formula, standard_constants
from .ontology import OntologyError
from .syntax import ParseError, format_term, format_type, parse_term

EXIT_OK, EXIT_INPUT, EXIT_INFELICITOUS, EXIT_MISSING = 0, 1, 2, 3
INPUT_ERRORS = (ParseError, ValidationError, OntologyError, DiscourseError, OSError, ValueError)


def step_budget() -> int:
    raw = os.environ.get("LTYN_STEP_BUDGET")
    if raw is None:
        return DEFAULT_STEP_BUDGET
    value = int(raw)
    if value < 1:
        raise ValueError("LTYN_STEP_BUDGET must be a positive integer")
    return value


def load_with_overlays(path: str, overlays: list[str]) -> Lexicon:
    lex = load_lexicon_file(path)
    for overlay_path in overlays:
        overlay = load_lexicon_file(overlay_path, base=lex)
        lex = merge_overlay(lex, overlay)
    return lex


def render_formula(reading: Reading, style: str) -> str | None:
    if reading.logical_form is None:
        return None
    try:
        return print_formula(erase(reading.logical_form), "ascii" if style == "json" else style)
    except NotErasable:
        return format_term(reading.logical_form)


def _verdict_dict(reading: Reading) -> dict:
    verdict = reading.verdict
    reason = None
    if not isinstance(verdict, Felicitous):
        reason = str(verdict.miss) if isinstance(verdict, Missing) else verdict.reason
    out = {"status": verdict.status, "reason": reason, "label": reading.label}
    if getattr(verdict, "pairs", ()):
        out["pairs"] = [list(p) for p in verdict.pairs]
    return out


@dataclass
class RunReport:
    sentences: list = field(default_factory=list)
    exit_code: int = EXIT_OK

    @property
    def counts(self) -> dict:
        counts = {"felicitous": 0, "infelicitous": 0, "missing": 0}
        for entry in self.sentences:
            for r in entry["readings"]:
                counts[r.verdict.status] += 1
        return counts


def analyze(lex: Lexicon, path: str, cfg: EngineConfig) -> RunReport:
    discourse = load_discourse(path)
    readings = compose(discourse, lex, cfg, report_unknown=True)
    report = RunReport()
    codes = [EXIT_OK]
    for source, group in zip(discourse.sources, readings_by_sentence(readings, len(discourse))):
        diagnostics = [diagnose_missing(r.verdict.miss, lex) for r in group if isinstance(r.verdict, Missing)]
        if not any(r.felicitous for r in group):
            codes.append(EXIT_MISSING if diagnostics else EXIT_INFELICITOUS)
        report.sentences.append({"sentence": source, "readings": group, "diagnostics": diagnostics})
    report.exit_code = max(codes)
    return report


def report_json(report: RunReport) -> list:
    out = []
    for entry in report.sentences:
        out.append({
            "sentence": entry["sentence"],
            "readings": [
                {
                    "formula": render_formula(r, "json"),
                    "trace": [
                        {"anchor": i.anchor, "transformation": i.transformation, "position": i.position}
                        for i in r.trace
                    ],
                    "verdict": _verdict_dict(r),
                }
                for r in entry["readings"]
            ],
            "diagnostics": [d.as_dict() for d in entry["diagnostics"]],
        })
    return out


def report_text(report: RunReport, style: str, show_trace: bool) -> str:
    lines = []
    for number, entry in enumerate(report.sentences, start=1):
        lines.append(f"# {number}: {entry['sentence']}")
        for r in entry["readings"]:
            formula = render_formula(r, style)
            if formula is not None:
                lines.append(formula)
            lines.append(f"  verdict: {r.verdict} [{r.label}]")
            if show_trace:
                steps = ", ".join(f"{i.transformation}@{i.position or 'root'}" for i in r.trace)
                lines.append(f"  trace: [{steps}]")
                for k, term in enumerate(r.snapshots):
                    lines.append(f"  step {k}: {format_term(term)}")
        for d in entry["diagnostics"]:
            lines.append("  suggestion (overlay fragment):")
            lines.extend("    " + ln for ln in d.fragment.rstrip("\n").splitlines())
    return "\n".join(lines) + "\n"


def cmd_analyze(args) -> int:
    cfg = EngineConfig(
        max_chain_depth=args.max_chain_depth,
        enumerate_all_readings=args.all_readings,
        sentence_resets_semiflexible=not args.no_sentence_reset,
        step_budget=step_budget(),
    )
    lex = load_with_overlays(args.lexicon, args.overlay)
    with ThreadPoolExecutor(max_workers=min(8, len(args.discourse))) as pool:
        futures = [pool.submit(analyze, lex, path, cfg) for path in args.discourse]
        reports = [f.result() for f in futures]
    if args.format == "json":
        docs = [report_json(r) for r in reports]
        if len(docs) == 1:
            payload = docs[0]
        else:
            payload = [{"file": p, "sentences": d} for p, d in zip(args.discourse, docs)]
        sys.stdout.write(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
    else:
        for path, report in zip(args.discourse, reports):
            if len(reports) > 1:
                sys.stdout.write(f"== {path}\n")
            sys.stdout.write(report_text(report, args.format, args.trace))
    return max(r.exit_code for r in reports)


def cmd_check(args) -> int:
    lex = load_with_overlays(args.lexicon, args.overlay)
    diagnostics = validate_lexicon(lex)
    for d in diagnostics:
        print(d)
    if diagnostics:
        return EXIT_INPUT
    print(f"ok: {len(lex.entries)} words, {len(lex.ontology.parents)} sorts")
    return EXIT_OK


def cmd_typecheck(args) -> int:
    if args.lexicon:
        ctx = load_with_overlays(args.lexicon, []).context()
    else:
        ctx = TypingContext(constants=standard_constants())
    term = parse_term(args.term, ctx.constants)
    try:
        ty = type_of(term, ctx)
    except TypingError as exc:
        print(f"type error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(format_type(ty))
    if args.normalize:
        print(format_term(normalize(term, ctx, budget=step_budget())))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ltyn", description="Compose many-sorted logical forms from derivation trees.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="compose the readings of discourse files")
    p.add_argument("lexicon")
    p.add_argument("discourse", nargs="+")
    p.add_argument("--overlay", action="append", default=[], metavar="PATH", help="contextual lexicon merged on top")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--all-readings", dest="all_readings", action="store_true", default=True)
    group.add_argument("--first-reading", dest="all_readings", action="store_false")
    p.add_argument("--max-chain-depth", type=int, default=2, metavar="N")
    p.add_argument("--no-sentence-reset", action="store_true",
                   help="keep semi-flexible uses active across sentence boundaries")
    p.add_argument("--format", choices=("unicode", "ascii", "sexpr", "json"), default="ascii")
    p.add_argument("--trace", action="store_true", help="print coercion traces and reduction snapshots")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("check", help="validate a lexicon and its overlays")
    p.add_argument("lexicon")
    p.add_argument("--overlay", action="append", default=[], metavar="PATH")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("typecheck", help="print the type of a term")
    p.add_argument("term")
    p.add_argument("--lexicon", metavar="PATH")
    p.add_argument("--normalize", action="store_true", help="also print the normal form")
    p.set_defaults(func=cmd_typecheck)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (IllTyped, StepBudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
