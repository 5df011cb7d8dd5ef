"""Command-line front end.

    giacheck check FILE [--format json|text] [--no-buffered]
    giacheck export FILE --stage gchor,pomsets,projections,product --out DIR
    giacheck corpus --seed N --count N [--max-depth ...] [--state-cap N]

``check`` exits 0 for a well-formed choreography, 1 for an ill-formed one
and 2 when the input cannot be read or parsed.  The default state cap of the
buffered executor can be overridden with ``GIACHECK_STATE_CAP``.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .analysis import DEFAULT_STATE_CAP, Verdict, check_well_formed, named_stripped_projection, system_product, verdict_to_json
from .corpus import CorpusConfig, run_corpus
from .dot import gchor_to_dot, gia_to_dot, pomset_to_dot
from .gchor import GChor, ParseError, SelfInteractionError, participants, parse_gchor, render_gchor
from .pomsets import Bottom, semantics
from .projection import project

STAGES = ("gchor", "pomsets", "projections", "product")
STATE_CAP_ENV = "GIACHECK_STATE_CAP"


class UsageError(Exception):
    pass


def default_state_cap() -> int:
    raw = os.environ.get(STATE_CAP_ENV)
    if raw is None:
        return DEFAULT_STATE_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise UsageError(f"{STATE_CAP_ENV} must be an integer, got {raw!r}") from None
    if cap <= 0:
        raise UsageError(f"{STATE_CAP_ENV} must be positive")
    return cap


def load(path: str) -> GChor:
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    return parse_gchor(text)


def render_text(v: Verdict) -> str:
    lines = [
        f"well-formed: {'yes' if v.well_formed else 'no'}",
        f"pomset semantics: {'defined' if v.oracle_well_formed else v.oracle_detail}",
    ]
    for path, info in v.per_subterm.items():
        status = "ok" if info["ok"] else f"{info['witnesses']} witness(es)"
        lines.append(f"  {info['kind']} at {path}: {status}  [{info['term']}]")
    for w in v.witnesses:
        where = f" at {w.subterm or '<root>'}" if w.kind != "unmatched-output" else ""
        label = f" on {w.label}" if w.label is not None else ""
        lines.append(f"witness {w.kind}{where}{label}: {', '.join(map(str, w.to_json()['states']))}")
        if w.trail:
            lines.append("  trail: " + " . ".join(str(t.label) for t in w.trail))
        if w.detail:
            lines.append("  " + w.detail)
    if v.buffered is not None:
        b = v.buffered
        lines.append(
            f"buffered run: deadlock_free={b.deadlock_free} orphan_free={b.orphan_free}"
            + (" (state cap reached)" if b.inconclusive else "")
        )
    return "\n".join(lines) + "\n"


def cmd_check(args) -> int:
    g = load(args.file)
    cap = args.state_cap or default_state_cap()
    v = check_well_formed(g, buffered=not args.no_buffered, state_cap=cap)
    sys.stdout.write(verdict_to_json(v) + "\n" if args.format == "json" else render_text(v))
    return 0 if v.well_formed else 1


def _stages(spec: str) -> list[str]:
    chosen = [s.strip() for s in spec.split(",") if s.strip()]
    if chosen == ["all"]:
        return list(STAGES)
    bad = [s for s in chosen if s not in STAGES]
    if bad or not chosen:
        raise UsageError(f"unknown stage(s) {', '.join(bad) or '<none>'}; choose from {', '.join(STAGES)} or all")
    return chosen


def export_files(g: GChor, stages: list[str], raw: bool = False) -> dict[str, str]:
    """File name to DOT text for every requested stage."""
    files = {}
    if "gchor" in stages:
        files["gchor.dot"] = gchor_to_dot(g, render_gchor(g))
    if "pomsets" in stages:
        sem = semantics(g)
        if isinstance(sem, Bottom):
            raise UsageError(f"no pomsets to export: semantics undefined ({sem})")
        for i, r in enumerate(sem.pomsets):
            files[f"pomset_{i}.dot"] = pomset_to_dot(r, f"pomset {i}")
    if "projections" in stages:
        for p in sorted(participants(g)):
            automaton = project(g, p).automaton if raw else named_stripped_projection(g, p)
            files[f"projection_{p}.dot"] = gia_to_dot(automaton, f"projection on {p}")
    if "product" in stages:
        _, _, prod = system_product(g)
        if prod is not None:
            files["product.dot"] = gia_to_dot(prod, "product")
    return files


def cmd_export(args) -> int:
    g = load(args.file)
    files = export_files(g, _stages(args.stage), args.raw)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in sorted(files.items()):
        (out / name).write_text(text, encoding="utf-8")
        print(out / name)
    return 0


def cmd_corpus(args) -> int:
    config = CorpusConfig(
        seed=args.seed,
        count=args.count,
        max_depth=args.max_depth,
        max_participants=args.max_participants,
        max_messages=args.max_messages,
        state_cap=args.state_cap or default_state_cap(),
    )
    if config.count < 0 or config.max_depth < 0:
        raise UsageError("count and max-depth must be non-negative")
    if not 2 <= config.max_participants <= 4 or not 1 <= config.max_messages <= 3:
        raise UsageError("max-participants must be in 2..4 and max-messages in 1..3")
    report = run_corpus(config)
    sys.stdout.write(report.render())
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="giacheck", description="Well-formedness checker for global choreographies.")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="check a choreography file ('-' reads standard input)")
    check.add_argument("file")
    check.add_argument("--format", choices=("json", "text"), default="json")
    check.add_argument("--no-buffered", action="store_true", help="skip the buffered execution")
    check.add_argument("--state-cap", type=int, default=None)
    check.set_defaults(func=cmd_check)

    export = sub.add_parser("export", help="write DOT files")
    export.add_argument("file")
    export.add_argument("--stage", default="all", help="comma-separated: " + ",".join(STAGES) + " (default all)")
    export.add_argument("--out", default=".")
    export.add_argument("--raw", action="store_true", help="export projections before τ-stripping")
    export.set_defaults(func=cmd_export)

    corpus = sub.add_parser("corpus", help="cross-validate on random choreographies")
    corpus.add_argument("--seed", type=int, default=1)
    corpus.add_argument("--count", type=int, default=200)
    corpus.add_argument("--max-depth", type=int, default=4)
    corpus.add_argument("--max-participants", type=int, default=4)
    corpus.add_argument("--max-messages", type=int, default=3)
    corpus.add_argument("--state-cap", type=int, default=None)
    corpus.set_defaults(func=cmd_corpus)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, SelfInteractionError) as exc:
        print(f"giacheck: parse error: {exc}", file=sys.stderr)
        return 2
    except (OSError, UsageError) as exc:
        print(f"giacheck: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
