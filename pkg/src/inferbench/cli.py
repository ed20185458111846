"""Command line interface: ``inferbench <subcommand> ...``."""

import argparse
import logging
import sys

from . import pipeline
from .errors import InferBenchError, ShortfallError
from .kg import SymbolTable
from .datalog.syntax import load_rules
from .rule_analysis import compare_rules, load_system_rules

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SHORTFALL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_options(p, stage):
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--kg", help="KG file (subject<TAB>predicate<TAB>object)")
    p.add_argument("--out", help="benchmark directory")
    if stage in ("build", "gen-rules"):
        p.add_argument("--patterns", help="pattern file")
        p.add_argument("--builtin", help="comma-separated built-in patterns, e.g. sym,comp")
        p.add_argument("--k1", type=int, help="rules per pattern (default 50)")
    p.add_argument("--rules", help="rule file (instead of patterns)")
    if stage in ("build", "apply-split"):
        p.add_argument("--k2", type=int, help="conclusions sampled per rule (default 200)")
    if stage != "gen-rules":
        p.add_argument("--ratio", help="train:valid:test (default 8:1:1)")
    if stage in ("build", "gen-negatives"):
        p.add_argument("--method", choices=pipeline.METHODS, help="negative generator (default qg)")
        p.add_argument("--allow-shortfall", action="store_true", default=None,
                       help="write fewer negatives instead of failing when a pool runs dry")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--type-marker", help="predicate name of type assertions (default 'type')")
    p.add_argument("--workers", type=int, help="worker processes (output does not depend on it)")


def make_parser():
    ap = _Parser(prog="inferbench", description="Build and score rule-inference benchmarks.")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, text in (("build", "run all three stages"),
                       ("gen-rules", "select rules from patterns"),
                       ("apply-split", "sample conclusions and split positives"),
                       ("gen-negatives", "generate negative examples")):
        _build_options(sub.add_parser(name, help=text), name)

    p = sub.add_parser("stats", help="print benchmark statistics")
    p.add_argument("bench")

    p = sub.add_parser("evaluate", help="score predictions on a benchmark")
    p.add_argument("bench")
    p.add_argument("predictions", nargs="?")
    p.add_argument("--baseline", choices=("simpbl",))
    p.add_argument("--threshold", type=float, help="fixed threshold instead of tuning on valid")
    p.add_argument("--k", default="1,3,10", help="Hits@k cutoffs (default 1,3,10)")
    p.add_argument("--output", help="write the report here as well")

    p = sub.add_parser("analyze-rules", help="compare mined rules with benchmark rules")
    p.add_argument("--bench", required=True, help="benchmark rule file")
    p.add_argument("--sys", required=True, help="system rule file")
    p.add_argument("--sys-format", choices=("native", "arrow"), default="native")
    p.add_argument("--type-marker", default="type")
    p.add_argument("--workers", type=int, default=1)
    return ap


def _config(args):
    values = pipeline.read_config(args.config) if args.config else {}
    cfg = pipeline.BuildConfig()
    cfg.update(**values)
    flags = {k: getattr(args, k, None) for k in pipeline.BuildConfig.keys()}
    return cfg.update(**flags)


def _run(args):
    cmd = args.command
    if cmd in ("build", "gen-rules", "apply-split", "gen-negatives"):
        cfg = _config(args)
        if cmd == "build":
            out = pipeline.build(cfg)
        elif cmd == "gen-rules":
            out = pipeline.run_gen_rules(cfg)
        elif cmd == "apply-split":
            out = pipeline.run_apply_split(cfg)
        else:
            out = pipeline.run_gen_negatives(cfg)
        print(out)
    elif cmd == "stats":
        sys.stdout.write(pipeline.format_stats(pipeline.stats(args.bench)))
    elif cmd == "evaluate":
        if not args.predictions and not args.baseline:
            raise ValueError("give a predictions file or --baseline simpbl")
        ks = tuple(int(k) for k in args.k.split(",") if k.strip())
        report = pipeline.evaluate(args.bench, args.predictions, args.baseline,
                                   args.threshold, ks)
        text = report.text()
        sys.stdout.write(text)
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
    elif cmd == "analyze-rules":
        symbols = SymbolTable(args.type_marker)
        bench = load_rules(args.bench, symbols)
        sys_rules, skipped = load_system_rules(args.sys, symbols, args.sys_format)
        report = compare_rules(bench, sys_rules, args.workers, skipped)
        sys.stdout.write(report.text())
    return EXIT_OK


def _root_cause(e):
    while isinstance(e, pipeline.StageError):
        e = e.cause
    return e


def main(argv=None) -> int:
    ap = make_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _run(args)
    except (InferBenchError, OSError, ValueError) as e:
        cause = _root_cause(e)
        print(f"inferbench: {e}", file=sys.stderr)
        if isinstance(cause, ShortfallError):
            return EXIT_SHORTFALL
        if isinstance(cause, ValueError) and not isinstance(e, pipeline.StageError):
            return EXIT_USAGE
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
