"""Command line entry point: ``factualsg <command> [options]``.

Exit codes: 0 success (possibly with rejects), 1 usage error, 2 total input
failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from . import harness
from .convert import ConvertOptions
from .embeddings import EmbeddingStore, load_store
from .errors import FactualError
from .lexicons import Lexicons, MorphTable
from .metrics import TiePolicy

EXIT_OK, EXIT_USAGE, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _k_list(text: str) -> list[int]:
    try:
        ks = [int(k) for k in text.split(",") if k.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad k list {text!r}") from None
    if not ks or min(ks) < 1:
        raise argparse.ArgumentTypeError("k values must be positive integers")
    return ks


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--embeddings", help="text embeddings file (key<TAB>v1 ... vd)")
    g.add_argument("--image-embeddings", help="image embeddings file, same format keyed by image id")
    g.add_argument("--fallback-embedder", choices=("on", "off"), default="on")
    g.add_argument("--tie-policy", choices=[t.value for t in TiePolicy], default="lose")
    g.add_argument("--k", type=_k_list, default=[1, 5, 10], help="comma-separated Recall@k cut-offs")
    g.add_argument("--ttr-scale", type=float, default=1.0)
    g.add_argument("--mtld-threshold", type=float, default=0.72)
    g.add_argument("--rejects", help="write rejected records here (JSONL)")
    g.add_argument("--report", help="write the machine-readable report here (JSONL)")
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--prepositions", help="preposition lexicon (one per line)")
    g.add_argument("--modifiers", help="quantifier modifier lexicon (key<TAB>display-form)")
    g.add_argument("--verbs", help="optional verb lexicon (one per line)")
    g.add_argument("--morphology", help="irregular participles (lemma<TAB>participle)")
    g.add_argument("--plurals", help="plural exceptions (plural<TAB>singular)")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="factualsg", description="FACTUAL-MR parsing, scene-graph conversion and metrics.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("convert", parents=[common], help="MR -> scene graph (fills candidate_sg)")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--collective-only", action="store_true", help="never distribute relations")

    p = sub.add_parser("validate", parents=[common], help="check MRs against the lexicons")
    p.add_argument("input")

    p = sub.add_parser("eval-parser", parents=[common], help="Set Match and SPICE of candidate vs gold graphs")
    p.add_argument("input")

    p = sub.add_parser("caption-eval", parents=[common], help="correlate a graph metric with human scores")
    p.add_argument("input")
    p.add_argument("--mode", choices=harness.MODES, default="spice")
    p.add_argument("--combine-with", help="harmonic mean with external_scores[NAME]")

    p = sub.add_parser("foil", parents=[common], help="accuracy at preferring true over foil captions")
    p.add_argument("input")
    p.add_argument("--mode", choices=harness.MODES, default="spice")
    p.add_argument("--combine-with", help="harmonic mean with external_scores[NAME] / [NAME_foil]")

    p = sub.add_parser("retrieve", parents=[common], help="rank gallery graphs by SoftSPICE, report Recall@k")
    p.add_argument("queries")
    p.add_argument("gallery")

    p = sub.add_parser("stats", parents=[common], help="label and occurrence statistics of an MR dataset")
    p.add_argument("input")

    p = sub.add_parser("diversity", parents=[common], help="Yule's I, TTR and MTLD of a graph category")
    p.add_argument("input")
    p.add_argument("--category", choices=harness.CATEGORIES, default="objects")
    return parser


def _store(args) -> Optional[EmbeddingStore]:
    fallback = args.fallback_embedder == "on"
    if args.embeddings or args.image_embeddings:
        return load_store(args.embeddings, args.image_embeddings, fallback=fallback)
    if not fallback:
        raise UsageError("--fallback-embedder off requires --embeddings")
    return EmbeddingStore.empty()


def _run(args) -> harness.Report:
    lexicons = Lexicons.load(args.prepositions, args.modifiers, args.verbs)
    morphology = MorphTable.load(args.morphology, args.plurals)
    workers = max(1, args.workers)
    cmd = args.command
    if cmd == "convert":
        options = ConvertOptions(morphology, lexicons.modifiers, distributive=not args.collective_only)
        return harness.cmd_convert(args.input, args.output, lexicons, options, workers)
    if cmd == "validate":
        return harness.cmd_validate(args.input, lexicons, workers)
    if cmd == "eval-parser":
        return harness.cmd_eval_parser(args.input, workers)
    if cmd == "caption-eval":
        store = _store(args) if args.mode != "spice" else None
        return harness.cmd_caption_eval(args.input, args.mode, store, args.combine_with, workers)
    if cmd == "foil":
        store = _store(args) if args.mode != "spice" else None
        return harness.cmd_foil(args.input, args.mode, TiePolicy(args.tie_policy), store, args.combine_with, workers)
    if cmd == "retrieve":
        return harness.cmd_retrieve(args.queries, args.gallery, _store(args), args.k, workers)
    if cmd == "stats":
        return harness.cmd_stats(args.input, lexicons, morphology, workers)
    if cmd == "diversity":
        return harness.cmd_diversity(args.input, args.category, args.ttr_scale, args.mtld_threshold, workers)
    raise UsageError(f"unknown command {cmd!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        report = _run(args)
    except UsageError as exc:
        print(f"factualsg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FactualError, OSError) as exc:
        code = exc.code if isinstance(exc, FactualError) else type(exc).__name__
        print(f"factualsg: {code}: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.report:
        report.write(args.report)
    if args.rejects:
        report.write_rejects(args.rejects)
    elif report.rejects:
        for rej in report.rejects:
            print(f"reject line {rej['line']} id={rej['id']}: {rej['error']}: {rej['message']}", file=sys.stderr)
    sys.stdout.write(report.render_table())
    if report.rejects:
        print(f"{len(report.rejects)} record(s) rejected", file=sys.stderr)
    return EXIT_INPUT if report.total_failure else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
