"""Command-line pipeline: prepare, induce, rank, crossval (and synthesize).

Exit status is 0 on success, 1 for usage or configuration errors and 2 for
data errors (unreadable files, malformed treebanks, grammar gaps).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor

from . import synthetic
from .chart import Unparsable, parse
from .combiner import DEFAULT_TOP_N, DEFAULT_WEIGHT_N, CombinerConfig, rank_combined
from .evaluation import MODELS, crossval
from .grammar import CoverageError, Grammar, induce
from .pcfg import rank_pcfg
from .pmpg import SubtreeIndex, build_index, rank_pmpg_forest
from .treebank import (DEFAULT_KEEP_FLAGS, DEFAULT_MAX_LEAVES, DEFAULT_SEED,
                       DEFAULT_STRIP_FLAGS, TreebankError, edit_labels, filter_by_length,
                       read_treebank, serialize_bracketed)

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _flag_set(text: str) -> frozenset[str]:
    return frozenset(f if f.startswith("-") else "-" + f
                     for f in (part.strip() for part in text.split(",")) if f)


def _label_set(text: str) -> frozenset[str]:
    return frozenset(s.strip() for s in text.split(",") if s.strip())


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as f:
        return f.read()


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)


def _info(args, message: str):
    # keep stdout clean when it carries the data
    stream = sys.stderr if getattr(args, "out", None) in (None, "-") else sys.stdout
    print(message, file=stream)


def cmd_prepare(args) -> int:
    corpus = read_treebank(args.treebank)
    edited = filter_by_length(edit_labels(corpus, args.strip_flags, args.keep_flags),
                              args.max_leaves)
    _write(args.out, serialize_bracketed(edited))
    _info(args, f"retained {len(edited)} of {len(corpus)} trees "
                f"(removed {len(corpus) - len(edited)})")
    return 0


def cmd_induce(args) -> int:
    corpus = read_treebank(args.treebank)
    grammar = induce(corpus)
    index = build_index(corpus)
    _write(args.grammar, grammar.to_jsonl())
    _write(args.index, index.to_jsonl())
    print(f"rules: {len(grammar)}")
    print(f"subtrees: {len(index)}")
    return 0


def _read_tag_sequences(args) -> list[tuple[str, ...]]:
    if args.treebank:
        return [t.leaves() for t in read_treebank(args.treebank)]
    seqs = []
    for line in _read(args.tags).splitlines():
        if line.strip() and not line.lstrip().startswith("#"):
            seqs.append(tuple(line.split()))
    return seqs


_state: dict = {}


def _init_ranker(grammar, index, model, config, starts):
    _state.update(grammar=grammar, index=index, model=model, config=config, starts=starts)


def _rank_one(item) -> str:
    i, tags = item
    grammar, index, model, config = _state["grammar"], _state["index"], _state["model"], _state["config"]
    forest = parse(tags, grammar, _state["starts"])
    record = {"id": i, "status": "parsed", "model": model, "parses": []}
    if isinstance(forest, Unparsable):
        record["status"] = "unparsable"
        return json.dumps(record)
    if model == "pcfg":
        ranked = rank_pcfg(forest, grammar, config.top_n)
    elif model == "pmpg":
        ranked = rank_pmpg_forest(forest, index, grammar, config.top_n)
    else:
        ranked = rank_combined(forest, grammar, index, config)
    record["parses"] = [{"rank": r.rank, "score": r.score, "tree": str(r.tree)}
                        for r in ranked[:config.top_n]]
    return json.dumps(record)


def cmd_rank(args) -> int:
    if not (args.tags or args.treebank):
        raise UsageError("rank needs --tags or --treebank")
    model = args.model[0] if args.model else "pcfg"
    if args.model and len(args.model) > 1:
        raise UsageError("rank takes a single --model")
    if model != "pcfg" and not args.index:
        raise UsageError(f"model {model} needs --index")
    grammar = Grammar.from_jsonl(_read(args.grammar))
    index = SubtreeIndex.from_jsonl(_read(args.index)) if args.index else None
    config = _config(args)
    seqs = list(enumerate(_read_tag_sequences(args)))
    init = (grammar, index, model, config, args.start_symbols)
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs, initializer=_init_ranker, initargs=init) as pool:
            lines = list(pool.map(_rank_one, seqs, chunksize=8))
    else:
        _init_ranker(*init)
        lines = [_rank_one(item) for item in seqs]
    _write(args.out, "".join(line + "\n" for line in lines))
    return 0


def cmd_crossval(args) -> int:
    corpus = read_treebank(args.treebank)
    if args.folds > len(corpus) or args.folds < 2:
        raise UsageError(f"--folds must be between 2 and the corpus size ({len(corpus)})")
    report = crossval(corpus, args.folds, args.seed, args.model or MODELS, _config(args),
                      args.start_symbols, not args.include_preterminals, args.jobs)
    if args.out:
        _write(args.out + ".json", report.to_json())
        _write(args.out + ".txt", report.to_text())
    sys.stdout.write(report.to_text())
    return 0


def cmd_synthesize(args) -> int:
    corpus = synthetic.generate(args.size, args.seed, args.max_leaves)
    _write(args.out, serialize_bracketed(corpus))
    return 0


def _config(args) -> CombinerConfig:
    try:
        return CombinerConfig(args.top_n, args.weight_n, args.pruned_numerator)
    except ValueError as err:
        raise UsageError(str(err)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="report errors as JSON on stderr")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")

    ranking = argparse.ArgumentParser(add_help=False)
    ranking.add_argument("--model", action="append", choices=MODELS,
                         help="disambiguator (repeatable for crossval; default: all)")
    ranking.add_argument("--top-n", type=int, default=DEFAULT_TOP_N)
    ranking.add_argument("--weight-n", type=float, default=DEFAULT_WEIGHT_N)
    ranking.add_argument("--pruned-numerator", action="store_true",
                         help="combined score numerator from the pruned tree")
    ranking.add_argument("--start-symbols", type=_label_set, default=None,
                         help="comma-separated root labels (default: roots seen in training)")

    parser = _Parser(prog="dopmatch", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("prepare", parents=[common], help="strip flags and cap sentence length")
    p.add_argument("--treebank", required=True)
    p.add_argument("--out")
    p.add_argument("--max-leaves", type=int, default=DEFAULT_MAX_LEAVES)
    p.add_argument("--strip-flags", type=_flag_set, default=DEFAULT_STRIP_FLAGS,
                   help="comma-separated semantic flags, e.g. TMP,DIR")
    p.add_argument("--keep-flags", type=_flag_set, default=DEFAULT_KEEP_FLAGS)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("induce", parents=[common], help="write grammar and subtree index")
    p.add_argument("--treebank", required=True)
    p.add_argument("--grammar", required=True)
    p.add_argument("--index", required=True)
    p.set_defaults(func=cmd_induce)

    p = sub.add_parser("rank", parents=[common, ranking], help="parse and rank tag sequences")
    p.add_argument("--grammar", required=True)
    p.add_argument("--index")
    p.add_argument("--tags", help="one whitespace-separated tag sequence per line")
    p.add_argument("--treebank", help="rank the leaf sequences of a treebank")
    p.add_argument("--out")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("crossval", parents=[common, ranking], help="n-fold cross-validation")
    p.add_argument("--treebank", required=True)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--include-preterminals", action="store_true",
                   help="count pre-terminal brackets in F-measure")
    p.add_argument("--out", help="write OUT.json and OUT.txt")
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("synthesize", parents=[common], help="generate the synthetic treebank")
    p.add_argument("--size", type=int, default=synthetic.DEFAULT_SIZE)
    p.add_argument("--seed", type=int, default=synthetic.DEFAULT_SYNTH_SEED)
    p.add_argument("--max-leaves", type=int, default=DEFAULT_MAX_LEAVES)
    p.add_argument("--out")
    p.set_defaults(func=cmd_synthesize)
    return parser


def _fail(args, code: int, err: BaseException) -> int:
    if getattr(args, "json", False):
        print(json.dumps({"error": type(err).__name__, "message": str(err), "exit": code}),
              file=sys.stderr)
    else:
        print(f"dopmatch: error: {err}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as stop:
        return stop.code if isinstance(stop.code, int) else EXIT_USAGE
    if args.jobs < 1:
        return _fail(args, EXIT_USAGE, UsageError("--jobs must be at least 1"))
    try:
        return args.func(args)
    except UsageError as err:
        return _fail(args, EXIT_USAGE, err)
    except (OSError, TreebankError, CoverageError, json.JSONDecodeError, KeyError,
            ValueError) as err:
        return _fail(args, EXIT_DATA, err)


if __name__ == "__main__":
    sys.exit(main())
