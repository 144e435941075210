"""Parse accuracy, labeled-bracket F-measure and the cross-validation driver."""
from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .chart import Unparsable, kbest, parse
from .combiner import CombinerConfig, rank_combined
from .grammar import induce
from .pcfg import rank_pcfg
from .pmpg import build_index, rank_pmpg_forest
from .treebank import DEFAULT_SEED, Corpus, Tree, split_folds

MODELS = ("pcfg", "pmpg", "combined")


def exact_match(proposed: Tree | None, gold: Tree) -> bool:
    return proposed is not None and proposed == gold


def labeled_brackets(tree: Tree, exclude_preterminals: bool = True) -> Counter:
    """Multiset of (label, start, end) over internal nodes, half-open leaf spans."""
    out: Counter = Counter()

    def walk(node: Tree, start: int) -> int:
        if node.is_leaf:
            return start + 1
        end = start
        for child in node.children:
            end = walk(child, end)
        if not (exclude_preterminals and node.is_preterminal):
            out[node.label, start, end] += 1
        return end

    walk(tree, 0)
    return out


class BracketCounts(NamedTuple):
    matched: int
    proposed: int
    gold: int


def bracket_counts(proposed: Tree | None, gold: Tree,
                   exclude_preterminals: bool = True) -> BracketCounts:
    g = labeled_brackets(gold, exclude_preterminals)
    if proposed is None:
        return BracketCounts(0, 0, sum(g.values()))
    p = labeled_brackets(proposed, exclude_preterminals)
    return BracketCounts(sum((p & g).values()), sum(p.values()), sum(g.values()))


@dataclass(frozen=True)
class SentenceResult:
    id: int
    status: str  # "parsed" | "unparsable"
    proposed: Tree | None
    exact_match: bool
    bracket_counts: BracketCounts


class PRF(NamedTuple):
    precision: float
    recall: float
    f: float
    # metrics whose denominator was zero (reported as 0)
    undefined: tuple[str, ...] = ()


def prf(results: Iterable[SentenceResult]) -> PRF:
    matched = proposed = gold = 0
    for r in results:
        matched += r.bracket_counts.matched
        proposed += r.bracket_counts.proposed
        gold += r.bracket_counts.gold
    undefined = []
    if proposed:
        p = matched / proposed
    else:
        p = 0.0
        undefined.append("precision")
    if gold:
        r = matched / gold
    else:
        r = 0.0
        undefined.append("recall")
    if p + r:
        f = 2 * p * r / (p + r)
    else:
        f = 0.0
        undefined.append("f")
    return PRF(p, r, f, tuple(undefined))


def _pct(num: int, den: int) -> float:
    return round(100.0 * num / den, 1) if den else 0.0


@dataclass(frozen=True)
class ModelRow:
    model: str
    overall_num: int
    overall_den: int
    parsable_num: int
    parsable_den: int
    precision: float
    recall: float
    f: float

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "overall": {"num": self.overall_num, "den": self.overall_den,
                        "pct": _pct(self.overall_num, self.overall_den)},
            "parsable": {"num": self.parsable_num, "den": self.parsable_den,
                         "pct": _pct(self.parsable_num, self.parsable_den)},
            "precision": self.precision,
            "recall": self.recall,
            "f": self.f,
        }


_NAMES = {"pcfg": "PCFG", "pmpg": "PMPG", "combined": "PCFG+PMPG"}


@dataclass
class Report:
    config: dict
    total: int
    unparsable: int
    rows: list[ModelRow]
    gold_in_top_n: int = 0
    results: dict[str, list[SentenceResult]] = field(default_factory=dict, repr=False)

    @property
    def parsable(self) -> int:
        return self.total - self.unparsable

    def row(self, model: str) -> ModelRow:
        return next(r for r in self.rows if r.model == model)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "counts": {"total": self.total, "parsable": self.parsable,
                       "unparsable": self.unparsable, "gold_in_top_n": self.gold_in_top_n},
            "rows": [r.to_dict() for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        head = ("Disambiguator", f"Parse Accuracy (/{self.total})", "%", "F",
                f"Parse Accuracy on parsable sentences (/{self.parsable})", "%")
        body = [(_NAMES.get(r.model, r.model), str(r.overall_num),
                 "%.1f" % _pct(r.overall_num, r.overall_den), "%.1f" % (100 * r.f),
                 str(r.parsable_num), "%.1f" % _pct(r.parsable_num, r.parsable_den))
                for r in self.rows]
        widths = [max(len(row[i]) for row in [head, *body]) for i in range(len(head))]
        lines = []
        for row in [head, *body]:
            cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
            lines.append("  ".join(cells).rstrip())
        lines.insert(1, "-" * len(lines[0]))
        lines.append("")
        lines.append(f"unparsable: {self.unparsable}/{self.total}")
        return "\n".join(lines) + "\n"


def _propose(model: str, forest, grammar, index, config: CombinerConfig) -> Tree:
    if model == "pcfg":
        return rank_pcfg(forest, grammar, 1)[0].tree
    if model == "pmpg":
        return rank_pmpg_forest(forest, index, grammar, 1)[0].tree
    if model == "combined":
        return rank_combined(forest, grammar, index, config)[0].tree
    raise ValueError(f"unknown model {model!r}")


def evaluate_fold(train: Sequence[Tree], test: Sequence[tuple[int, Tree]],
                  models: Sequence[str], config: CombinerConfig,
                  start_symbols=None, exclude_preterminals: bool = True):
    """Induce from ``train``, parse and disambiguate ``test``.

    Returns per-model SentenceResult lists and the number of test sentences
    whose gold tree is among the PCFG's ``top_n`` parses.
    """
    grammar = induce(train)
    index = build_index(train)
    results: dict[str, list[SentenceResult]] = {m: [] for m in models}
    in_top_n = 0
    for i, gold in test:
        forest = parse(gold.leaves(), grammar, start_symbols)
        if isinstance(forest, Unparsable):
            counts = bracket_counts(None, gold, exclude_preterminals)
            for m in models:
                results[m].append(SentenceResult(i, "unparsable", None, False, counts))
            continue
        if any(r.tree == gold for r in kbest(forest, grammar, config.top_n)):
            in_top_n += 1
        for m in models:
            tree = _propose(m, forest, grammar, index, config)
            results[m].append(SentenceResult(
                i, "parsed", tree, exact_match(tree, gold),
                bracket_counts(tree, gold, exclude_preterminals)))
    return results, in_top_n


def crossval(corpus: Corpus, fold_count: int = 10, seed: int = DEFAULT_SEED,
             models: Iterable[str] = MODELS, config: CombinerConfig = CombinerConfig(),
             start_symbols=None, exclude_preterminals: bool = True, jobs: int = 1) -> Report:
    requested = set(models)
    if not requested or requested - set(MODELS):
        raise ValueError(f"unknown or empty model set: {sorted(requested)}")
    models = [m for m in MODELS if m in requested]
    split = split_folds(corpus, fold_count, seed)
    starts = None if start_symbols is None else sorted(start_symbols)
    tasks = []
    for k in range(fold_count):
        train = [corpus[i] for i in split.train_ids(k)]
        test = [(i, corpus[i]) for i in split.fold(k)]
        tasks.append((train, test, models, config, starts, exclude_preterminals))
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            outputs = list(pool.map(_fold_task, tasks))
    else:
        outputs = [_fold_task(t) for t in tasks]

    merged: dict[str, list[SentenceResult]] = {m: [] for m in models}
    in_top_n = 0
    for results, hits in outputs:
        in_top_n += hits
        for m in models:
            merged[m].extend(results[m])
    for m in models:
        merged[m].sort(key=lambda r: r.id)

    total = len(corpus)
    unparsable = sum(1 for r in merged[models[0]] if r.status == "unparsable")
    rows = []
    for m in models:
        exact = sum(r.exact_match for r in merged[m])
        p, r, f, _ = prf(merged[m])
        rows.append(ModelRow(m, exact, total, exact, total - unparsable, p, r, f))
    cfg = {"fold_count": fold_count, "seed": seed, "models": models,
           "top_n": config.top_n, "weight_n": config.weight_n,
           "pruned_numerator": config.pruned_numerator,
           "start_symbols": starts, "exclude_preterminals": exclude_preterminals}
    return Report(cfg, total, unparsable, rows, in_top_n, merged)


def _fold_task(args):
    return evaluate_fold(*args)
