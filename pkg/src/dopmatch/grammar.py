"""Treebank grammar induction with relative-frequency rule probabilities."""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .treebank import Corpus, Tree


class Rule(NamedTuple):
    lhs: str
    rhs: tuple[str, ...]

    def __str__(self):
        return "%s -> %s" % (self.lhs, " ".join(self.rhs))


class CoverageError(KeyError):
    """A tree uses a rule the grammar does not contain."""

    def __init__(self, rule: Rule):
        super().__init__(f"rule not in grammar: {rule}")
        self.rule = rule

    def __str__(self):
        return self.args[0]


def tree_rules(tree: Tree) -> Iterable[Rule]:
    """Rules of all internal nodes, in pre-order."""
    for node in tree.internal_nodes():
        yield Rule(node.label, tuple(c.label for c in node.children))


class Grammar:
    """Immutable n-ary PCFG estimated from rule counts.

    ``roots`` counts the root labels of the trees the grammar was read off;
    they are the default start symbols for parsing.
    """

    def __init__(self, counts: dict[Rule, int], roots: dict[str, int] | None = None):
        self._counts = dict(counts)
        if any(c <= 0 for c in self._counts.values()):
            raise ValueError("rule counts must be positive")
        for rule in self._counts:
            if not rule.rhs:
                raise ValueError(f"empty right-hand side for {rule.lhs}")
        self.roots = dict(roots or {})
        self.lhs_totals: dict[str, int] = Counter()
        for rule, c in self._counts.items():
            self.lhs_totals[rule.lhs] += c
        self.lhs_totals = dict(self.lhs_totals)
        self._logprob = {r: math.log(c / self.lhs_totals[r.lhs])
                         for r, c in self._counts.items()}

    def __len__(self):
        return len(self._counts)

    def __contains__(self, rule) -> bool:
        return rule in self._counts

    def __iter__(self):
        return iter(sorted(self._counts))

    @property
    def rules(self) -> list[Rule]:
        return sorted(self._counts)

    @property
    def start_symbols(self) -> frozenset[str]:
        return frozenset(self.roots)

    def count(self, rule: Rule) -> int:
        return self._counts.get(rule, 0)

    def prob(self, rule: Rule) -> float:
        if rule not in self._counts:
            raise CoverageError(rule)
        return self._counts[rule] / self.lhs_totals[rule.lhs]

    def logprob(self, rule: Rule) -> float:
        try:
            return self._logprob[rule]
        except KeyError:
            raise CoverageError(rule) from None

    def to_jsonl(self) -> str:
        lines = [json.dumps({"lhs": r.lhs, "rhs": list(r.rhs),
                             "count": self._counts[r], "prob": self.prob(r)})
                 for r in self.rules]
        lines += [json.dumps({"root": label, "count": self.roots[label]})
                  for label in sorted(self.roots)]
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_jsonl(cls, text: str) -> Grammar:
        counts, roots = {}, {}
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            obj = json.loads(line)
            if "root" in obj:
                roots[obj["root"]] = int(obj["count"])
                continue
            rule = Rule(obj["lhs"], tuple(obj["rhs"]))
            if rule in counts:
                raise ValueError(f"line {lineno}: duplicate rule {rule}")
            counts[rule] = int(obj["count"])
        return cls(counts, roots)


def induce(corpus: Corpus | Iterable[Tree]) -> Grammar:
    counts: Counter[Rule] = Counter()
    roots: Counter[str] = Counter()
    for tree in corpus:
        if tree.is_leaf:
            raise ValueError(f"cannot induce rules from bare leaf {tree.label!r}")
        roots[tree.label] += 1
        counts.update(tree_rules(tree))
    if not counts:
        raise ValueError("cannot induce a grammar from an empty corpus")
    return Grammar(counts, roots)


@dataclass(frozen=True)
class CoverageEntry:
    id: int
    missing: tuple[Rule, ...]

    @property
    def covered(self) -> bool:
        return not self.missing


def coverage(grammar: Grammar, corpus: Corpus | Iterable[Tree]) -> list[CoverageEntry]:
    report = []
    for i, tree in enumerate(corpus):
        missing = []
        for rule in tree_rules(tree):
            if rule not in grammar and rule not in missing:
                missing.append(rule)
        report.append(CoverageEntry(i, tuple(missing)))
    return report
