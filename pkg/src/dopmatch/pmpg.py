"""Pattern-matching probabilistic grammar.

Every complete subtree of the training trees is remembered by its canonical
bracketed form.  A candidate parse is matched against that memory bottom-up:
a node is *retrieved* when its whole subtree, down to the POS tags, was seen
in training.  Maximal retrieved subtrees are pruned to bare labels and only
the remaining (non-indexed) nodes contribute rule probabilities to the score.
"""
from __future__ import annotations

import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from itertools import product
from typing import Iterable, NamedTuple, Sequence

from .chart import TIE_EPSILON, ParseForest, RankedParse
from .grammar import CoverageError, Grammar, tree_rules
from .kbest import LazyKBest
from .treebank import Corpus, Tree

MODEL = "pmpg"

log = logging.getLogger(__name__)


def _root_of(canonical: str) -> str:
    return canonical[1:].split(" ", 1)[0]


class SubtreeIndex:
    """Set of canonical subtree strings, grouped by root label, with counts."""

    def __init__(self, counts: dict[str, int]):
        self._by_root: dict[str, dict[str, int]] = defaultdict(dict)
        for canonical, c in counts.items():
            self._by_root[_root_of(canonical)][canonical] = c
        self._by_root = dict(self._by_root)

    def __contains__(self, key) -> bool:
        canonical = key if isinstance(key, str) else str(key)
        if not canonical.startswith("("):
            return False
        group = self._by_root.get(_root_of(canonical))
        return group is not None and canonical in group

    def __len__(self) -> int:
        return sum(len(g) for g in self._by_root.values())

    def count(self, key) -> int:
        canonical = key if isinstance(key, str) else str(key)
        return self._by_root.get(_root_of(canonical), {}).get(canonical, 0)

    @property
    def stats(self) -> dict[str, tuple[int, int]]:
        """root label -> (distinct subtrees, occurrences)."""
        return {label: (len(g), sum(g.values())) for label, g in sorted(self._by_root.items())}

    def entries(self) -> Iterable[tuple[str, str, int]]:
        for label in sorted(self._by_root):
            group = self._by_root[label]
            for canonical in sorted(group):
                yield label, canonical, group[canonical]

    def to_jsonl(self) -> str:
        return "".join(json.dumps({"root": r, "canonical": c, "count": n}) + "\n"
                       for r, c, n in self.entries())

    @classmethod
    def from_jsonl(cls, text: str) -> SubtreeIndex:
        counts = {}
        for line in text.splitlines():
            if line.strip():
                obj = json.loads(line)
                counts[obj["canonical"]] = int(obj["count"])
        return cls(counts)


def _canonical_forms(tree: Tree) -> list[str]:
    """Canonical strings of the internal nodes of ``tree``, in pre-order."""
    out: list[str] = []

    def walk(node: Tree) -> str:
        if node.is_leaf:
            return node.label
        slot = len(out)
        out.append("")
        out[slot] = "(%s %s)" % (node.label, " ".join(walk(c) for c in node.children))
        return out[slot]

    walk(tree)
    return out


def build_index(corpus: Corpus | Iterable[Tree]) -> SubtreeIndex:
    counts: Counter[str] = Counter()
    for tree in corpus:
        counts.update(_canonical_forms(tree))
    if not counts:
        raise ValueError("cannot build a subtree index from an empty corpus")
    return SubtreeIndex(counts)


@dataclass(frozen=True)
class MatchAnnotation:
    """``retrieved[i]`` belongs to the i-th internal node of ``tree`` in pre-order."""

    tree: Tree
    retrieved: tuple[bool, ...]

    def nodes(self) -> list[tuple[Tree, bool]]:
        return list(zip(self.tree.internal_nodes(), self.retrieved))


@dataclass(frozen=True)
class PrunedTree:
    tree: Tree
    non_indexed_count: int


class PMPGScore(NamedTuple):
    score: float
    expanding: int
    canonical: str

    @property
    def key(self):
        """Sort key: higher score, then fewer expanding nodes, then canonical form."""
        return (-self.score, self.expanding, self.canonical)


def annotate(tree: Tree, index: SubtreeIndex) -> MatchAnnotation:
    return MatchAnnotation(tree, tuple(c in index for c in _canonical_forms(tree)))


def _internal_size(tree: Tree) -> int:
    return sum(1 for _ in tree.internal_nodes())


def prune(annotation: MatchAnnotation) -> PrunedTree:
    flags = iter(annotation.retrieved)
    expanding = 0

    def walk(node: Tree) -> Tree:
        nonlocal expanding
        if node.is_leaf:
            return node
        if next(flags):
            for _ in range(_internal_size(node) - 1):
                next(flags)
            return Tree(node.label)
        expanding += 1
        return Tree(node.label, tuple(walk(c) for c in node.children))

    pruned = walk(annotation.tree)
    return PrunedTree(pruned, expanding)


def pmpg_score(tree: Tree, index: SubtreeIndex, grammar: Grammar) -> PMPGScore:
    pruned = prune(annotate(tree, index))
    total = 0.0
    for rule in tree_rules(pruned.tree):
        total += grammar.logprob(rule)
    return PMPGScore(total, pruned.non_indexed_count, str(tree))


def rank_pmpg(candidates: Sequence[Tree], index: SubtreeIndex, grammar: Grammar,
              limit: int | None = None) -> list[RankedParse]:
    """Order candidate trees by PMPG score; duplicates are collapsed.

    Candidates with a missing rule at a non-retrieved node are dropped with a
    logged warning.
    """
    if not candidates:
        raise ValueError("rank_pmpg needs at least one candidate")
    scored = {}
    for tree in candidates:
        try:
            s = pmpg_score(tree, index, grammar)
        except CoverageError as err:
            log.warning("dropping candidate %s: %s", tree, err)
            continue
        scored.setdefault(s.canonical, (s, tree))
    ranked = sorted(scored.values(), key=lambda st: st[0].key)
    if limit is not None:
        ranked = ranked[:limit]
    return [RankedParse(tree, s.score, MODEL, rank, {"non_indexed": s.expanding})
            for rank, (s, tree) in enumerate(ranked, 1)]


def _retrievable(forest: ParseForest, index: SubtreeIndex) -> list[dict[str, Tree]]:
    """For each forest node, the indexed subtrees it can derive."""
    found: list[dict[str, Tree]] = []
    for node in forest.nodes:
        if node.is_leaf:
            found.append({node.label: Tree(node.label)})
            continue
        here: dict[str, Tree] = {}
        for rule, children in node.derivations:
            options = [found[c] for c in children]
            if not all(options):
                continue
            for combo in product(*(sorted(o.items()) for o in options)):
                canonical = "(%s %s)" % (rule.lhs, " ".join(k for k, _ in combo))
                if canonical in index and canonical not in here:
                    here[canonical] = Tree(rule.lhs, tuple(t for _, t in combo))
        found.append(here)
    return found


def rank_pmpg_forest(forest: ParseForest, index: SubtreeIndex, grammar: Grammar,
                     limit: int = 1) -> list[RankedParse]:
    """PMPG ranking of every tree in a forest without enumerating the forest.

    Each node gets two kinds of hyperedges: an atomic, zero-cost edge per
    indexed subtree it can derive, and its ordinary rule edges.  A tree's best
    derivation takes the atomic edge at every maximal retrieved node, so the
    first derivation found for each tree carries its PMPG score.
    """
    if limit < 1:
        raise ValueError("limit must be at least 1")
    retrievable = _retrievable(forest, index)
    edges, atoms = [], []
    for v, node in enumerate(forest.nodes):
        if node.is_leaf:
            edges.append([(0.0, ())])
            atoms.append([Tree(node.label)])
            continue
        trees = [retrievable[v][c] for c in sorted(retrievable[v])]
        atoms.append(trees)
        edges.append([(0.0, ())] * len(trees)
                     + [(grammar.logprob(rule), children) for rule, children in node.derivations])
    top = len(forest.nodes)
    edges.append([(0.0, (r,)) for r in forest.roots])

    def make(v, e, children):
        if v == top:
            return children[0]
        if e < len(atoms[v]):
            return atoms[v][e]
        rule, _ = forest.nodes[v].derivations[e - len(atoms[v])]
        return Tree(rule.lhs, tuple(children))

    lazy = LazyKBest(edges)
    pool: dict[str, Tree] = {}
    cutoff = None
    for d in lazy.iter(top):
        if cutoff is not None and d[0] < cutoff:
            break
        tree = lazy.build(top, d, make)
        pool.setdefault(str(tree), tree)
        if cutoff is None and len(pool) == limit:
            cutoff = d[0] - TIE_EPSILON
    return rank_pmpg(list(pool.values()), index, grammar, limit)
