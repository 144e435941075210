"""Bottom-up chart parsing of POS-tag sequences into a packed parse forest.

N-ary rules are matched with dotted edges over a prefix trie of right-hand
sides, filling the chart in order of increasing span length.  Unary rules
over a constituent are closed per span; a chain of such unary nodes may not
repeat a label, which keeps the forest finite.  Forest nodes are therefore
keyed by ``(label, start, end, chain)`` where ``chain`` is the set of labels
of the unary nodes at the top of the item (empty for an item built by any
other rule).
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .grammar import Grammar, Rule
from .kbest import LazyKBest
from .treebank import Tree

SATURATION = 2 ** 63 - 1
# slack when collecting ties at the k-best boundary; internal sums and
# pre-order re-scoring differ only by rounding
TIE_EPSILON = 1e-9


@dataclass(frozen=True)
class ForestNode:
    label: str
    start: int
    end: int
    chain: frozenset | None  # None marks a leaf (an input tag)
    derivations: tuple[tuple[Rule, tuple[int, ...]], ...] = ()

    @property
    def is_leaf(self) -> bool:
        return self.chain is None


@dataclass(frozen=True)
class ParseForest:
    """Nodes are in topological order: children precede their parents."""

    tags: tuple[str, ...]
    nodes: tuple[ForestNode, ...]
    roots: tuple[int, ...]

    def to_json(self) -> str:
        items = []
        for i, node in enumerate(self.nodes):
            items.append({
                "id": i, "label": node.label, "start": node.start, "end": node.end,
                "leaf": node.is_leaf,
                "derivations": [{"rule": str(rule), "children": list(children)}
                                for rule, children in node.derivations],
            })
        return json.dumps({"tags": list(self.tags), "roots": list(self.roots),
                           "items": items})

    def trees(self) -> Iterable[Tree]:
        """Enumerate every tree in the forest (exponential; for small inputs)."""
        memo: dict[int, list[Tree]] = {}

        def expand(v: int) -> list[Tree]:
            if v in memo:
                return memo[v]
            node = self.nodes[v]
            if node.is_leaf:
                out = [Tree(node.label)]
            else:
                out = []
                for rule, children in node.derivations:
                    combos = [()]
                    for c in children:
                        combos = [prev + (t,) for prev in combos for t in expand(c)]
                    out.extend(Tree(rule.lhs, combo) for combo in combos)
            memo[v] = out
            return out

        for r in self.roots:
            yield from expand(r)


@dataclass(frozen=True)
class Unparsable:
    """Parse result when no tree with a start-symbol root covers the tags."""

    tags: tuple[str, ...]
    reason: str = "no complete parse"


@dataclass(frozen=True)
class RankedParse:
    tree: Tree
    score: float
    model: str
    rank: int = 0
    extra: dict = field(default_factory=dict, compare=False)


class ParseCount(NamedTuple):
    count: int
    saturated: bool


class _TrieNode:
    __slots__ = ("next", "rules", "id")

    def __init__(self, id_: int):
        self.next: dict[str, _TrieNode] = {}
        self.rules: list[Rule] = []
        self.id = id_


def _build_trie(grammar: Grammar) -> list[_TrieNode]:
    nodes = [_TrieNode(0)]
    for rule in grammar.rules:
        node = nodes[0]
        for sym in rule.rhs:
            nxt = node.next.get(sym)
            if nxt is None:
                nxt = node.next[sym] = _TrieNode(len(nodes))
                nodes.append(nxt)
            node = nxt
        node.rules.append(rule)
    return nodes


_trie_cache: dict[int, tuple[Grammar, list[_TrieNode]]] = {}


def _trie_for(grammar: Grammar) -> list[_TrieNode]:
    cached = _trie_cache.get(id(grammar))
    if cached is None or cached[0] is not grammar:
        if len(_trie_cache) > 8:
            _trie_cache.clear()
        cached = _trie_cache[id(grammar)] = (grammar, _build_trie(grammar))
    return cached[1]


def parse(tags: Sequence[str], grammar: Grammar,
          start_symbols: Iterable[str] | None = None) -> ParseForest | Unparsable:
    """Build the packed forest of all trees over ``tags`` rooted in a start symbol."""
    tags = tuple(tags)
    if not tags:
        raise ValueError("cannot parse an empty tag sequence")
    if not len(grammar):
        raise ValueError("cannot parse with an empty grammar")
    starts = grammar.start_symbols if start_symbols is None else frozenset(start_symbols)
    trie = _trie_for(grammar)
    root = trie[0]
    n = len(tags)

    keys: list[tuple] = []
    index: dict[tuple, int] = {}
    derivs: list[list] = []

    def node_id(key) -> tuple[int, bool]:
        i = index.get(key)
        if i is not None:
            return i, False
        i = index[key] = len(keys)
        keys.append(key)
        derivs.append([])
        return i, True

    # passive[(i, j)]: label -> node ids; active[(i, j)]: trie node id -> backpointers
    passive: dict[tuple[int, int], dict[str, list[int]]] = defaultdict(lambda: defaultdict(list))
    active: dict[tuple[int, int], dict[int, list]] = {}
    for i, tag in enumerate(tags):
        v, _ = node_id((tag, i, i + 1, None))
        passive[i, i + 1][tag].append(v)

    def child_tuples(span, tid, memo):
        key = (span, tid)
        if key in memo:
            return memo[key]
        out = []
        for prev, child in active[span][tid]:
            if prev is None:
                out.append((child,))
            else:
                out.extend(t + (child,) for t in child_tuples(prev[:2], prev[2], memo))
        memo[key] = out
        return out

    memo: dict = {}
    for length in range(1, n + 1):
        for i in range(n - length + 1):
            j = i + length
            edges: dict[int, list] = defaultdict(list)
            for k in range(i + 1, j):
                left = active.get((i, k))
                right = passive.get((k, j))
                if not left or not right:
                    continue
                for tid in left:
                    tnode = trie[tid]
                    if len(tnode.next) < len(right):
                        pairs = ((s, right[s]) for s in tnode.next if s in right)
                    else:
                        pairs = ((s, ids) for s, ids in right.items() if s in tnode.next)
                    for sym, ids in pairs:
                        nxt = tnode.next[sym].id
                        edges[nxt].extend(((i, k, tid), c) for c in ids)
            here = passive[i, j]
            # completed rules with two or more children
            active[i, j] = edges
            for tid in list(edges):
                for rule in trie[tid].rules:
                    v, created = node_id((rule.lhs, i, j, frozenset()))
                    derivs[v].extend((rule, t) for t in child_tuples((i, j), tid, memo))
                    if created:
                        here[rule.lhs].append(v)
            # single-child rules, closed under unary chains
            agenda = [v for ids in list(here.values()) for v in ids]
            while agenda:
                c = agenda.pop()
                label, _, _, chain = keys[c]
                tnode = root.next.get(label)
                if tnode is None:
                    continue
                for rule in tnode.rules:
                    if chain is None:
                        new_chain = frozenset()
                    elif rule.lhs in chain:
                        continue
                    else:
                        new_chain = chain | {rule.lhs}
                    v, created = node_id((rule.lhs, i, j, new_chain))
                    derivs[v].append((rule, (c,)))
                    if created:
                        here[rule.lhs].append(v)
                        agenda.append(v)
            # start new dotted edges with every passive item of this span
            for label, ids in here.items():
                tnode = root.next.get(label)
                if tnode is not None and tnode.next:
                    edges[tnode.id].extend((None, c) for c in ids)
            for tid in [t for t in edges if not trie[t].next]:
                del edges[tid]

    roots = [v for ids in passive[0, n].values() for v in ids
             if keys[v][3] is not None and keys[v][0] in starts]
    if not roots:
        return Unparsable(tags)
    return _compact(tags, keys, derivs, roots)


def _compact(tags, keys, derivs, roots) -> ParseForest:
    """Keep nodes reachable from the roots, renumbered in topological order."""
    order: list[int] = []
    state: dict[int, int] = {}
    for r in sorted(roots, key=lambda v: _node_sort_key(keys[v])):
        stack = [(r, False)]
        while stack:
            v, done = stack.pop()
            if done:
                if state[v] == 1:
                    state[v] = 2
                    order.append(v)
                continue
            if v in state:
                continue
            state[v] = 1
            stack.append((v, True))
            for _, children in reversed(derivs[v]):
                for c in reversed(children):
                    if c not in state:
                        stack.append((c, False))
    remap = {old: new for new, old in enumerate(order)}
    nodes = []
    for old in order:
        label, start, end, chain = keys[old]
        ds = tuple((rule, tuple(remap[c] for c in children)) for rule, children in derivs[old])
        nodes.append(ForestNode(label, start, end, chain, ds))
    new_roots = tuple(sorted(remap[r] for r in roots))
    return ParseForest(tags, tuple(nodes), new_roots)


def _node_sort_key(key):
    label, start, end, chain = key
    return (label, start, end, sorted(chain) if chain is not None else [])


def count_parses(forest: ParseForest) -> ParseCount:
    """Exact number of trees in the forest, capped at 2**63 - 1."""
    counts = [0] * len(forest.nodes)
    for v, node in enumerate(forest.nodes):
        if node.is_leaf:
            counts[v] = 1
            continue
        total = 0
        for _, children in node.derivations:
            prod = 1
            for c in children:
                prod *= counts[c]
            total += prod
        counts[v] = total
    total = sum(counts[r] for r in forest.roots)
    if total > SATURATION:
        return ParseCount(SATURATION, True)
    return ParseCount(total, False)


def forest_hypergraph(forest: ParseForest, grammar: Grammar):
    """Edge lists for lazy k-best; the last node is a virtual super-root."""
    edges = []
    for node in forest.nodes:
        if node.is_leaf:
            edges.append([(0.0, ())])
        else:
            edges.append([(grammar.logprob(rule), children)
                          for rule, children in node.derivations])
    edges.append([(0.0, (r,)) for r in forest.roots])
    return edges


def _make_tree(forest: ParseForest):
    def make(v, e, children):
        if v == len(forest.nodes):
            return children[0]
        node = forest.nodes[v]
        if node.is_leaf:
            return Tree(node.label)
        return Tree(node.label, tuple(children))
    return make


def kbest(forest: ParseForest, grammar: Grammar, k: int, model: str = "pcfg") -> list[RankedParse]:
    """The k most probable trees, exact, ordered by score then serialized form.

    Reported scores are recomputed by a pre-order sum over the tree so that they
    equal ``tree_log_prob`` bit for bit.
    """
    from .pcfg import tree_log_prob

    if k < 1:
        raise ValueError("k must be at least 1")
    edges = forest_hypergraph(forest, grammar)
    top = len(forest.nodes)
    lazy = LazyKBest(edges)
    make = _make_tree(forest)
    pool = []
    cutoff = None
    for d in lazy.iter(top):
        if cutoff is not None and d[0] < cutoff:
            break
        tree = lazy.build(top, d, make)
        pool.append((tree_log_prob(tree, grammar), str(tree), tree))
        if len(pool) == k:
            cutoff = d[0] - TIE_EPSILON
    pool.sort(key=lambda x: (-x[0], x[1]))
    return [RankedParse(tree, score, model, rank)
            for rank, (score, _, tree) in enumerate(pool[:k], 1)]
