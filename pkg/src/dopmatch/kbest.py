"""Lazy k-best derivation extraction over an acyclic weighted hypergraph.

Every node owns a list of incoming hyperedges ``(weight, tails)``; the score
of a derivation is the edge weight plus the scores of the sub-derivations
chosen at its tails.  Derivations of a node are produced best first, each
one computed only when requested (lazy frontier expansion in the style of
Huang and Chiang's algorithm 3).
"""
from __future__ import annotations

import heapq
from typing import Callable, Iterator, Sequence

Edge = tuple[float, tuple[int, ...]]
# (score, edge index, per-tail ranks)
Derivation = tuple[float, int, tuple[int, ...]]


class LazyKBest:
    def __init__(self, edges: Sequence[Sequence[Edge]]):
        self.edges = edges
        self._found: dict[int, list[Derivation]] = {}
        self._cand: dict[int, list] = {}
        self._seen: dict[int, set] = {}

    def _score(self, v: int, e: int, ranks: tuple[int, ...]) -> float | None:
        weight, tails = self.edges[v][e]
        total = weight
        for u, r in zip(tails, ranks):
            d = self.kth(u, r)
            if d is None:
                return None
            total += d[0]
        return total

    def _push(self, v: int, e: int, ranks: tuple[int, ...]):
        if (e, ranks) in self._seen[v]:
            return
        score = self._score(v, e, ranks)
        if score is None:
            return
        self._seen[v].add((e, ranks))
        heapq.heappush(self._cand[v], (-score, e, ranks))

    def kth(self, v: int, k: int) -> Derivation | None:
        """The k-th best (0-based) derivation of node v, or None."""
        found = self._found.get(v)
        if found is None:
            found = self._found[v] = []
            self._cand[v] = []
            self._seen[v] = set()
            for e, (_, tails) in enumerate(self.edges[v]):
                self._push(v, e, (0,) * len(tails))
        cand = self._cand[v]
        while len(found) <= k:
            if found:
                _, e, ranks = found[-1]
                for i in range(len(ranks)):
                    self._push(v, e, ranks[:i] + (ranks[i] + 1,) + ranks[i + 1:])
            if not cand:
                break
            neg, e, ranks = heapq.heappop(cand)
            found.append((-neg, e, ranks))
        return found[k] if k < len(found) else None

    def iter(self, v: int) -> Iterator[Derivation]:
        k = 0
        while (d := self.kth(v, k)) is not None:
            yield d
            k += 1

    def build(self, v: int, derivation: Derivation, make: Callable):
        """Fold a derivation bottom-up with ``make(node, edge_index, children)``."""
        _, e, ranks = derivation
        _, tails = self.edges[v][e]
        children = [self.build(u, self._found[u][r], make) for u, r in zip(tails, ranks)]
        return make(v, e, children)
