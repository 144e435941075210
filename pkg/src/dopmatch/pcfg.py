"""PCFG disambiguation: a tree scores the product of its rule probabilities."""
from __future__ import annotations

from .chart import ParseForest, RankedParse, kbest
from .grammar import Grammar, tree_rules
from .treebank import Tree

MODEL = "pcfg"


def tree_log_prob(tree: Tree, grammar: Grammar) -> float:
    """Sum of rule log-probabilities over internal nodes, in pre-order.

    POS-tag leaves contribute nothing. Raises CoverageError for a rule the
    grammar lacks.
    """
    total = 0.0
    for rule in tree_rules(tree):
        total += grammar.logprob(rule)
    return total


def rank_pcfg(forest: ParseForest, grammar: Grammar, limit: int = 1) -> list[RankedParse]:
    return kbest(forest, grammar, limit, model=MODEL)
