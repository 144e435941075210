"""PCFG+PMPG system combination.

The PCFG proposes its ``top_n`` most probable parses; each is rescored as

    log P_pcfg(tree) - weight_n * log(max(1, non-indexed nodes))

i.e. the rule-probability product divided by the number of nodes that could
not be retrieved from memory, raised to ``weight_n``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .chart import ParseForest, RankedParse, kbest
from .grammar import CoverageError, Grammar
from .pcfg import tree_log_prob
from .pmpg import SubtreeIndex, annotate, pmpg_score, prune
from .treebank import Tree

MODEL = "combined"
DEFAULT_TOP_N = 10
DEFAULT_WEIGHT_N = 1.0

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CombinerConfig:
    top_n: int = DEFAULT_TOP_N
    weight_n: float = DEFAULT_WEIGHT_N
    # score the numerator on the pruned tree instead of the full tree
    pruned_numerator: bool = False

    def __post_init__(self):
        if self.top_n < 1:
            raise ValueError("top_n must be at least 1")
        if not self.weight_n >= 0:
            raise ValueError("weight_n must be non-negative")


def combined_score(tree: Tree, grammar: Grammar, index: SubtreeIndex, weight_n: float,
                   pruned_numerator: bool = False) -> float:
    if pruned_numerator:
        s = pmpg_score(tree, index, grammar)
        numerator, non_indexed = s.score, s.expanding
    else:
        numerator = tree_log_prob(tree, grammar)
        non_indexed = prune(annotate(tree, index)).non_indexed_count
    return numerator - weight_n * math.log(max(1, non_indexed))


def rank_combined(forest: ParseForest, grammar: Grammar, index: SubtreeIndex,
                  config: CombinerConfig = CombinerConfig()) -> list[RankedParse]:
    """Rescore the PCFG n-best list; ties go to the higher PCFG score, then canonical order."""
    rescored = []
    for cand in kbest(forest, grammar, config.top_n):
        try:
            score = combined_score(cand.tree, grammar, index, config.weight_n,
                                   config.pruned_numerator)
        except CoverageError as err:
            log.warning("dropping candidate %s: %s", cand.tree, err)
            continue
        rescored.append((score, cand))
    rescored.sort(key=lambda sc: (-sc[0], -sc[1].score, str(sc[1].tree)))
    return [RankedParse(cand.tree, score, MODEL, rank, {"pcfg": cand.score})
            for rank, (score, cand) in enumerate(rescored, 1)]
