"""Treebank parsing with PCFG, pattern-matching (PMPG) and combined disambiguation."""
from .chart import ParseCount, ParseForest, RankedParse, Unparsable, count_parses, kbest, parse
from .combiner import CombinerConfig, combined_score, rank_combined
from .evaluation import crossval, exact_match, labeled_brackets, prf
from .grammar import CoverageError, Grammar, Rule, coverage, induce
from .pcfg import rank_pcfg, tree_log_prob
from .pmpg import (SubtreeIndex, annotate, build_index, pmpg_score, prune, rank_pmpg,
                   rank_pmpg_forest)
from .treebank import (Corpus, FoldSplit, Tree, TreebankError, edit_labels, filter_by_length,
                       parse_bracketed, serialize_bracketed, split_folds)

__version__ = "0.1.0"
