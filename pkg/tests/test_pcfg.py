import math
import random
from pathlib import Path

import pytest

from dopmatch.chart import kbest, parse
from dopmatch.grammar import CoverageError, Grammar, Rule, induce
from dopmatch.pcfg import rank_pcfg, tree_log_prob
from dopmatch.treebank import Tree, read_treebank

from oracles import enumerate_trees, oracle_log_prob, random_grammar, sample_tags

FIXTURES = Path(__file__).parent / "fixtures"
R = Rule


def test_certain_rule_scores_zero():
    g = Grammar({R("A", ("x",)): 4})
    assert tree_log_prob(Tree.from_string("(A x)"), g) == 0.0


def test_two_half_rules():
    g = Grammar({R("S", ("A", "B")): 1, R("S", ("B",)): 1, R("A", ("x",)): 1,
                 R("A", ("y",)): 1, R("B", ("y",)): 1})
    t = Tree.from_string("(S (A x) (B y))")
    assert tree_log_prob(t, g) == pytest.approx(math.log(0.25), abs=1e-15)
    assert math.exp(tree_log_prob(t, g)) == pytest.approx(0.5 * 0.5 * 1.0)


def test_missing_rule_named():
    g = Grammar({R("A", ("x",)): 1})
    with pytest.raises(CoverageError, match=r"A -> y"):
        tree_log_prob(Tree.from_string("(A y)"), g)


def test_flat_bias():
    g = induce(read_treebank(FIXTURES / "flat_bias.mrg"))
    flat = Tree.from_string("(S (NP-SBJ prp) (VP vbp (NP dt nn) (PP in (NP nnp)) (PP to (NP nnp))))")
    embedded = Tree.from_string(
        "(S (NP-SBJ prp) (VP vbp (NP (NP dt nn) (PP in (NP nnp)) (PP to (NP nnp)))))")
    assert tree_log_prob(flat, g) > tree_log_prob(embedded, g)
    # P(VP -> vbp NP PP PP) / (P(VP -> vbp NP) P(NP -> NP PP PP)) = (1/13) / ((12/13)(1/20))
    ratio = math.exp(tree_log_prob(flat, g) - tree_log_prob(embedded, g))
    assert ratio == pytest.approx(5 / 3, rel=1e-12)
    (top,) = rank_pcfg(parse(flat.leaves(), g), g, 1)
    assert top.tree == flat


def test_rank_pcfg_unambiguous():
    g = induce([Tree.from_string("(S (A x) (B y))")])
    (only,) = rank_pcfg(parse(["x", "y"], g), g, 5)
    assert only.score == tree_log_prob(only.tree, g) and only.model == "pcfg"


def test_rank_pcfg_matches_oracle():
    rng = random.Random(5)
    done = 0
    while done < 40:
        g = random_grammar(rng)
        tags = sample_tags(rng, g)
        try:
            trees = enumerate_trees(g, tags, g.start_symbols)
        except OverflowError:
            continue
        if not trees:
            continue
        expected = sorted(trees, key=lambda t: (-oracle_log_prob(t, g), str(t)))
        forest = parse(tags, g)
        ranked = rank_pcfg(forest, g, len(trees))
        assert [r.tree for r in ranked] == expected
        assert rank_pcfg(forest, g, 1)[0].tree == kbest(forest, g, 1)[0].tree == expected[0]
        assert rank_pcfg(forest, g, 3) == rank_pcfg(forest, g, 3)
        done += 1


def test_adding_nodes_lowers_probability():
    # all rule probabilities < 1: embedding via extra rules strictly lowers the score
    g = Grammar({R("S", ("NP", "VP")): 1, R("S", ("VP",)): 1, R("VP", ("vb", "NP")): 1,
                 R("VP", ("vb", "NP", "PP")): 1, R("NP", ("NP", "PP")): 1, R("NP", ("nn",)): 1,
                 R("PP", ("in", "NP")): 1, R("PP", ("in",)): 1})
    smaller = Tree.from_string("(S (VP vb (NP nn)))")
    bigger = Tree.from_string("(S (VP vb (NP (NP nn) (PP in (NP nn)))))")
    assert tree_log_prob(bigger, g) < tree_log_prob(smaller, g)
    flat = Tree.from_string("(S (VP vb (NP nn) (PP in (NP nn))))")
    assert tree_log_prob(flat, g) > tree_log_prob(bigger, g)
