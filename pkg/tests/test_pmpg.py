import random
from pathlib import Path

import pytest

from dopmatch.chart import parse
from dopmatch.grammar import CoverageError, Grammar, Rule, induce
from dopmatch.pcfg import tree_log_prob
from dopmatch.pmpg import (SubtreeIndex, annotate, build_index, pmpg_score, prune, rank_pmpg,
                           rank_pmpg_forest)
from dopmatch.treebank import Corpus, Tree, parse_bracketed, read_treebank

from oracles import naive_pmpg, random_tree, splice

FIXTURES = Path(__file__).parent / "fixtures"
T = Tree.from_string

# the boxed-node example: the object NP is known as a whole, the VP is not
EXAMPLE = T("(S (NP-SBJ prp) (VP vbp (NP (NP dt nn) (PP in (NP nnp)))))")
EXAMPLE_TRAIN = parse_bracketed("\n".join([
    "(S (NP-SBJ prp) (VP vbz (NP (NP dt nn) (PP in (NP nnp)))))",
    "(S (NP-SBJ prp) (VP vbp (NP dt nn)))",
]))


def test_build_index_keys():
    index = build_index(parse_bracketed("(S (NP dt nn) (VP vbz))"))
    assert sorted(c for _, c, _ in index.entries()) == sorted(
        ["(NP dt nn)", "(VP vbz)", "(S (NP dt nn) (VP vbz))"])
    assert "dt" not in index


def test_build_index_set_semantics():
    one = build_index(parse_bracketed("(S (NP dt nn) (VP vbz))"))
    two = build_index(parse_bracketed("(S (NP dt nn) (VP vbz))\n(S (NP dt nn) (VP vbz))"))
    assert len(one) == len(two) == 3
    assert two.count("(NP dt nn)") == 2
    assert two.stats["NP"] == (1, 2)


def test_build_index_empty():
    with pytest.raises(ValueError):
        build_index(Corpus())


def test_index_jsonl_round_trip():
    index = build_index(EXAMPLE_TRAIN)
    again = SubtreeIndex.from_jsonl(index.to_jsonl())
    assert list(again.entries()) == list(index.entries())


def test_annotate_example():
    annotation = annotate(EXAMPLE, build_index(EXAMPLE_TRAIN))
    marks = {str(node): r for node, r in annotation.nodes()}
    assert marks["(NP (NP dt nn) (PP in (NP nnp)))"]
    assert marks["(NP dt nn)"] and marks["(PP in (NP nnp))"] and marks["(NP nnp)"]
    assert marks["(NP-SBJ prp)"]
    assert not marks[str(EXAMPLE.children[1])]
    assert not marks[str(EXAMPLE)]


def test_annotate_empty_index_and_self_match():
    empty = SubtreeIndex({})
    assert not any(annotate(EXAMPLE, empty).retrieved)
    assert all(annotate(EXAMPLE, build_index([EXAMPLE])).retrieved)


def test_prune_example():
    pruned = prune(annotate(EXAMPLE, build_index(EXAMPLE_TRAIN)))
    assert str(pruned.tree) == "(S NP-SBJ (VP vbp NP))"
    assert pruned.non_indexed_count == 2


def test_prune_extremes():
    full = prune(annotate(EXAMPLE, build_index([EXAMPLE])))
    assert full.tree == Tree("S") and full.non_indexed_count == 0
    none = prune(annotate(EXAMPLE, SubtreeIndex({})))
    assert none.tree == EXAMPLE and none.non_indexed_count == 7


def test_score_example():
    g = induce(list(EXAMPLE_TRAIN) + [EXAMPLE])
    s = pmpg_score(EXAMPLE, build_index(EXAMPLE_TRAIN), g)
    expected = g.logprob(Rule("S", ("NP-SBJ", "VP"))) + g.logprob(Rule("VP", ("vbp", "NP")))
    assert s.score == expected
    assert s.expanding == 2


def test_score_fully_retrieved_is_zero():
    g = induce([EXAMPLE])
    assert pmpg_score(EXAMPLE, build_index([EXAMPLE]), g).score == 0.0


def test_score_missing_rule():
    g = Grammar({Rule("S", ("NP-SBJ", "VP")): 1})
    with pytest.raises(CoverageError):
        pmpg_score(EXAMPLE, build_index(EXAMPLE_TRAIN), g)


def test_rank_pmpg_fully_retrieved_first():
    train = [T("(S (NP dt nn) (VP vb))"), T("(S (NP dt nn) (VP vb (NP dt nn)))")]
    g = induce(train + [T("(S (NP (NP dt nn) (VP vb)))")])
    other = T("(S (NP (NP dt nn) (VP vb)))")
    ranked = rank_pmpg([other, train[0]], build_index(train), g)
    assert [r.tree for r in ranked] == [train[0], other]
    assert ranked[0].score == 0.0 and ranked[0].model == "pmpg"


def test_rank_pmpg_single_and_empty():
    g = induce([EXAMPLE])
    (only,) = rank_pmpg([EXAMPLE], build_index(EXAMPLE_TRAIN), g)
    assert only.rank == 1
    with pytest.raises(ValueError):
        rank_pmpg([], build_index(EXAMPLE_TRAIN), g)


def test_rank_pmpg_drops_uncovered(caplog):
    g = induce(EXAMPLE_TRAIN)
    uncovered = T("(S (NP-SBJ prp) (VP vbp (NP dt nn) (XP zz)))")
    ranked = rank_pmpg([uncovered, EXAMPLE_TRAIN[1]], build_index(EXAMPLE_TRAIN), g)
    assert [r.tree for r in ranked] == [EXAMPLE_TRAIN[1]]
    assert "dropping candidate" in caplog.text


def test_tie_break_prefers_fewer_expanding_nodes():
    # equal scores: every rule is certain, so retrieval decides via node count
    g = Grammar({Rule("S", ("A",)): 1, Rule("S", ("B",)): 1, Rule("A", ("x",)): 1,
                 Rule("B", ("x",)): 1})
    index = build_index([T("(A x)")])
    a, b = T("(S (A x))"), T("(S (B x))")
    assert pmpg_score(a, index, g).score == pmpg_score(b, index, g).score
    ranked = rank_pmpg([b, a], index, g)
    assert [r.tree for r in ranked] == [a, b]


def test_spurious_sbar_pmpg_prefers_retrieved_analysis():
    train = read_treebank(FIXTURES / "spurious_sbar.mrg")
    g, index = induce(train), build_index(train)
    correct = T("(S (WHNP wdt nns) (SQ vbp (NP-SBJ prp) (VP vb (PP in (NP nnp)) (PP to (NP nnp)))))")
    wrong = T("(S (NP-SBJ (NP wdt nns) (SBAR (S (VP vbp (NP prp))))) (VP vb (PP in (NP nnp)) (PP to (NP nnp))))")
    ranked = rank_pmpg([correct, wrong], index, g)
    assert ranked[0].tree == wrong
    forest = parse(correct.leaves(), g)
    assert rank_pmpg_forest(forest, index, g, 1)[0].tree == wrong


def _random_case(rng):
    pool = [random_tree(rng) for _ in range(6)]
    corpus = [rng.choice(pool) for _ in range(rng.randint(1, 20))]
    r = rng.random()
    if r < 0.3:
        candidate = rng.choice(corpus)
    elif r < 0.7:
        candidate = splice(rng, random_tree(rng), corpus)
    else:
        candidate = random_tree(rng)
    if len(candidate.leaves()) > 9:
        candidate = random_tree(rng)
    return corpus, candidate


def test_oracle_equivalence_random():
    rng = random.Random(3)
    for _ in range(100):
        corpus, candidate = _random_case(rng)
        g = induce(corpus + [candidate])
        index = build_index(corpus)
        flags, count, score = naive_pmpg(candidate, corpus, g)
        annotation = annotate(candidate, index)
        assert annotation.retrieved == flags
        assert prune(annotation).non_indexed_count == count
        assert pmpg_score(candidate, index, g).score == score


def test_downward_closure_and_monotone_index():
    rng = random.Random(8)
    for _ in range(100):
        corpus, candidate = _random_case(rng)
        small = annotate(candidate, build_index(corpus[: len(corpus) // 2 + 1]))
        big = annotate(candidate, build_index(corpus))
        assert all(b or not s for s, b in zip(small.retrieved, big.retrieved))
        nodes = big.nodes()
        for i, (node, retrieved) in enumerate(nodes):
            if retrieved:
                for other, r in nodes[i + 1:]:
                    if any(other is d for d in _descendants(node)):
                        assert r


def _descendants(node):
    for c in node.children:
        if c.children:
            yield c
            yield from _descendants(c)


def test_pruning_never_lowers_score():
    rng = random.Random(9)
    for _ in range(100):
        corpus, candidate = _random_case(rng)
        g = induce(corpus + [candidate])
        assert pmpg_score(candidate, build_index(corpus), g).score >= tree_log_prob(candidate, g)


def test_forest_ranking_matches_candidate_ranking():
    rng = random.Random(21)
    checked = 0
    while checked < 40:
        corpus = [random_tree(rng) for _ in range(rng.randint(2, 15))]
        g, index = induce(corpus), build_index(corpus[1:])
        forest = parse(rng.choice(corpus).leaves(), g)
        trees = list(forest.trees())
        if len(trees) > 3000:
            continue
        expected = rank_pmpg(trees, index, g)
        for limit in (1, 5, len(trees)):
            got = rank_pmpg_forest(forest, index, g, limit)
            assert [(r.tree, r.score) for r in got] == [(r.tree, r.score) for r in expected[:limit]]
        checked += 1
