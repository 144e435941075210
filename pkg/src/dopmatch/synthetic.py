"""Synthetic air-travel treebank over POS tags.

The generator mimics an air-travel request corpus: flight noun phrases with
embedded from/to PPs, temporal and directional PPs attached to the verb,
wh-questions and imperatives.  Trees carry semantic (-TMP, -DIR) and numeric
flags so that corpus editing has something to remove, and a few sentences
exceed the default length cap.
"""
from __future__ import annotations

import random

from .treebank import DEFAULT_MAX_LEAVES, Corpus, Tree

DEFAULT_SIZE = 200
DEFAULT_SYNTH_SEED = 2000


def T(label, *children) -> Tree:
    return Tree(label, tuple(Tree(c) if isinstance(c, str) else c for c in children))


class _Generator:
    def __init__(self, seed: int):
        self.r = random.Random(seed)

    def pick(self, *weighted):
        """Choose among (weight, thunk) pairs."""
        total = sum(w for w, _ in weighted)
        x = self.r.uniform(0, total)
        for w, thunk in weighted:
            x -= w
            if x <= 0:
                return thunk()
        return weighted[-1][1]()

    def flag(self, label, flag):
        return label + flag if self.r.random() < 0.8 else label

    def index(self, label):
        return label + "-%d" % self.r.randint(1, 3) if self.r.random() < 0.08 else label

    def city(self):
        return self.pick((6, lambda: T("NP", "nnp")), (1, lambda: T("NP", "nnp", "nnp")))

    def place_pp(self, prep="in"):
        return T("PP", prep, self.city())

    def head_np(self):
        return self.pick(
            (5, lambda: T("NP", "dt", "nn")),
            (4, lambda: T("NP", "nns")),
            (2, lambda: T("NP", "dt", "nns")),
            (1, lambda: T("NP", "dt", "jj", "nn")),
            (1, lambda: T("NP", "cd", "nns")))

    def flight_np(self):
        head = self.head_np()
        return self.pick(
            (6, lambda: T("NP", head, self.place_pp("in"), self.place_pp("to"))),
            (3, lambda: T("NP", head, self.place_pp("in"))),
            (1, lambda: T("NP", head, self.place_pp("to"))),
            (1, lambda: T("NP", head, T("PP", "in", self.city()), T("PP", "to", self.city()),
                          T(self.flag("PP", "-TMP"), "in", T("NP", "nn")))))

    def time_pp(self):
        return T(self.flag("PP", "-TMP"), "in", self.pick(
            (3, lambda: T("NP", "nn")), (1, lambda: T("NP", "dt", "nn")), (1, lambda: T("NP", "cd"))))

    def dir_pp(self, prep):
        return T(self.flag("PP", "-DIR"), prep, self.city())

    def code(self):
        return ["nn", "nn"] + [self.r.choice(["sym", "cd", "nn"])
                               for _ in range(self.r.randint(1, 4))]

    def subject(self):
        return T(self.index("NP-SBJ"), "prp")

    def sentence(self) -> Tree:
        return self.pick(
            # request: object NP with embedded from/to PPs, optional temporal PP
            (9, lambda: T("S", self.subject(),
                          T("VP", "vbp", self.flight_np(),
                            *([self.time_pp()] if self.r.random() < 0.25 else [])))),
            # I leave from X to Y
            (4, lambda: T("S", self.subject(),
                          T("VP", "vbp", self.dir_pp("in"), self.dir_pp("to"),
                            *([T(self.flag("NP", "-TMP"), "nnp")] if self.r.random() < 0.3 else [])))),
            # I take it from X to Y
            (3, lambda: T("S", self.subject(),
                          T("VP", "vbp", T("NP", "prp"), self.dir_pp("in"), self.dir_pp("to")))),
            # show me the flights from X to Y
            (6, lambda: T("S", T("VP", "vb", T("NP", "prp"), self.flight_np()))),
            # list the fares
            (3, lambda: T("S", T("VP", "vb", self.head_np()))),
            # wh-question with inverted auxiliary and verb-attached from/to PPs
            (3, lambda: T("S", T("WHNP", "wdt", "nns"),
                          T("SQ", "md", self.subject(),
                            T("VP", "vb", self.dir_pp("in"), self.dir_pp("to"))))),
            # what flights go from X to Y
            (3, lambda: T("S", T("WHNP", "wdt", "nns"),
                          T("SQ", T("VP", "vbp", self.dir_pp("in"), self.dir_pp("to"))))),
            # I need the fare of the flight in the morning
            (3, lambda: T("S", self.subject(),
                          T("VP", "vbp", self.head_np(), self.time_pp()))),
            # does the flight from X stop in Y
            (2, lambda: T("S", T("SQ", "vbz", T("NP-SBJ", self.head_np(), self.place_pp("in")),
                                 T("VP", "vb", self.place_pp("in"))))),
            # what is restriction code AP/57: a flat, rarely repeated NP
            (2, lambda: T("S", T("VP", "vb", T("NP", "prp"), T("NP", *self.code())))),
            # show me the flights from X to Y and the fares (long)
            (2, lambda: T("S", T("VP", "vb", T("NP", "prp"),
                                 T("NP", self.flight_np(), "cc", self.flight_np())))))


def generate(size: int = DEFAULT_SIZE, seed: int = DEFAULT_SYNTH_SEED,
             max_leaves: int = DEFAULT_MAX_LEAVES) -> Corpus:
    """Raw (unedited) corpus with exactly ``size`` trees of at most ``max_leaves``
    leaves, interleaved with the longer trees drawn on the way."""
    gen = _Generator(seed)
    trees, kept = [], 0
    while kept < size:
        tree = gen.sentence()
        trees.append(tree)
        if len(tree.leaves()) <= max_leaves:
            kept += 1
    return Corpus(tuple(trees))
