"""Bracketed treebank I/O, corpus editing and fold splitting.

Trees are written one per line in Penn style::

    (S (NP-SBJ prp) (VP vbp (NP dt nn)))

Leaves are POS tags; every parenthesized group is a constituent whose first
token is its label.
"""
from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

DEFAULT_SEED = 1999
DEFAULT_MAX_LEAVES = 15
DEFAULT_STRIP_FLAGS = frozenset({"-TMP", "-DIR"})
DEFAULT_KEEP_FLAGS = frozenset({"-SBJ"})

_BAD_LABEL = re.compile(r"[\s()]")


class TreebankError(ValueError):
    """Malformed bracketed input; carries the 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True, slots=True, repr=False)
class Tree:
    """An immutable labeled ordered tree. A node without children is a leaf."""

    label: str
    children: tuple[Tree, ...] = ()

    def __post_init__(self):
        if not self.label or _BAD_LABEL.search(self.label):
            raise ValueError(f"invalid tree label {self.label!r}")
        if not isinstance(self.children, tuple):
            object.__setattr__(self, "children", tuple(self.children))

    @classmethod
    def from_string(cls, text: str) -> Tree:
        trees = parse_bracketed(text).trees
        if len(trees) != 1:
            raise ValueError(f"expected exactly one tree, got {len(trees)}")
        return trees[0]

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def is_preterminal(self) -> bool:
        return len(self.children) == 1 and self.children[0].is_leaf

    def leaves(self) -> tuple[str, ...]:
        if self.is_leaf:
            return (self.label,)
        out: list[str] = []
        stack = [self]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node.label)
            else:
                stack.extend(reversed(node.children))
        return tuple(out)

    def internal_nodes(self) -> Iterator[Tree]:
        """Yield internal nodes in pre-order."""
        stack = [self]
        while stack:
            node = stack.pop()
            if node.children:
                yield node
                stack.extend(reversed(node.children))

    def production(self) -> tuple[str, tuple[str, ...]]:
        return self.label, tuple(child.label for child in self.children)

    def __repr__(self) -> str:
        return f"Tree({str(self)!r})"

    def __str__(self) -> str:
        if self.is_leaf:
            return self.label
        return "(%s %s)" % (self.label, " ".join(map(str, self.children)))


@dataclass(frozen=True)
class Corpus:
    trees: tuple[Tree, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))

    @property
    def ids(self) -> range:
        return range(len(self.trees))

    def __len__(self) -> int:
        return len(self.trees)

    def __iter__(self) -> Iterator[Tree]:
        return iter(self.trees)

    def __getitem__(self, i: int) -> Tree:
        return self.trees[i]

    def subset(self, ids: Iterable[int]) -> Corpus:
        return Corpus(tuple(self.trees[i] for i in ids))


@dataclass(frozen=True)
class FoldSplit:
    fold_count: int
    seed: int
    assignment: tuple[int, ...] = field(default=())

    def fold(self, k: int) -> list[int]:
        return [i for i, f in enumerate(self.assignment) if f == k]

    def train_ids(self, k: int) -> list[int]:
        return [i for i, f in enumerate(self.assignment) if f != k]

    def to_json(self) -> str:
        return json.dumps({"fold_count": self.fold_count, "seed": self.seed,
                           "assignment": list(self.assignment)})

    @classmethod
    def from_json(cls, text: str) -> FoldSplit:
        obj = json.loads(text)
        return cls(obj["fold_count"], obj["seed"], tuple(obj["assignment"]))


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _parse_line(line: str, lineno: int) -> Tree:
    # stack entries: [label, children, column of the opening bracket]
    stack: list[list] = []
    result = None
    for m in _TOKEN.finditer(line):
        tok, col = m.group(), m.start() + 1
        if result is not None:
            raise TreebankError("trailing material after tree", lineno, col)
        if tok == "(":
            stack.append([None, [], col])
        elif tok == ")":
            if not stack:
                raise TreebankError("unbalanced ')'", lineno, col)
            label, children, opened = stack.pop()
            if label is None:
                raise TreebankError("empty label", lineno, opened)
            if not children:
                raise TreebankError(f"node {label!r} has no children", lineno, opened)
            node = Tree(label, tuple(children))
            if stack:
                stack[-1][1].append(node)
            else:
                result = node
        else:
            if not stack:
                raise TreebankError(f"token {tok!r} outside brackets", lineno, col)
            top = stack[-1]
            if top[0] is None and not top[1]:
                top[0] = tok
            elif top[0] is None:
                raise TreebankError("empty label", lineno, top[2])
            else:
                top[1].append(Tree(tok))
    if stack:
        raise TreebankError("unbalanced '('", lineno, stack[-1][2])
    if result is None:
        raise TreebankError("no tree on line", lineno, 1)
    return result


def parse_bracketed(text: str) -> Corpus:
    """Parse one bracketed tree per non-empty line; '#' lines are comments."""
    trees = []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        trees.append(_parse_line(line, lineno))
    return Corpus(tuple(trees))


def serialize_bracketed(corpus: Corpus | Sequence[Tree]) -> str:
    trees = corpus.trees if isinstance(corpus, Corpus) else corpus
    return "".join(str(t) + "\n" for t in trees)


def read_treebank(path) -> Corpus:
    with open(path, encoding="utf-8") as f:
        return parse_bracketed(f.read())


def write_treebank(path, corpus: Corpus) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(serialize_bracketed(corpus))


def strip_flags(label: str, semantic_flags=DEFAULT_STRIP_FLAGS,
                keep_flags=DEFAULT_KEEP_FLAGS) -> str:
    """Remove semantic and numeric function flags from a constituent label.

    >>> strip_flags("NP-TMP-2")
    'NP'
    >>> strip_flags("NP-SBJ-1")
    'NP-SBJ'
    """
    # -NONE-, -LRB- and friends are labels, not flagged categories
    if label.startswith("-"):
        return label
    base, *flags = label.split("-")
    kept = []
    for flag in flags:
        suffix = "-" + flag
        if suffix in keep_flags:
            kept.append(flag)
        elif flag.isdigit() or suffix in semantic_flags or not flag:
            continue
        else:
            kept.append(flag)
    return "-".join([base, *kept])


def _edit_tree(tree: Tree, semantic_flags, keep_flags) -> Tree:
    if tree.is_leaf:
        return tree
    return Tree(strip_flags(tree.label, semantic_flags, keep_flags),
                tuple(_edit_tree(c, semantic_flags, keep_flags) for c in tree.children))


def edit_labels(corpus: Corpus, semantic_flags=DEFAULT_STRIP_FLAGS,
                keep_flags=DEFAULT_KEEP_FLAGS) -> Corpus:
    semantic_flags = frozenset(semantic_flags)
    keep_flags = frozenset(keep_flags)
    return Corpus(tuple(_edit_tree(t, semantic_flags, keep_flags) for t in corpus))


def filter_by_length(corpus: Corpus, max_leaves: int = DEFAULT_MAX_LEAVES) -> Corpus:
    if max_leaves < 1:
        raise ValueError("max_leaves must be at least 1")
    return Corpus(tuple(t for t in corpus if len(t.leaves()) <= max_leaves))


def split_folds(corpus: Corpus | int, fold_count: int, seed: int = DEFAULT_SEED) -> FoldSplit:
    """Seeded shuffle of tree ids followed by round-robin fold assignment."""
    size = corpus if isinstance(corpus, int) else len(corpus)
    if fold_count < 2:
        raise ValueError("fold_count must be at least 2")
    if fold_count > size:
        raise ValueError(f"fold_count {fold_count} exceeds corpus size {size}")
    ids = list(range(size))
    random.Random(seed).shuffle(ids)
    assignment = [0] * size
    for pos, i in enumerate(ids):
        assignment[i] = pos % fold_count
    return FoldSplit(fold_count, seed, tuple(assignment))
