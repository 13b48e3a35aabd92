"""Domain types: EDUs, documents, binary discourse trees with nuclearity.

Spans are closed intervals over 1-based EDU indices. Every internal node is a
constituent, including the root, so a tree over ``n`` EDUs has ``n - 1`` of them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Union

from .errors import (
    DuplicateLeaf,
    EmptyDocument,
    InvalidRange,
    LeafCountMismatch,
    NonContiguousSpan,
)


class NuclearityLabel(enum.IntEnum):
    """Ternary nuclearity of an internal node; integer order is the tie-break order."""

    NN = 0
    NS = 1
    SN = 2


@dataclass(frozen=True, slots=True)
class Leaf:
    index: int

    @property
    def start(self) -> int:
        return self.index

    @property
    def end(self) -> int:
        return self.index

    @property
    def span(self) -> tuple[int, int]:
        return (self.index, self.index)


@dataclass(frozen=True, slots=True)
class Internal:
    label: NuclearityLabel
    left: DiscourseTree
    right: DiscourseTree
    start: int = field(init=False, compare=False, repr=False)
    end: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "label", NuclearityLabel(self.label))
        object.__setattr__(self, "start", self.left.start)
        object.__setattr__(self, "end", self.right.end)

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)

    @property
    def split(self) -> int:
        """Index of the last EDU covered by the left child."""
        return self.left.end


DiscourseTree = Union[Leaf, Internal]


@dataclass(frozen=True, slots=True)
class EDU:
    index: int
    text: str = ""
    sentiment: float = 0.0
    attention: float = 1.0

    def __post_init__(self):
        if not -1.0 <= self.sentiment <= 1.0:
            raise InvalidRange(f"EDU {self.index}: sentiment {self.sentiment} outside [-1, 1]")
        if not 0.0 <= self.attention <= 1.0:
            raise InvalidRange(f"EDU {self.index}: attention {self.attention} outside [0, 1]")


@dataclass(frozen=True, slots=True)
class NodeSignal:
    sentiment: float
    attention: float

    def __post_init__(self):
        if not -1.0 <= self.sentiment <= 1.0:
            raise InvalidRange(f"sentiment {self.sentiment} outside [-1, 1]")
        if not self.attention > 0.0:
            raise InvalidRange(f"attention must be positive, got {self.attention}")


@dataclass(frozen=True)
class Document:
    doc_id: str
    gold_polarity: float
    edus: tuple[EDU, ...]

    def __post_init__(self):
        object.__setattr__(self, "edus", tuple(self.edus))
        if not self.doc_id:
            raise InvalidRange("doc_id must be non-empty")
        if not self.edus:
            raise EmptyDocument(f"document {self.doc_id!r} has no EDUs")
        if not -1.0 <= self.gold_polarity <= 1.0:
            raise InvalidRange(f"gold polarity {self.gold_polarity} outside [-1, 1]")
        for pos, edu in enumerate(self.edus, start=1):
            if edu.index != pos:
                raise InvalidRange(f"EDU at position {pos} carries index {edu.index}")

    def __len__(self) -> int:
        return len(self.edus)

    @classmethod
    def from_scores(cls, doc_id, gold_polarity, sentiments, attentions, texts=None):
        texts = texts if texts is not None else [""] * len(sentiments)
        edus = [
            EDU(i, t, float(s), float(a))
            for i, (t, s, a) in enumerate(zip(texts, sentiments, attentions), start=1)
        ]
        return cls(doc_id, float(gold_polarity), tuple(edus))


@dataclass(frozen=True)
class ScoredTree:
    """A candidate tree, its root aggregate and its distance to the gold polarity.

    ``distance`` is whatever objective the generator ranked by: absolute error
    by default, squared error when configured so.
    """

    tree: DiscourseTree
    signal: NodeSignal
    distance: float


class TreeStats(NamedTuple):
    n_edus: int
    height: int
    balance: float


def iter_nodes(tree: DiscourseTree) -> Iterator[DiscourseTree]:
    """Pre-order traversal, left before right, without recursion."""
    stack = [tree]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Internal):
            stack.append(node.right)
            stack.append(node.left)


def iter_postorder(tree: DiscourseTree) -> Iterator[DiscourseTree]:
    """Children before parents, leaves left to right."""
    stack = [(tree, False)]
    while stack:
        node, expanded = stack.pop()
        if isinstance(node, Internal) and not expanded:
            stack.append((node, True))
            stack.append((node.right, False))
            stack.append((node.left, False))
        else:
            yield node


def leaves(tree: DiscourseTree) -> list[int]:
    return [node.index for node in iter_nodes(tree) if isinstance(node, Leaf)]


def validate_tree(tree: DiscourseTree, n: int) -> None:
    """Raise the first violated invariant for a tree over ``n`` EDUs.

    Nodes are checked children first, leaves left to right. A repeated leaf raises ``DuplicateLeaf``,
    a leaf outside ``1..n`` or a wrong leaf total raises ``LeafCountMismatch``,
    and an internal node whose children are not adjacent raises
    ``NonContiguousSpan``.
    """
    seen = set()
    count = 0
    for node in iter_postorder(tree):
        if isinstance(node, Leaf):
            if node.index in seen:
                raise DuplicateLeaf(f"leaf {node.index} appears twice", node.span)
            if not 1 <= node.index <= n:
                raise LeafCountMismatch(f"leaf {node.index} outside 1..{n}", node.span)
            seen.add(node.index)
            count += 1
        elif isinstance(node, Internal):
            if node.left.end + 1 != node.right.start:
                raise NonContiguousSpan(
                    f"children {node.left.span} and {node.right.span} are not adjacent",
                    node.span,
                )
        else:
            raise TypeError(f"not a discourse tree node: {node!r}")
    if count != n or tree.span != (1, n):
        raise LeafCountMismatch(f"tree has {count} leaves spanning {tree.span}, expected {n}", tree.span)


def internal_spans(tree: DiscourseTree) -> set[tuple[int, int]]:
    return {node.span for node in iter_nodes(tree) if isinstance(node, Internal)}


def labeled_spans(tree: DiscourseTree) -> set[tuple[int, int, NuclearityLabel]]:
    return {(node.start, node.end, node.label) for node in iter_nodes(tree) if isinstance(node, Internal)}


def min_height(n: int) -> int:
    """ceil(log2(n)) computed exactly on integers."""
    return (n - 1).bit_length()


def tree_height(tree: DiscourseTree) -> int:
    height = 0
    stack = [(tree, 0)]
    while stack:
        node, depth = stack.pop()
        if isinstance(node, Internal):
            stack.append((node.left, depth + 1))
            stack.append((node.right, depth + 1))
        elif depth > height:
            height = depth
    return height


def balance_stat(height: int, n: int) -> float:
    if n < 2:
        return 1.0
    return height / min_height(n)


def tree_stats(tree: DiscourseTree) -> TreeStats:
    n = tree.end - tree.start + 1
    height = tree_height(tree)
    return TreeStats(n, height, balance_stat(height, n))


def chain_balance(n: int) -> float:
    """Balance of a pure chain over ``n`` EDUs, the worst possible value."""
    return balance_stat(n - 1, n) if n >= 2 else 1.0

