import numpy as np
import pytest

from silva.aggregation import combine_node, objective
from silva.core import Internal, Leaf, NodeSignal, NuclearityLabel
from silva.synthetic import random_document


def all_labeled_trees(lo, hi):
    """Every labeled binary tree over leaves lo..hi, by plain recursion."""
    if lo == hi:
        yield Leaf(lo)
        return
    for k in range(lo, hi):
        for left in all_labeled_trees(lo, k):
            for right in all_labeled_trees(k + 1, hi):
                for label in NuclearityLabel:
                    yield Internal(label, left, right)


def evaluate_tree(tree, doc, cfg):
    """Bottom-up signal of one tree, independent of any chart machinery."""
    if isinstance(tree, Leaf):
        edu = doc.edus[tree.index - 1]
        return NodeSignal(edu.sentiment, edu.attention)
    return combine_node(
        evaluate_tree(tree.left, doc, cfg), evaluate_tree(tree.right, doc, cfg), tree.label, cfg.aggregation
    )


def brute_force_distance(doc, cfg):
    n = len(doc)
    return min(
        objective(doc.gold_polarity, evaluate_tree(t, doc, cfg).sentiment, cfg.distance_kind)
        for t in all_labeled_trees(1, n)
    )


def random_shape(n, rng, labels=True):
    if n == 1:
        return Leaf(1)

    def build(start, size):
        if size == 1:
            return Leaf(start)
        k = int(rng.integers(1, size))
        label = NuclearityLabel(int(rng.integers(3))) if labels else NuclearityLabel.NN
        return Internal(label, build(start, k), build(start + k, size - k))

    return build(1, n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_doc(rng):
    def make(n, doc_id="doc"):
        return random_document(n, rng, doc_id)

    return make
