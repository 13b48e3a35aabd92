"""Micro-averaged constituent precision between treebanks, and baseline trees.

Constituents are internal-node spans. Nuclearity mode additionally requires
the node's ternary label to agree. Counts are pooled over all documents before
dividing. Both trees over ``n`` EDUs contribute ``n - 1`` constituents
(``n - 2`` with ``exclude_root``), so precision and recall coincide.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Mapping, Union

import numpy as np

from .core import DiscourseTree, Internal, Leaf, NuclearityLabel, iter_nodes
from .errors import CorpusMismatch, EduCountMismatch
from .treebank import TreebankRecord

MODES = ("structure", "nuclearity")

Treebank = Union[Mapping[str, DiscourseTree], Iterable[TreebankRecord]]


@dataclass(frozen=True)
class EvalReport:
    mode: str
    matched: int
    total: int
    precision: float
    recall: float

    def as_dict(self) -> dict:
        return asdict(self)

    def table(self) -> str:
        rows = [("mode", self.mode), ("matched", str(self.matched)), ("total", str(self.total)),
                ("precision", f"{self.precision:.2f}"), ("recall", f"{self.recall:.2f}")]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def as_treebank(treebank: Treebank) -> dict[str, DiscourseTree]:
    if isinstance(treebank, Mapping):
        return dict(treebank)
    out = {}
    for rec in treebank:
        if rec.doc_id in out:
            raise CorpusMismatch(f"duplicate doc_id {rec.doc_id!r}")
        out[rec.doc_id] = rec.tree
    return out


def constituents(tree: DiscourseTree, mode: str = "structure", exclude_root: bool = False) -> set:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    out = set()
    for node in iter_nodes(tree):
        if not isinstance(node, Internal):
            continue
        if exclude_root and node is tree:
            continue
        out.add((node.start, node.end, node.label) if mode == "nuclearity" else (node.start, node.end))
    return out


def micro_precision(pred: Treebank, ref: Treebank, mode: str = "structure", exclude_root: bool = False) -> EvalReport:
    pred = as_treebank(pred)
    ref = as_treebank(ref)
    if pred.keys() != ref.keys():
        only_pred = sorted(pred.keys() - ref.keys())[:5]
        only_ref = sorted(ref.keys() - pred.keys())[:5]
        raise CorpusMismatch(f"doc_id sets differ (pred only: {only_pred}, ref only: {only_ref})")
    matched = pred_total = ref_total = 0
    for doc_id in sorted(ref):
        p, r = pred[doc_id], ref[doc_id]
        if p.end != r.end:
            raise EduCountMismatch(f"{doc_id}: pred has {p.end} EDUs, ref has {r.end}")
        cp = constituents(p, mode, exclude_root)
        cr = constituents(r, mode, exclude_root)
        matched += len(cp & cr)
        pred_total += len(cp)
        ref_total += len(cr)
    precision = 100.0 * matched / pred_total if pred_total else 100.0
    recall = 100.0 * matched / ref_total if ref_total else 100.0
    return EvalReport(mode, matched, pred_total, precision, recall)


def _chain(n: int, label: NuclearityLabel, right: bool) -> DiscourseTree:
    if right:
        tree = Leaf(n)
        for i in range(n - 1, 0, -1):
            tree = Internal(label, Leaf(i), tree)
    else:
        tree = Leaf(1)
        for i in range(2, n + 1):
            tree = Internal(label, tree, Leaf(i))
    return tree


def right_branching(n: int, label: NuclearityLabel = NuclearityLabel.NN) -> DiscourseTree:
    return _chain(n, NuclearityLabel(label), right=True)


def left_branching(n: int, label: NuclearityLabel = NuclearityLabel.NN) -> DiscourseTree:
    return _chain(n, NuclearityLabel(label), right=False)


def _catalan(k: int) -> int:
    return math.comb(2 * k, k) // (k + 1)


def random_tree(n: int, rng: np.random.Generator, label_policy="uniform") -> DiscourseTree:
    """Tree drawn uniformly over shapes by sequential split choice.

    The left child size ``k`` is drawn with probability proportional to the
    number of shapes it admits, ``Catalan(k-1) * Catalan(n-k-1)``, which makes
    every shape equally likely. ``label_policy`` is ``"uniform"`` or a fixed label.
    """
    if n < 1:
        raise ValueError("n must be at least 1")

    def label():
        if label_policy == "uniform":
            return NuclearityLabel(int(rng.integers(3)))
        return NuclearityLabel(label_policy)

    def build(start, size):
        if size == 1:
            return Leaf(start)
        weights = [_catalan(k - 1) * _catalan(size - k - 1) for k in range(1, size)]
        total = sum(weights)
        k = 1 + int(rng.choice(size - 1, p=[w / total for w in weights]))
        lab = label()
        return Internal(lab, build(start, k), build(start + k, size - k))

    return build(1, n)
