"""Beam-pruned CKY over EDU sequences, with an exhaustive oracle.

Every chart cell keeps at most ``beam_size`` scored subtrees. A cell either
keeps its top candidates (exploitation) or, with a probability that decays as
spans get longer, samples them from a softmax over negative distances
(exploration). The best candidate of a cell always survives.

Beam order ("D-TIE") is lexicographic on: distance, balance, split position,
nuclearity label, then the ranks of the two children in their own cells.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import repeat
from typing import Iterable, Iterator, Optional

import numpy as np

from . import _kernels
from ._accel import resolve_backend
from .aggregation import (
    DISTANCE_KINDS,
    AggregationConfig,
    combine_node,
    nuclearity_weights,
    objective,
)
from .core import (
    Document,
    Internal,
    Leaf,
    NodeSignal,
    NuclearityLabel,
    ScoredTree,
    tree_height,
)
from .errors import DegenerateAttention, EmptyDocument, InvalidRange, SilvaError, TooLarge

LABELS = tuple(NuclearityLabel)
DEFAULT_ORACLE_LIMIT = 10**6

# test-only negative control: reverses the distance order inside the kernels
_fault_reverse_order = False


@dataclass(frozen=True)
class GenerationConfig:
    beam_size: int = 10
    epsilon_max: float = 0.5
    temperature: float = 0.1
    seed: int = 0
    aggregation: AggregationConfig = field(default_factory=AggregationConfig)
    distance_kind: str = "absolute"
    oracle_limit: int = DEFAULT_ORACLE_LIMIT

    def __post_init__(self):
        if int(self.beam_size) != self.beam_size or self.beam_size < 1:
            raise InvalidRange(f"beam_size must be a positive integer, got {self.beam_size}")
        if not 0.0 <= self.epsilon_max <= 1.0:
            raise InvalidRange(f"epsilon_max must lie in [0, 1], got {self.epsilon_max}")
        if not self.temperature > 0.0:
            raise InvalidRange(f"temperature must be positive, got {self.temperature}")
        if not 0 <= self.seed < 2**64:
            raise InvalidRange(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.distance_kind not in DISTANCE_KINDS:
            raise InvalidRange(f"distance_kind must be one of {DISTANCE_KINDS}")

    def as_dict(self) -> dict:
        return {
            "beam_size": self.beam_size,
            "epsilon_max": self.epsilon_max,
            "temperature": self.temperature,
            "seed": self.seed,
            "w_nucleus": self.aggregation.w_nucleus,
            "w_satellite": self.aggregation.w_satellite,
            "distance": self.distance_kind,
        }


@dataclass(frozen=True)
class ChartCell:
    span: tuple[int, int]
    beam: tuple[ScoredTree, ...]


def count_labeled_trees(n: int) -> int:
    """Catalan(n - 1) * 3 ** (n - 1): labeled binary trees over ``n`` leaves."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return math.comb(2 * (n - 1), n - 1) // n * 3 ** (n - 1)


def beam_capacities(n: int, beam_size: int) -> list[int]:
    """Beam length reached by every cell of span length ``L`` (index L, 0 unused).

    The candidate count of a cell depends only on its length, so beam lengths
    are known before any scoring happens.
    """
    caps = [0, 1]
    for length in range(2, n + 1):
        m = 3 * sum(caps[l] * caps[length - l] for l in range(1, length))
        caps.append(min(beam_size, m))
    return caps


def exploration_rate(span_len: int, n: int, cfg: GenerationConfig) -> float:
    if not 2 <= span_len <= n:
        raise ValueError(f"span_len must lie in [2, {n}], got {span_len}")
    if n <= 2:
        return 0.0
    return cfg.epsilon_max * (1.0 - (span_len - 2) / (n - 2))


def exploration_schedule(n: int, cfg: GenerationConfig) -> np.ndarray:
    eps = np.zeros(n + 1)
    for length in range(2, n + 1):
        eps[length] = exploration_rate(length, n, cfg)
    return eps


def document_rng(seed: int, doc_id: str) -> np.random.Generator:
    """Per-document stream derived from (seed, doc_id) only."""
    digest = hashlib.blake2b(doc_id.encode("utf-8"), digest_size=16).digest()
    words = np.frombuffer(digest, dtype="<u4").tolist()
    return np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFF, seed >> 32, *words]))


class Chart:
    """Filled CKY chart. Public accessors take 1-based inclusive spans."""

    def __init__(self, doc: Document, cfg: GenerationConfig):
        n = len(doc)
        caps = beam_capacities(n, cfg.beam_size)
        width = max(caps[1:])
        self.doc = doc
        self.cfg = cfg
        self.n = n
        self.S = np.zeros((n, n, width))
        self.A = np.ones((n, n, width))
        self.D = np.zeros((n, n, width))
        self.H = np.zeros((n, n, width), dtype=np.int32)
        self.K = np.full((n, n, width), -1, dtype=np.int32)
        self.LAB = np.full((n, n, width), -1, dtype=np.int32)
        self.LR = np.full((n, n, width), -1, dtype=np.int32)
        self.RR = np.full((n, n, width), -1, dtype=np.int32)
        self.CNT = np.zeros((n, n), dtype=np.int64)

    def arrays(self):
        return self.S, self.A, self.D, self.H, self.K, self.LAB, self.LR, self.RR, self.CNT

    def beam_length(self, start: int, end: int) -> int:
        return int(self.CNT[start - 1, end - 1])

    def tree(self, start: int, end: int, rank: int = 0):
        stack = [(start - 1, end - 1, rank, False)]
        built = []
        while stack:
            i, j, r, expanded = stack.pop()
            if i == j:
                built.append(Leaf(i + 1))
            elif not expanded:
                k = int(self.K[i, j, r])
                stack.append((i, j, r, True))
                stack.append((k + 1, j, int(self.RR[i, j, r]), False))
                stack.append((i, k, int(self.LR[i, j, r]), False))
            else:
                right = built.pop()
                left = built.pop()
                built.append(Internal(NuclearityLabel(int(self.LAB[i, j, r])), left, right))
        return built[0]

    def scored(self, start: int, end: int, rank: int = 0) -> ScoredTree:
        i, j = start - 1, end - 1
        signal = NodeSignal(float(self.S[i, j, rank]), float(self.A[i, j, rank]))
        return ScoredTree(self.tree(start, end, rank), signal, float(self.D[i, j, rank]))

    def cell(self, start: int, end: int) -> ChartCell:
        beam = tuple(self.scored(start, end, r) for r in range(self.beam_length(start, end)))
        return ChartCell((start, end), beam)

    def best(self) -> ScoredTree:
        return self.scored(1, self.n, 0)


def fill_chart(
    doc: Document,
    cfg: GenerationConfig,
    rng: Optional[np.random.Generator] = None,
    backend: Optional[str] = None,
) -> Chart:
    if len(doc) == 0:
        raise EmptyDocument("document has no EDUs")
    backend = resolve_backend(backend)
    rng = document_rng(cfg.seed, doc.doc_id) if rng is None else rng
    sent = np.array([e.sentiment for e in doc.edus], dtype=np.float64)
    att = np.array([e.attention for e in doc.edus], dtype=np.float64)
    bad = np.flatnonzero(att <= 0.0)
    if bad.size:
        raise DegenerateAttention(f"{doc.doc_id}: EDU {bad[0] + 1} has zero attention")
    weights = [nuclearity_weights(label, cfg.aggregation) for label in LABELS]
    lam_l = np.array([w[0] for w in weights])
    lam_r = np.array([w[1] for w in weights])
    chart = Chart(doc, cfg)
    kernel = _kernels.fill_chart_numba if backend == "numba" else _kernels.fill_chart_numpy
    status = kernel(
        sent, att, float(doc.gold_polarity), lam_l, lam_r,
        cfg.distance_kind == "squared", int(cfg.beam_size),
        exploration_schedule(len(doc), cfg), float(cfg.temperature),
        -1.0 if _fault_reverse_order else 1.0, rng,
        *chart.arrays(),
    )
    if status == _kernels.DEGENERATE:
        raise DegenerateAttention(f"{doc.doc_id}: combined attention underflowed to zero")
    return chart


def beam_generate(doc: Document, cfg: GenerationConfig, backend: Optional[str] = None) -> ScoredTree:
    """Best root tree of the beam-pruned chart; deterministic given (doc, cfg)."""
    return fill_chart(doc, cfg, backend=backend).best()


def cell_candidates(left: ChartCell, right: ChartCell, doc: Document, cfg: GenerationConfig) -> list[ScoredTree]:
    """All pairings of the two beams under all three labels, in generation order."""
    if left.span[1] + 1 != right.span[0]:
        raise ValueError(f"spans {left.span} and {right.span} are not adjacent")
    out = []
    for label in LABELS:
        for lt in left.beam:
            for rt in right.beam:
                signal = combine_node(lt.signal, rt.signal, label, cfg.aggregation)
                distance = objective(doc.gold_polarity, signal.sentiment, cfg.distance_kind)
                out.append(ScoredTree(Internal(label, lt.tree, rt.tree), signal, distance))
    return out


def prune_beam(
    candidates: list[ScoredTree],
    span_len: int,
    n: int,
    cfg: GenerationConfig,
    rng: np.random.Generator,
    epsilon: Optional[float] = None,
) -> list[ScoredTree]:
    """Reduce one cell's candidates to at most ``beam_size`` trees.

    ``candidates`` should be the concatenation of :func:`cell_candidates` over
    splits; ties beyond split and label fall back to that input order. Passing
    ``epsilon`` overrides the span-length schedule.
    """
    if not candidates:
        raise ValueError("prune_beam needs at least one candidate")
    eps = exploration_rate(span_len, n, cfg) if epsilon is None else epsilon
    explore = rng.random() < eps
    ordered = sorted(
        candidates,
        key=lambda st: (st.tree.split, st.tree.label) if isinstance(st.tree, Internal) else (0, 0),
    )
    d = np.array([st.distance for st in ordered])
    h = np.array([tree_height(st.tree) for st in ordered])
    cap = min(cfg.beam_size, len(ordered))
    keep = _kernels.select_numpy(d, h, d, cap, explore, rng, cfg.temperature)
    return [ordered[i] for i in keep]


def exhaustive_best(doc: Document, cfg: GenerationConfig) -> ScoredTree:
    """Brute-force optimum over every labeled binary tree, D-TIE tie-breaking.

    Subtree lists are memoised per span but never pruned, so every one of the
    ``count_labeled_trees(n)`` root trees is scored.
    """
    n = len(doc)
    total = count_labeled_trees(n)
    if total > cfg.oracle_limit:
        raise TooLarge(f"{total} labeled trees over {n} EDUs exceed the oracle limit {cfg.oracle_limit}")
    gold = doc.gold_polarity
    agg = cfg.aggregation
    kind = cfg.distance_kind

    # entry: (key, tree, signal, height)
    table = {}
    for e in doc.edus:
        signal = NodeSignal(e.sentiment, e.attention)
        table[e.index, e.index] = [((), Leaf(e.index), signal, 0)]
    if n == 1:
        (_, tree, signal, _), = table[1, 1]
        return ScoredTree(tree, signal, objective(gold, signal.sentiment, kind))

    best = None
    for length in range(2, n + 1):
        for i in range(1, n - length + 2):
            j = i + length - 1
            is_root = length == n
            entries = []
            for k in range(i, j):
                for label in LABELS:
                    for kl, tl, sl, hl in table[i, k]:
                        for kr, tr, sr, hr in table[k + 1, j]:
                            signal = combine_node(sl, sr, label, agg)
                            d = objective(gold, signal.sentiment, kind)
                            h = max(hl, hr) + 1
                            key = (d, h, k, int(label), kl, kr)
                            if is_root:
                                if best is None or key < best[0]:
                                    best = (key, label, tl, tr, signal)
                            else:
                                entries.append((key, Internal(label, tl, tr), signal, h))
            if not is_root:
                entries.sort(key=lambda entry: entry[0])
                table[i, j] = entries
    key, label, tl, tr, signal = best
    return ScoredTree(Internal(label, tl, tr), signal, key[0])


@dataclass(frozen=True)
class CorpusResult:
    doc_id: str
    document: Optional[Document]
    scored: Optional[ScoredTree]
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _generate_one(item, cfg, backend):
    doc, duplicate = item
    if duplicate:
        return CorpusResult(doc.doc_id, doc, None, f"duplicate doc_id {doc.doc_id!r}")
    try:
        return CorpusResult(doc.doc_id, doc, beam_generate(doc, cfg, backend))
    except SilvaError as exc:
        return CorpusResult(doc.doc_id, doc, None, f"{type(exc).__name__}: {exc}")


def _flag_duplicates(docs):
    seen = set()
    for doc in docs:
        yield doc, doc.doc_id in seen
        seen.add(doc.doc_id)


def generate_corpus(
    docs: Iterable[Document],
    cfg: GenerationConfig,
    parallelism: int = 1,
    backend: Optional[str] = None,
) -> Iterator[CorpusResult]:
    """Generate one tree per document, results in input order.

    Each document draws from its own stream seeded by (cfg.seed, doc_id), so
    output does not depend on ``parallelism`` or on document order.
    """
    backend = resolve_backend(backend)
    items = _flag_duplicates(docs)
    if parallelism <= 1:
        for item in items:
            yield _generate_one(item, cfg, backend)
        return
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        yield from pool.map(_generate_one, items, repeat(cfg), repeat(backend), chunksize=4)
