"""Random documents for oracle checks, benchmarks and property tests."""

import numpy as np

from .core import Document


def random_document(n: int, rng: np.random.Generator, doc_id: str = "synthetic") -> Document:
    """Uniform sentiments and gold in [-1, 1]; attentions a flat Dirichlet draw."""
    sentiments = rng.uniform(-1.0, 1.0, size=n)
    attentions = rng.dirichlet(np.ones(n))
    # a Dirichlet component can underflow to exactly zero for large n
    attentions = np.maximum(attentions, np.finfo(float).tiny)
    attentions /= attentions.sum()
    gold = rng.uniform(-1.0, 1.0)
    return Document.from_scores(doc_id, gold, sentiments, np.minimum(attentions, 1.0))


def random_corpus(count: int, n_range: tuple[int, int], seed: int, prefix: str = "doc") -> list[Document]:
    rng = np.random.default_rng(seed)
    lo, hi = n_range
    return [random_document(int(rng.integers(lo, hi + 1)), rng, f"{prefix}{i:05d}") for i in range(count)]
