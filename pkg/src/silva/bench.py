"""Timing harness for beam generation against document length."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._accel import resolve_backend
from .cky import GenerationConfig, beam_generate
from .synthetic import random_document


@dataclass(frozen=True)
class TimingRow:
    backend: str
    n: int
    mean_ms: float
    stddev: float


def time_generation(
    sizes: Sequence[int],
    reps: int = 3,
    cfg: Optional[GenerationConfig] = None,
    backend: Optional[str] = None,
    seed: int = 0,
) -> list[TimingRow]:
    """Mean and standard deviation (ms) of ``beam_generate`` per document size.

    One small warm-up document is generated first so JIT compilation is not
    timed. Each repetition uses a fresh synthetic document.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    cfg = cfg or GenerationConfig()
    backend = resolve_backend(backend)
    rng = np.random.default_rng(seed)
    beam_generate(random_document(4, rng, "warmup"), cfg, backend)
    rows = []
    for n in sizes:
        samples = []
        for rep in range(reps):
            doc = random_document(n, rng, f"bench-{n}-{rep}")
            start = time.perf_counter()
            beam_generate(doc, cfg, backend)
            samples.append((time.perf_counter() - start) * 1000.0)
        stddev = statistics.stdev(samples) if len(samples) > 1 else 0.0
        rows.append(TimingRow(backend, n, statistics.fmean(samples), stddev))
    return rows


def loglog_slope(rows: Sequence[TimingRow]) -> float:
    """Least-squares slope of log(mean time) against log(n)."""
    if len(rows) < 2:
        return float("nan")
    x = np.log([r.n for r in rows])
    y = np.log([r.mean_ms for r in rows])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)
