"""How two child signals merge under a nuclearity label, and the gold-distance objective.

A parent's sentiment is the attention- and nuclearity-weighted mean of its
children's sentiments; its attention is the weighted sum of their attentions.
Satellites are down-weighted relative to nuclei, so the nuclearity label
changes the aggregate and the chart can tell the three labels apart.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import NodeSignal, NuclearityLabel
from .errors import DegenerateAttention, InvalidRange

DISTANCE_KINDS = ("absolute", "squared")


@dataclass(frozen=True)
class AggregationConfig:
    w_nucleus: float = 1.0
    w_satellite: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.w_satellite <= self.w_nucleus):
            raise InvalidRange(
                f"need 0 < w_satellite <= w_nucleus, got {self.w_satellite}, {self.w_nucleus}"
            )


def nuclearity_weights(label: NuclearityLabel, cfg: AggregationConfig) -> tuple[float, float]:
    label = NuclearityLabel(label)
    if label is NuclearityLabel.NN:
        return cfg.w_nucleus, cfg.w_nucleus
    if label is NuclearityLabel.NS:
        return cfg.w_nucleus, cfg.w_satellite
    return cfg.w_satellite, cfg.w_nucleus


def combine_values(s_l, a_l, s_r, a_r, lam_l, lam_r):
    """Scalar core of :func:`combine_node`, kept separate so kernels mirror it exactly.

    The result is clamped into ``[min(s_l, s_r), max(s_l, s_r)]``; without it a
    mean of two equal values can drift by one ulp outside its inputs.
    """
    w_l = lam_l * a_l
    w_r = lam_r * a_r
    total = w_l + w_r
    if total == 0.0:
        raise DegenerateAttention("combined attention underflowed to zero")
    s = (w_l * s_l + w_r * s_r) / total
    lo, hi = (s_l, s_r) if s_l <= s_r else (s_r, s_l)
    if s < lo:
        s = lo
    elif s > hi:
        s = hi
    return s, total


def combine_node(
    left: NodeSignal, right: NodeSignal, label: NuclearityLabel, cfg: AggregationConfig
) -> NodeSignal:
    lam_l, lam_r = nuclearity_weights(label, cfg)
    s, a = combine_values(left.sentiment, left.attention, right.sentiment, right.attention, lam_l, lam_r)
    return NodeSignal(s, a)


def root_distance(gold_polarity: float, signal: NodeSignal) -> float:
    return abs(gold_polarity - signal.sentiment)


def objective(gold_polarity: float, sentiment: float, kind: str = "absolute") -> float:
    """Distance used for ranking: ``|gold - s|`` or ``(gold - s) ** 2``."""
    diff = gold_polarity - sentiment
    if kind == "absolute":
        return abs(diff)
    if kind == "squared":
        return diff * diff
    raise ValueError(f"unknown distance kind {kind!r}")
