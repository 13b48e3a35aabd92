"""Silver-standard discourse trees from document sentiment via beam-pruned CKY."""

from ._accel import BACKEND
from .aggregation import AggregationConfig, combine_node, nuclearity_weights, root_distance
from .cky import (
    ChartCell,
    GenerationConfig,
    beam_generate,
    cell_candidates,
    count_labeled_trees,
    exhaustive_best,
    exploration_rate,
    generate_corpus,
    prune_beam,
)
from .core import (
    EDU,
    Document,
    Internal,
    Leaf,
    NodeSignal,
    NuclearityLabel,
    ScoredTree,
    internal_spans,
    tree_stats,
    validate_tree,
)
from .evaluation import micro_precision
from .ingestion import normalize_document, read_records
from .treebank import parse_tree, read_treebank, serialize_tree, write_treebank

__version__ = "0.1.0"
