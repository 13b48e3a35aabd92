import numpy as np
import pytest

from silva import cky
from silva._accel import HAVE_NUMBA
from silva.aggregation import AggregationConfig, combine_node
from silva.cky import (
    ChartCell,
    GenerationConfig,
    beam_capacities,
    beam_generate,
    cell_candidates,
    count_labeled_trees,
    exhaustive_best,
    exploration_rate,
    fill_chart,
    generate_corpus,
    prune_beam,
)
from silva.core import (
    Document,
    Internal,
    Leaf,
    NodeSignal,
    NuclearityLabel as NL,
    ScoredTree,
    tree_stats,
    validate_tree,
)
from silva.errors import DegenerateAttention, InvalidRange, TooLarge
from silva.synthetic import random_corpus, random_document
from silva.treebank import serialize_tree

from .conftest import all_labeled_trees, brute_force_distance

BACKENDS = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]


def full_width(n, **kw):
    return GenerationConfig(beam_size=count_labeled_trees(n), epsilon_max=0.0, **kw)


@pytest.mark.parametrize("n, expected", [(1, 1), (2, 3), (4, 135), (8, 429 * 3**7)])
def test_count_labeled_trees(n, expected):
    assert count_labeled_trees(n) == expected


def test_count_matches_enumeration():
    for n in range(1, 7):
        assert sum(1 for _ in all_labeled_trees(1, n)) == count_labeled_trees(n)


def test_config_validation():
    with pytest.raises(InvalidRange):
        GenerationConfig(beam_size=0)
    with pytest.raises(InvalidRange):
        GenerationConfig(temperature=0.0)
    with pytest.raises(InvalidRange):
        GenerationConfig(epsilon_max=1.5)


def test_exhaustive_single_edu():
    doc = Document.from_scores("d", 0.7, [0.3], [1.0])
    best = exhaustive_best(doc, GenerationConfig())
    assert best.tree == Leaf(1)
    assert best.distance == pytest.approx(0.4)


def test_exhaustive_two_edus_by_hand():
    doc = Document.from_scores("d", 0.9, [0.8, -0.4], [0.5, 0.5])
    cfg = GenerationConfig()
    outcomes = {
        label: abs(0.9 - combine_node(NodeSignal(0.8, 0.5), NodeSignal(-0.4, 0.5), label, cfg.aggregation).sentiment)
        for label in NL
    }
    best = exhaustive_best(doc, cfg)
    assert best.distance == min(outcomes.values())
    assert best.tree == Internal(min(outcomes, key=outcomes.get), Leaf(1), Leaf(2))


def test_exhaustive_frozen_fixture():
    # frozen from a brute-force run over all 135 trees; hand-checked:
    # NS(3,4) -> 1/3, SN(2, .) -> 0, NS(1, .) -> 0.5
    doc = Document.from_scores("fx", 1.0, [1, -1, 1, -1], [0.25] * 4)
    best = exhaustive_best(doc, GenerationConfig())
    assert serialize_tree(best.tree) == "(NS (leaf 1) (SN (leaf 2) (NS (leaf 3) (leaf 4))))"
    assert best.distance == 0.5
    assert best.signal == NodeSignal(0.5, 0.5)
    assert brute_force_distance(doc, GenerationConfig()) == 0.5


def test_exhaustive_matches_independent_enumeration(make_doc):
    for n in range(1, 6):
        for kind in ("absolute", "squared"):
            doc = make_doc(n)
            cfg = GenerationConfig(distance_kind=kind)
            assert exhaustive_best(doc, cfg).distance == pytest.approx(brute_force_distance(doc, cfg), abs=1e-15)


def test_exhaustive_too_large(make_doc):
    with pytest.raises(TooLarge):
        exhaustive_best(make_doc(9), GenerationConfig())


def test_exploration_rate():
    cfg = GenerationConfig(epsilon_max=0.5)
    assert exploration_rate(10, 10, cfg) == 0.0
    assert exploration_rate(2, 10, cfg) == 0.5
    assert exploration_rate(6, 10, cfg) == pytest.approx(0.25)
    assert exploration_rate(2, 2, cfg) == 0.0


def _leaf_cell(doc, i):
    e = doc.edus[i - 1]
    signal = NodeSignal(e.sentiment, e.attention)
    return ChartCell((i, i), (ScoredTree(Leaf(i), signal, abs(doc.gold_polarity - e.sentiment)),))


def test_cell_candidates_counts_and_signals():
    doc = Document.from_scores("d", 0.2, [0.5, -0.5], [0.2, 0.2])
    cands = cell_candidates(_leaf_cell(doc, 1), _leaf_cell(doc, 2), doc, GenerationConfig())
    assert [c.tree.label for c in cands] == [NL.NN, NL.NS, NL.SN]
    assert cands[0].signal.sentiment == pytest.approx(0.0)
    assert cands[1].signal.sentiment == pytest.approx(0.05 / 0.3)
    assert cands[2].signal.sentiment == pytest.approx(-0.05 / 0.3)
    assert cands[1].distance == pytest.approx(abs(0.2 - 0.05 / 0.3))


def test_cell_candidates_ten_by_ten(make_doc):
    doc = make_doc(12)
    chart = fill_chart(doc, GenerationConfig(beam_size=10, epsilon_max=0.0))
    left, right = chart.cell(1, 6), chart.cell(7, 12)
    assert len(left.beam) == len(right.beam) == 10
    assert len(cell_candidates(left, right, doc, GenerationConfig())) == 300
    with pytest.raises(ValueError):
        cell_candidates(left, chart.cell(8, 12), doc, GenerationConfig())


def _dtie(st):
    return (st.distance, tree_stats(st.tree).balance, st.tree.split, st.tree.label)


def test_prune_exploit_is_top_k(make_doc):
    doc = make_doc(12)
    cfg = GenerationConfig(beam_size=10)
    chart = fill_chart(doc, GenerationConfig(beam_size=10, epsilon_max=0.0))
    cands = cell_candidates(chart.cell(1, 6), chart.cell(7, 12), doc, cfg)
    pruned = prune_beam(cands, 12, 12, cfg, np.random.default_rng(0), epsilon=0.0)
    assert pruned == sorted(cands, key=_dtie)[:10]


def test_prune_single_candidate(make_doc):
    doc = make_doc(2)
    cand = cell_candidates(_leaf_cell(doc, 1), _leaf_cell(doc, 2), doc, GenerationConfig())[:1]
    for eps in (0.0, 1.0):
        assert prune_beam(cand, 2, 2, GenerationConfig(), np.random.default_rng(1), epsilon=eps) == cand


def test_prune_softmax_limit(make_doc):
    # tau -> 0: exploration concentrates on the lowest distances
    doc = make_doc(8)
    cfg = GenerationConfig(beam_size=2, temperature=1e-4)
    chart = fill_chart(doc, GenerationConfig(beam_size=10, epsilon_max=0.0))
    cands = cell_candidates(chart.cell(1, 4), chart.cell(5, 5), doc, cfg)
    # distinct trees can share an aggregate; keep one per distance so gaps are strict
    cands = list({c.distance: c for c in reversed(cands)}.values())[::-1]
    ranked = sorted(cands, key=_dtie)
    assert ranked[1].distance - ranked[0].distance > 1e-3 and ranked[2].distance - ranked[1].distance > 1e-3
    rng = np.random.default_rng(2)
    trials = 10_000
    best_hits = second_hits = 0
    for _ in range(trials):
        pruned = prune_beam(cands, 5, 8, cfg, rng, epsilon=1.0)
        best_hits += ranked[0] in pruned
        second_hits += ranked[1] in pruned
    assert best_hits == trials
    assert second_hits / trials > 0.99


def test_prune_exploration_samples_diversely(make_doc):
    doc = make_doc(10)
    cfg = GenerationConfig(beam_size=10, temperature=10.0)
    chart = fill_chart(doc, GenerationConfig(beam_size=10, epsilon_max=0.0))
    cands = cell_candidates(chart.cell(1, 5), chart.cell(6, 10), doc, cfg)
    top = sorted(cands, key=_dtie)[:10]
    rng = np.random.default_rng(3)
    outs = [prune_beam(cands, 10, 20, cfg, rng, epsilon=1.0) for _ in range(20)]
    assert any(out != top for out in outs)
    for out in outs:
        assert out[0] == top[0]
        assert out == sorted(out, key=_dtie)
        assert len(out) == 10


@pytest.mark.parametrize("backend", BACKENDS)
def test_beam_single_edu(backend):
    doc = Document.from_scores("d", 0.1, [0.6], [1.0])
    out = beam_generate(doc, GenerationConfig(), backend)
    assert out.tree == Leaf(1)
    assert out.signal == NodeSignal(0.6, 1.0)
    assert out.distance == pytest.approx(0.5)


@pytest.mark.parametrize("backend", BACKENDS)
def test_oracle_equivalence_sample(backend):
    rng = np.random.default_rng(99)
    for trial in range(150):
        n = int(rng.integers(2, 7))
        doc = random_document(n, rng, f"t{trial}")
        for kind in ("absolute", "squared"):
            cfg = full_width(n, distance_kind=kind)
            beam = beam_generate(doc, cfg, backend)
            best = exhaustive_best(doc, cfg)
            assert beam.distance == best.distance
            assert beam.tree == best.tree


def test_beam_bound_and_well_formed(make_doc):
    for n in (3, 9, 25):
        doc = make_doc(n)
        cfg = GenerationConfig(beam_size=7)
        chart = fill_chart(doc, cfg)
        caps = beam_capacities(n, 7)
        for start in range(1, n + 1):
            for end in range(start, n + 1):
                length = end - start + 1
                assert chart.beam_length(start, end) == caps[length] <= 7
                assert 3 * sum(caps[l] * caps[length - l] for l in range(1, length)) <= 3 * 49 * (length - 1)
        for rank in range(chart.beam_length(1, n)):
            validate_tree(chart.tree(1, n, rank), n)


@pytest.mark.parametrize("backend", BACKENDS)
def test_elitism_every_cell(make_doc, backend):
    n = 9
    doc = make_doc(n)
    cfg = GenerationConfig(beam_size=4, epsilon_max=1.0, temperature=5.0, seed=4)
    chart = fill_chart(doc, cfg, backend=backend)
    for length in range(2, n + 1):
        for start in range(1, n - length + 2):
            end = start + length - 1
            cands = []
            for k in range(start, end):
                cands += cell_candidates(chart.cell(start, k), chart.cell(k + 1, end), doc, cfg)
            stored = chart.cell(start, end).beam
            assert stored[0] == min(cands, key=_dtie)
            assert list(stored) == sorted(stored, key=_dtie)


def _python_chart(doc, cfg, rng):
    """The chart assembled from cell_candidates + prune_beam alone."""
    n = len(doc)
    cells = {(i, i): _leaf_cell(doc, i) for i in range(1, n + 1)}
    for length in range(2, n + 1):
        for start in range(1, n - length + 2):
            end = start + length - 1
            cands = []
            for k in range(start, end):
                cands += cell_candidates(cells[start, k], cells[k + 1, end], doc, cfg)
            cells[start, end] = ChartCell((start, end), tuple(prune_beam(cands, length, n, cfg, rng)))
    return cells


@pytest.mark.parametrize("backend", BACKENDS)
def test_kernel_matches_python_composition(backend):
    rng = np.random.default_rng(8)
    for trial in range(6):
        n = int(rng.integers(3, 11))
        doc = random_document(n, rng, f"c{trial}")
        cfg = GenerationConfig(beam_size=5, epsilon_max=0.8, temperature=0.3, seed=trial)
        cells = _python_chart(doc, cfg, cky.document_rng(cfg.seed, doc.doc_id))
        chart = fill_chart(doc, cfg, backend=backend)
        assert chart.cell(1, n).beam == cells[1, n].beam


@pytest.mark.parametrize("backend", BACKENDS)
def test_determinism_and_seed(make_doc, backend):
    docs = [make_doc(12, f"d{i}") for i in range(8)]
    cfg = GenerationConfig(seed=5)
    a = [beam_generate(d, cfg, backend) for d in docs]
    b = [beam_generate(d, cfg, backend) for d in docs]
    assert a == b
    greedy = [beam_generate(d, GenerationConfig(epsilon_max=0.0, seed=1), backend) for d in docs]
    greedy2 = [beam_generate(d, GenerationConfig(epsilon_max=0.0, seed=77), backend) for d in docs]
    assert greedy == greedy2


def test_exploration_changes_charts(make_doc):
    doc = make_doc(20)
    charts = [fill_chart(doc, GenerationConfig(epsilon_max=1.0, temperature=1.0, seed=s)) for s in range(4)]
    beams = {tuple(st.tree for st in c.cell(1, 10).beam) for c in charts}
    assert len(beams) > 1


@pytest.mark.skipif(not HAVE_NUMBA, reason="needs both backends")
def test_backend_parity():
    rng = np.random.default_rng(12)
    for trial in range(30):
        doc = random_document(int(rng.integers(2, 25)), rng, f"p{trial}")
        cfg = GenerationConfig(seed=trial)
        assert beam_generate(doc, cfg, "numba") == beam_generate(doc, cfg, "numpy")


def test_fault_hook_breaks_oracle(monkeypatch, make_doc):
    monkeypatch.setattr(cky, "_fault_reverse_order", True)
    doc = make_doc(5)
    cfg = full_width(5)
    assert beam_generate(doc, cfg).distance > exhaustive_best(doc, cfg).distance


def test_zero_attention_rejected():
    doc = Document.from_scores("z", 0.0, [0.1, 0.2], [0.0, 1.0])
    with pytest.raises(DegenerateAttention):
        beam_generate(doc, GenerationConfig())


def test_nondefault_weights_change_result():
    doc = Document.from_scores("w", 0.9, [1.0, -1.0, 0.2], [0.3, 0.3, 0.4])
    a = exhaustive_best(doc, GenerationConfig())
    b = exhaustive_best(doc, GenerationConfig(aggregation=AggregationConfig(1.0, 1.0)))
    assert a.distance <= b.distance


def test_generate_corpus_contract():
    docs = random_corpus(12, (1, 15), seed=3)
    cfg = GenerationConfig(seed=9)
    serial = list(generate_corpus(docs, cfg, parallelism=1))
    parallel = list(generate_corpus(docs, cfg, parallelism=3))
    assert [r.scored for r in serial] == [r.scored for r in parallel]
    assert [r.doc_id for r in serial] == [d.doc_id for d in docs]
    reversed_run = {r.doc_id: r.scored for r in generate_corpus(docs[::-1], cfg)}
    assert all(reversed_run[r.doc_id] == r.scored for r in serial)
    assert all(r.scored == beam_generate(d, cfg) for r, d in zip(serial, docs))
    assert list(generate_corpus([], cfg)) == []


def test_generate_corpus_reports_errors_without_aborting():
    good = Document.from_scores("ok", 0.0, [0.1, 0.2], [0.5, 0.5])
    bad = Document.from_scores("bad", 0.0, [0.1, 0.2], [0.0, 1.0])
    out = list(generate_corpus([good, bad, good], GenerationConfig()))
    assert [r.ok for r in out] == [True, False, False]
    assert "DegenerateAttention" in out[1].error
    assert "duplicate" in out[2].error
