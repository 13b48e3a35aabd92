"""Command-line entry point: ``silva generate | evaluate | oracle-check | bench``.

Exit codes: 0 success, 1 I/O, data or check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__, cky
from ._accel import BACKEND, BACKENDS
from .aggregation import DISTANCE_KINDS, AggregationConfig
from .bench import loglog_slope, time_generation
from .cky import GenerationConfig, beam_generate, count_labeled_trees, exhaustive_best, generate_corpus
from .errors import SilvaError
from .evaluation import MODES, micro_precision
from .ingestion import DEMO_LEXICON, load_lexicon, normalize_document, read_records
from .synthetic import random_document
from .treebank import read_treebank, write_treebank

log = logging.getLogger("silva")

MAX_ORACLE_EDUS = 8


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _non_negative_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _unit_float(text):
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {value}")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0.0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _seed(text):
    value = _non_negative_int(text)
    if value >= 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _sizes(text):
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None
    if not sizes or min(sizes) < 1:
        raise argparse.ArgumentTypeError("sizes must be positive integers")
    return sizes


def _default_seed():
    raw = os.environ.get("SILVA_SEED")
    if raw is None:
        return 0
    return _seed(raw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="silva", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"silva {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="build a silver-standard treebank from scored EDUs")
    gen.add_argument("--input", required=True, help="JSON-lines document records")
    gen.add_argument("--output", required=True, help="treebank file to write")
    gen.add_argument("--beam-size", type=_positive_int, default=10)
    gen.add_argument("--epsilon-max", type=_unit_float, default=0.5)
    gen.add_argument("--temperature", type=_positive_float, default=0.1)
    gen.add_argument("--seed", type=_seed, default=None, help="default: $SILVA_SEED or 0")
    gen.add_argument("--w-nucleus", type=_positive_float, default=1.0)
    gen.add_argument("--w-satellite", type=_positive_float, default=0.5)
    gen.add_argument("--distance", choices=DISTANCE_KINDS, default="absolute")
    gen.add_argument("--lexicon", help="token<TAB>polarity file, or 'demo' for the built-in lexicon")
    gen.add_argument("--jobs", type=_positive_int, default=os.cpu_count() or 1)
    gen.add_argument("--backend", choices=BACKENDS, default=None)

    ev = sub.add_parser("evaluate", help="micro precision of a predicted treebank against a reference")
    ev.add_argument("--pred", required=True)
    ev.add_argument("--ref", required=True)
    ev.add_argument("--mode", choices=MODES, default="structure")
    ev.add_argument("--exclude-root", action="store_true")

    oc = sub.add_parser("oracle-check", help="compare full-width beam search with exhaustive search")
    oc.add_argument("--trials", type=_non_negative_int, default=1000)
    oc.add_argument("--max-edus", type=_positive_int, default=6)
    oc.add_argument("--seed", type=_seed, default=None)
    oc.add_argument("--backend", choices=BACKENDS, default=None)
    oc.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    bn = sub.add_parser("bench", help="time generation against document length")
    bn.add_argument("--sizes", type=_sizes, default=[20, 40, 80, 160])
    bn.add_argument("--reps", type=_positive_int, default=3)
    bn.add_argument("--beam-size", type=_positive_int, default=10)
    bn.add_argument("--seed", type=_seed, default=None)
    bn.add_argument("--backend", choices=BACKENDS + ("both",), default=None)
    bn.add_argument("--output", help="also write the CSV here")
    return parser


def cmd_generate(args, parser) -> int:
    if args.w_satellite > args.w_nucleus:
        parser.error("--w-satellite must not exceed --w-nucleus")
    seed = _default_seed() if args.seed is None else args.seed
    cfg = GenerationConfig(
        beam_size=args.beam_size,
        epsilon_max=args.epsilon_max,
        temperature=args.temperature,
        seed=seed,
        aggregation=AggregationConfig(args.w_nucleus, args.w_satellite),
        distance_kind=args.distance,
    )
    if args.lexicon is None:
        lexicon = None
    elif args.lexicon == "demo":
        lexicon = DEMO_LEXICON
    else:
        lexicon = load_lexicon(args.lexicon)

    failures = []
    docs = []
    for record in read_records(args.input):
        try:
            docs.append(normalize_document(record, lexicon))
        except SilvaError as exc:
            failures.append((record.doc_id, f"{type(exc).__name__}: {exc}"))

    backend = args.backend or BACKEND
    metadata = {
        "tool": "silva",
        "version": __version__,
        "command": "generate",
        "input": args.input,
        "lexicon": args.lexicon,
        "backend": backend,
        **cfg.as_dict(),
    }

    def ok_results():
        for res in generate_corpus(docs, cfg, parallelism=args.jobs, backend=backend):
            if res.ok:
                yield res.document, res.scored
            else:
                failures.append((res.doc_id, res.error))

    written = write_treebank(ok_results(), args.output, metadata=metadata)
    for doc_id, message in failures:
        log.error("%s: %s", doc_id, message)
    print(f"wrote {written} trees to {args.output}; {len(failures)} failed", file=sys.stderr)
    return 1 if failures else 0


def cmd_evaluate(args) -> int:
    report = micro_precision(
        read_treebank(args.pred), read_treebank(args.ref), mode=args.mode, exclude_root=args.exclude_root
    )
    print(json.dumps({k: report.as_dict()[k] for k in ("mode", "matched", "total", "precision")}))
    print(report.table())
    return 0


def oracle_check(trials: int, max_edus: int, seed: int, backend=None):
    """Return (passed, failures) comparing full-width beam search with brute force."""
    rng = np.random.default_rng(seed)
    passed = 0
    failures = []
    lo = min(2, max_edus)
    for trial in range(trials):
        n = int(rng.integers(lo, max_edus + 1))
        doc = random_document(n, rng, f"trial{trial:06d}")
        cfg = GenerationConfig(beam_size=count_labeled_trees(n), epsilon_max=0.0, seed=seed)
        beam = beam_generate(doc, cfg, backend)
        best = exhaustive_best(doc, cfg)
        if beam.distance == best.distance:
            passed += 1
        else:
            failures.append((doc.doc_id, n, beam.distance, best.distance))
    return passed, failures


def cmd_oracle_check(args, parser) -> int:
    if args.max_edus > MAX_ORACLE_EDUS:
        parser.error(f"--max-edus above {MAX_ORACLE_EDUS} exceeds the exhaustive oracle limit")
    seed = _default_seed() if args.seed is None else args.seed
    previous = cky._fault_reverse_order
    cky._fault_reverse_order = args.inject_fault
    try:
        passed, failures = oracle_check(args.trials, args.max_edus, seed, args.backend)
    finally:
        cky._fault_reverse_order = previous
    for doc_id, n, got, want in failures[:20]:
        print(f"FAIL {doc_id} n={n} beam={got!r} exhaustive={want!r}")
    print(f"passed {passed}/{args.trials}, failed {len(failures)}")
    return 0 if not failures else 1


def cmd_bench(args) -> int:
    seed = _default_seed() if args.seed is None else args.seed
    backends = list(BACKENDS) if args.backend == "both" else [args.backend or BACKEND]
    cfg = GenerationConfig(beam_size=args.beam_size, seed=seed)
    rows = []
    slopes = {}
    for backend in backends:
        timed = time_generation(args.sizes, args.reps, cfg, backend=backend, seed=seed)
        rows.extend(timed)
        slopes[backend] = loglog_slope(timed)

    header = ["n", "mean_ms", "stddev"]
    if len(backends) > 1:
        header = ["backend"] + header
    lines = []
    for row in rows:
        values = [row.n, f"{row.mean_ms:.3f}", f"{row.stddev:.3f}"]
        lines.append(([row.backend] if len(backends) > 1 else []) + values)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(lines)
    for backend, slope in slopes.items():
        print(f"# loglog_slope {backend} {slope:.3f}")
    if args.output:
        with open(args.output, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(header)
            out.writerows(lines)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        _default_seed()
    except argparse.ArgumentTypeError as exc:
        parser.error(f"SILVA_SEED: {exc}")
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            return cmd_generate(args, parser)
        if args.command == "evaluate":
            return cmd_evaluate(args)
        if args.command == "oracle-check":
            return cmd_oracle_check(args, parser)
        return cmd_bench(args)
    except (OSError, SilvaError) as exc:
        print(f"silva: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
