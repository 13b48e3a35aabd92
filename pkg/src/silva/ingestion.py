"""Reading annotated corpora and turning raw records into normalized documents.

Input records are JSON lines::

    {"doc_id": "r1", "gold": {"stars": 4, "scale": [1, 5]},
     "edus": [{"text": "great food", "sentiment": 0.8, "attention": 0.6}, ...]}

``gold`` may instead be ``{"polarity": 0.5}``. EDUs missing a sentiment or an
attention score are scored by the lexicon annotator.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Optional, TextIO, Union

from .core import EDU, Document
from .errors import EmptyDocument, InvalidRange, MissingScores, OutOfRange, FileFormatError

SentimentLexicon = Mapping[str, float]

_EDGE_PUNCT = re.compile(r"^[\W_]+|[\W_]+$")

DEMO_LEXICON: dict[str, float] = {
    "amazing": 0.9,
    "awesome": 0.9,
    "excellent": 0.9,
    "great": 0.8,
    "delicious": 0.8,
    "love": 0.8,
    "friendly": 0.6,
    "good": 0.6,
    "nice": 0.5,
    "fresh": 0.5,
    "fine": 0.2,
    "ok": 0.1,
    "slow": -0.4,
    "cold": -0.4,
    "bland": -0.5,
    "rude": -0.7,
    "bad": -0.7,
    "dirty": -0.7,
    "terrible": -0.9,
    "awful": -0.9,
    "worst": -1.0,
}


@dataclass(frozen=True)
class RawEDU:
    text: str = ""
    sentiment: Optional[float] = None
    attention: Optional[float] = None


@dataclass(frozen=True)
class RawDocumentRecord:
    doc_id: str
    edus: tuple[RawEDU, ...]
    stars: Optional[int] = None
    scale: Optional[tuple[int, int]] = None
    polarity: Optional[float] = None

    @classmethod
    def from_json(cls, obj: dict) -> "RawDocumentRecord":
        gold = obj.get("gold")
        if not isinstance(gold, dict):
            raise InvalidRange("record needs a 'gold' object")
        has_stars = "stars" in gold
        has_polarity = "polarity" in gold
        if has_stars == has_polarity:
            raise InvalidRange("'gold' must hold exactly one of 'stars' or 'polarity'")
        edus = tuple(
            RawEDU(e.get("text", ""), e.get("sentiment"), e.get("attention")) for e in obj.get("edus", [])
        )
        if has_stars:
            scale = gold.get("scale")
            if scale is None or len(scale) != 2:
                raise InvalidRange("star ratings need a two-element 'scale'")
            return cls(str(obj["doc_id"]), edus, stars=gold["stars"], scale=(scale[0], scale[1]))
        return cls(str(obj["doc_id"]), edus, polarity=gold["polarity"])

    def to_json(self) -> dict:
        if self.polarity is not None:
            gold = {"polarity": self.polarity}
        else:
            gold = {"stars": self.stars, "scale": list(self.scale)}
        edus = []
        for e in self.edus:
            item = {"text": e.text}
            if e.sentiment is not None:
                item["sentiment"] = e.sentiment
            if e.attention is not None:
                item["attention"] = e.attention
            edus.append(item)
        return {"doc_id": self.doc_id, "gold": gold, "edus": edus}


def stars_to_polarity(stars: int, scale: tuple[int, int]) -> float:
    lo, hi = scale
    if not lo < hi:
        raise OutOfRange(f"invalid star scale {scale}")
    if not lo <= stars <= hi:
        raise OutOfRange(f"{stars} stars outside scale {scale}")
    return (stars - (lo + hi) / 2) / ((hi - lo) / 2)


def tokenize(text: str) -> list[str]:
    tokens = (_EDGE_PUNCT.sub("", tok).lower() for tok in text.split())
    return [tok for tok in tokens if tok]


def lexicon_annotate(edu_text: str, lexicon: SentimentLexicon) -> tuple[float, float]:
    """Mean polarity of matched tokens and a raw weight of ``1 + matches``."""
    hits = [lexicon[tok] for tok in tokenize(edu_text) if tok in lexicon]
    sentiment = sum(hits) / len(hits) if hits else 0.0
    return sentiment, 1.0 + len(hits)


def _check_score(value, what, lo, hi):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InvalidRange(f"{what} must be a finite number, got {value!r}")
    if not lo <= value <= hi:
        raise InvalidRange(f"{what} {value} outside [{lo}, {hi}]")
    return float(value)


def normalize_document(record: RawDocumentRecord, lexicon: Optional[SentimentLexicon] = None) -> Document:
    if not record.edus:
        raise EmptyDocument(f"record {record.doc_id!r} has no EDUs")
    if record.polarity is not None:
        gold = _check_score(record.polarity, "gold polarity", -1.0, 1.0)
    else:
        gold = stars_to_polarity(record.stars, record.scale)

    sentiments, weights = [], []
    for pos, edu in enumerate(record.edus, start=1):
        if edu.sentiment is None or edu.attention is None:
            if lexicon is None:
                raise MissingScores(f"record {record.doc_id!r}, EDU {pos}: scores missing and no lexicon given")
            lex_s, lex_w = lexicon_annotate(edu.text, lexicon)
        s = lex_s if edu.sentiment is None else _check_score(edu.sentiment, f"EDU {pos} sentiment", -1.0, 1.0)
        w = lex_w if edu.attention is None else _check_score(edu.attention, f"EDU {pos} attention", 0.0, math.inf)
        sentiments.append(s)
        weights.append(w)

    total = math.fsum(weights)
    if total <= 0.0:
        raise InvalidRange(f"record {record.doc_id!r}: attentions sum to zero")
    # already-normalized input is left untouched so normalization is idempotent
    if abs(total - 1.0) > 1e-12:
        weights = [w / total for w in weights]
    if min(weights) <= 0.0:
        raise InvalidRange(f"record {record.doc_id!r}: every EDU needs positive attention")
    edus = tuple(
        EDU(pos, edu.text, s, w)
        for pos, (edu, s, w) in enumerate(zip(record.edus, sentiments, weights), start=1)
    )
    return Document(record.doc_id, gold, edus)


def document_to_record(doc: Document) -> RawDocumentRecord:
    edus = tuple(RawEDU(e.text, e.sentiment, e.attention) for e in doc.edus)
    return RawDocumentRecord(doc.doc_id, edus, polarity=doc.gold_polarity)


def _open_text(source, mode):
    if hasattr(source, "read") or hasattr(source, "write"):
        return source, False
    return open(source, mode, encoding="utf-8", newline="\n"), True


def read_records(source: Union[str, Path, TextIO]) -> Iterator[RawDocumentRecord]:
    fh, owned = _open_text(source, "r")
    try:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            try:
                yield RawDocumentRecord.from_json(json.loads(line))
            except (json.JSONDecodeError, KeyError, TypeError, InvalidRange) as exc:
                raise FileFormatError(str(exc), lineno) from exc
    finally:
        if owned:
            fh.close()


def write_records(records: Iterable[RawDocumentRecord], out: Union[str, Path, TextIO]) -> None:
    fh, owned = _open_text(out, "w")
    try:
        for record in records:
            fh.write(json.dumps(record.to_json(), ensure_ascii=False) + "\n")
    finally:
        if owned:
            fh.close()


def load_lexicon(path: Union[str, Path]) -> dict[str, float]:
    """Read ``token<TAB>polarity`` lines; '#' starts a comment line."""
    lexicon = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FileFormatError("expected token<TAB>polarity", lineno)
            try:
                value = float(parts[1])
            except ValueError as exc:
                raise FileFormatError(f"bad polarity {parts[1]!r}", lineno) from exc
            if not -1.0 <= value <= 1.0:
                raise FileFormatError(f"polarity {value} outside [-1, 1]", lineno)
            lexicon[parts[0].strip().lower()] = value
    return lexicon
