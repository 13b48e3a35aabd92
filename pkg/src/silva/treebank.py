"""Bracketed tree serialization and newline-delimited treebank files.

Tree grammar::

    TREE  := "(leaf " INDEX ")" | "(" LABEL " " TREE " " TREE ")"
    LABEL := NN | NS | SN
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional, TextIO, Union

from .core import (
    Document,
    Internal,
    Leaf,
    NuclearityLabel,
    ScoredTree,
    DiscourseTree,
    leaves,
    tree_stats,
    validate_tree,
)
from .errors import FileFormatError, SilvaError, TreeSyntaxError

_TOKEN = re.compile(r"\(|\)|[A-Za-z]+|\d+")
_SPACE = re.compile(r"\s*")
FIELDS = ("doc_id", "n_edus", "tree", "root_sentiment", "root_attention", "distance", "height", "balance")


def serialize_tree(tree: DiscourseTree) -> str:
    parts = []
    stack: list = [tree]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            parts.append(item)
        elif isinstance(item, Leaf):
            parts.append(f"(leaf {item.index})")
        else:
            parts.append(f"({item.label.name} ")
            stack.extend((")", item.right, " ", item.left))
    return "".join(parts)


def _tokens(text: str):
    pos = 0
    end = len(text)
    while True:
        pos = _SPACE.match(text, pos).end()
        if pos >= end:
            return
        match = _TOKEN.match(text, pos)
        if match is None:
            raise TreeSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        yield match.group(), pos
        pos = match.end()


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def parse_tree(text: str) -> DiscourseTree:
    """Inverse of :func:`serialize_tree`; any whitespace may separate tokens.

    Raises ``TreeSyntaxError`` for malformed bracketing and a
    ``ValidationError`` subclass for well-formed text describing an invalid tree.
    """
    tokens = _tokens(text)
    frames: list[tuple[NuclearityLabel, list, int]] = []
    result = None

    def attach(node, offset):
        nonlocal result
        if frames:
            children = frames[-1][1]
            if len(children) == 2:
                raise TreeSyntaxError("internal node with more than two children", _byte_offset(text, offset))
            children.append(node)
        elif result is None:
            result = node
        else:
            raise TreeSyntaxError("trailing input after tree", _byte_offset(text, offset))

    def expect(kind):
        try:
            tok, offset = next(tokens)
        except StopIteration:
            raise TreeSyntaxError(f"unexpected end of input, expected {kind}", len(text.encode("utf-8"))) from None
        return tok, offset

    for tok, offset in tokens:
        if tok == "(":
            head, head_at = expect("label or 'leaf'")
            if head == "leaf":
                index, index_at = expect("leaf index")
                if not index.isdigit():
                    raise TreeSyntaxError(f"expected leaf index, got {index!r}", _byte_offset(text, index_at))
                close, close_at = expect("')'")
                if close != ")":
                    raise TreeSyntaxError(f"expected ')', got {close!r}", _byte_offset(text, close_at))
                attach(Leaf(int(index)), offset)
            elif head in NuclearityLabel.__members__:
                if result is not None and not frames:
                    raise TreeSyntaxError("trailing input after tree", _byte_offset(text, offset))
                frames.append((NuclearityLabel[head], [], offset))
            else:
                raise TreeSyntaxError(f"unknown node head {head!r}", _byte_offset(text, head_at))
        elif tok == ")":
            if not frames:
                raise TreeSyntaxError("unbalanced ')'", _byte_offset(text, offset))
            label, children, start = frames.pop()
            if len(children) != 2:
                raise TreeSyntaxError("internal node needs exactly two children", _byte_offset(text, offset))
            attach(Internal(label, children[0], children[1]), start)
        else:
            raise TreeSyntaxError(f"unexpected token {tok!r}", _byte_offset(text, offset))
    if frames:
        raise TreeSyntaxError("unclosed '('", _byte_offset(text, frames[-1][2]))
    if result is None:
        raise TreeSyntaxError("empty input", 0)
    validate_tree(result, len(leaves(result)))
    return result


def _g9(x: float) -> float:
    return float(f"{x:.9g}")


@dataclass(frozen=True)
class TreebankRecord:
    doc_id: str
    n_edus: int
    tree: DiscourseTree
    root_sentiment: float
    root_attention: float
    distance: float
    height: int
    balance: float

    @classmethod
    def from_result(cls, doc: Document, scored: ScoredTree) -> "TreebankRecord":
        stats = tree_stats(scored.tree)
        return cls(
            doc.doc_id,
            len(doc),
            scored.tree,
            _g9(scored.signal.sentiment),
            _g9(scored.signal.attention),
            _g9(scored.distance),
            stats.height,
            _g9(stats.balance),
        )

    def to_json_line(self) -> str:
        obj = {
            "doc_id": self.doc_id,
            "n_edus": self.n_edus,
            "tree": serialize_tree(self.tree),
            "root_sentiment": _g9(self.root_sentiment),
            "root_attention": _g9(self.root_attention),
            "distance": _g9(self.distance),
            "height": self.height,
            "balance": _g9(self.balance),
        }
        return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_json(cls, obj: dict) -> "TreebankRecord":
        missing = [f for f in FIELDS if f not in obj]
        if missing:
            raise ValueError(f"missing fields {missing}")
        tree = parse_tree(obj["tree"])
        if tree.end != obj["n_edus"]:
            raise ValueError(f"tree covers {tree.end} EDUs but n_edus is {obj['n_edus']}")
        return cls(
            str(obj["doc_id"]),
            int(obj["n_edus"]),
            tree,
            float(obj["root_sentiment"]),
            float(obj["root_attention"]),
            float(obj["distance"]),
            int(obj["height"]),
            float(obj["balance"]),
        )


def _as_record(item) -> TreebankRecord:
    if isinstance(item, TreebankRecord):
        return item
    doc, scored = item
    return TreebankRecord.from_result(doc, scored)


def write_treebank(
    results: Iterable[Union[TreebankRecord, tuple[Document, ScoredTree]]],
    out: Union[str, Path, TextIO],
    metadata: Optional[dict] = None,
) -> int:
    """Write one JSON line per result; returns the number of records written."""
    owned = not hasattr(out, "write")
    fh = open(out, "w", encoding="utf-8", newline="\n") if owned else out
    count = 0
    try:
        if metadata is not None:
            fh.write("#" + json.dumps(metadata, sort_keys=True, separators=(",", ":")) + "\n")
        for item in results:
            fh.write(_as_record(item).to_json_line() + "\n")
            count += 1
    finally:
        if owned:
            fh.close()
    return count


def read_treebank(source: Union[str, Path, TextIO]) -> Iterator[TreebankRecord]:
    owned = not hasattr(source, "read")
    fh = open(source, encoding="utf-8") if owned else source
    try:
        for lineno, line in enumerate(fh, start=1):
            if line.startswith("#") or not line.strip():
                continue
            try:
                yield TreebankRecord.from_json(json.loads(line))
            except (json.JSONDecodeError, ValueError, TypeError, SilvaError) as exc:
                raise FileFormatError(str(exc), lineno) from exc
    finally:
        if owned:
            fh.close()


def read_metadata(source: Union[str, Path]) -> Optional[dict]:
    with open(source, encoding="utf-8") as fh:
        first = fh.readline()
    if first.startswith("#"):
        return json.loads(first[1:])
    return None
