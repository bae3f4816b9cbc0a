"""Streaming reader for dependency-parsed corpora in CoNLL-U layout.

Token lines carry ten tab-separated columns; only the six needed downstream
(ID, FORM, LEMMA, UPOS, HEAD, DEPREL) are kept. Multiword-token ranges
("3-4") and empty nodes ("5.1") are skipped so trees contain syntactic
words only. Parsing is single-pass and lazy: memory is bounded by the
largest sentence, never by file size.

Corpus files scraped from the web contain malformed blocks. The default
"lenient" policy drops the offending sentence and counts it; "strict"
aborts on the first problem.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

__all__ = [
    "Token",
    "DepTree",
    "IngestStats",
    "ConlluError",
    "MalformedLineError",
    "InvalidTreeError",
    "parse_conllu",
    "validate_tree",
    "tree_to_conllu",
]

_RANGE_ID = re.compile(r"\d+-\d+\Z")
_EMPTY_ID = re.compile(r"\d+\.\d+\Z")
_SENT_ID = re.compile(r"#\s*sent_id\s*=\s*(.+)")

NUM_COLUMNS = 10


class ConlluError(ValueError):
    """Problem reading a CoNLL-U stream."""


class MalformedLineError(ConlluError):
    """Token line with the wrong column count or unparseable ID/HEAD."""


class InvalidTreeError(ConlluError):
    """Sentence block whose tokens do not form a valid tree."""


@dataclass(frozen=True, slots=True)
class Token:
    """One syntactic word: 1-based ID, surface form, lemma, POS, head, relation."""

    id: int
    form: str
    lemma: str
    upos: str
    head: int
    deprel: str


@dataclass(frozen=True, slots=True)
class DepTree:
    """Immutable parsed sentence; safe to share across threads."""

    tokens: tuple[Token, ...]
    sentence_id: str | None = None


@dataclass(slots=True)
class IngestStats:
    """Counters filled in while parsing; pass one in to observe skips."""

    sentences: int = 0
    skipped: int = 0
    lines: int = 0


def _iter_text_lines(stream: Iterable[str] | Iterable[bytes] | IO) -> Iterator[str]:
    for line in stream:
        if isinstance(line, bytes):
            yield line.decode("utf-8")
        else:
            yield line


def _parse_token_line(line: str, lineno: int) -> Token | None:
    """Parse one token line; None for range/empty-node lines."""
    cols = line.split("\t")
    if len(cols) != NUM_COLUMNS:
        raise MalformedLineError(f"line {lineno}: expected {NUM_COLUMNS} columns, got {len(cols)}")
    raw_id = cols[0]
    if _RANGE_ID.fullmatch(raw_id) or _EMPTY_ID.fullmatch(raw_id):
        return None
    try:
        tok_id = int(raw_id)
        head = int(cols[6])
    except ValueError:
        raise MalformedLineError(f"line {lineno}: unparseable ID or HEAD") from None
    form = cols[1]
    if tok_id < 1 or head < 0 or head == tok_id or not form:
        raise MalformedLineError(f"line {lineno}: bad ID/HEAD/FORM values")
    lemma = cols[2]
    if lemma == "_" or not lemma:
        lemma = form.lower()
    return Token(id=tok_id, form=form, lemma=lemma, upos=cols[3], head=head, deprel=cols[7])


def validate_tree(tree: DepTree) -> list[str]:
    """Return the list of violated invariants; empty means the tree is valid."""
    violations: list[str] = []
    ids = [t.id for t in tree.tokens]
    n = len(ids)
    if ids != list(range(1, n + 1)):
        violations.append("non-contiguous token ids")
    valid_ids = set(ids)
    for t in tree.tokens:
        if t.head == t.id:
            violations.append(f"token {t.id} heads itself")
        elif t.head != 0 and t.head not in valid_ids:
            violations.append(f"dangling head: token {t.id} -> {t.head}")
    if not any(t.head == 0 for t in tree.tokens):
        violations.append("no root")
    return violations


def parse_conllu(
    stream: Iterable[str] | Iterable[bytes] | IO,
    policy: str = "lenient",
    stats: IngestStats | None = None,
) -> Iterator[DepTree]:
    """Yield one validated DepTree per non-empty sentence block.

    ``stream`` is any iterable of text or UTF-8 byte lines. Under the
    default lenient policy, blocks containing malformed lines or failing
    validation are skipped and counted in ``stats``; strict raises.
    """
    if policy not in ("strict", "lenient"):
        raise ValueError(f"unknown policy: {policy!r}")
    if stats is None:
        stats = IngestStats()

    tokens: list[Token] = []
    sent_id: str | None = None
    saw_lines = False
    bad = False

    def finish() -> DepTree | None:
        nonlocal tokens, sent_id, saw_lines, bad
        tree: DepTree | None = None
        if bad:
            stats.skipped += 1
        elif tokens:
            candidate = DepTree(tokens=tuple(tokens), sentence_id=sent_id)
            violations = validate_tree(candidate)
            if violations:
                if policy == "strict":
                    raise InvalidTreeError("; ".join(violations))
                stats.skipped += 1
            else:
                stats.sentences += 1
                tree = candidate
        tokens = []
        sent_id = None
        saw_lines = False
        bad = False
        return tree

    lineno = 0
    for raw in _iter_text_lines(stream):
        lineno += 1
        stats.lines += 1
        line = raw.rstrip("\r\n")
        if not line:
            if saw_lines:
                tree = finish()
                if tree is not None:
                    yield tree
            continue
        saw_lines = True
        if line.startswith("#"):
            m = _SENT_ID.match(line)
            if m:
                sent_id = m.group(1).strip()
            continue
        if bad:
            continue
        try:
            token = _parse_token_line(line, lineno)
        except MalformedLineError:
            if policy == "strict":
                raise
            bad = True
            continue
        if token is not None:
            tokens.append(token)

    if saw_lines:
        tree = finish()
        if tree is not None:
            yield tree


def tree_to_conllu(tree: DepTree) -> str:
    """Serialize the six consumed columns back to CoNLL-U text."""
    lines: list[str] = []
    if tree.sentence_id is not None:
        lines.append(f"# sent_id = {tree.sentence_id}")
    for t in tree.tokens:
        lines.append(
            "\t".join((str(t.id), t.form, t.lemma, t.upos, "_", "_", str(t.head), t.deprel, "_", "_"))
        )
    lines.append("")
    return "\n".join(lines) + "\n"
