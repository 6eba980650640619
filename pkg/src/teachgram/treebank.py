"""CoNLL-U reading, validation and canonical writing.

Only basic dependency trees are kept: multiword-token range lines (``3-4``)
and empty nodes (``5.1``) are dropped, but counted in :class:`ParseStats`
so the loss is visible.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

MISSING = "_"


class ConllUError(ValueError):
    """Malformed CoNLL-U input. ``lineno`` is 1-based."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ConllUEncodingError(ConllUError):
    pass


@dataclass(frozen=True)
class Token:
    id: int
    form: str
    lemma: str
    upos: str
    feats: dict[str, str]
    head: int
    deprel: str
    xpos: str = ""
    deps: str = ""
    misc: str = ""


@dataclass(frozen=True)
class ExampleRef:
    """A pointer to one illustrative sentence.

    ``highlight`` holds 1-based positions in ``tokens`` to emphasise.
    """

    source_id: str
    tokens: tuple[str, ...]
    highlight: tuple[int, ...] = ()
    gloss: str | None = None

    def to_dict(self) -> dict:
        return {
            "source_id": self.source_id,
            "tokens": list(self.tokens),
            "highlight": list(self.highlight),
            "gloss": self.gloss,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExampleRef":
        return cls(d["source_id"], tuple(d["tokens"]), tuple(d["highlight"]), d.get("gloss"))


@dataclass(frozen=True)
class Sentence:
    sent_id: str
    tokens: tuple[Token, ...]
    comments: tuple[str, ...] = ()
    translation: str | None = None

    def __len__(self) -> int:
        return len(self.tokens)

    def token(self, token_id: int) -> Token:
        return self.tokens[token_id - 1]

    @property
    def text(self) -> str:
        for c in self.comments:
            key, sep, value = c.partition("=")
            if sep and key.strip() == "text":
                return value.strip()
        return " ".join(t.form for t in self.tokens)

    def children(self, head_id: int) -> list[Token]:
        return [t for t in self.tokens if t.head == head_id]

    def example_ref(self, *highlight: int) -> ExampleRef:
        return ExampleRef(
            self.sent_id,
            tuple(t.form for t in self.tokens),
            tuple(sorted(set(highlight))),
            self.translation,
        )


@dataclass(frozen=True)
class ParseStats:
    sentences: int = 0
    tokens: int = 0
    multiword_ranges: int = 0
    empty_nodes: int = 0
    renamed_ids: int = 0


@dataclass(frozen=True)
class Treebank:
    language: str
    sentences: tuple[Sentence, ...]
    source_paths: tuple[str, ...] = ()
    stats: ParseStats = field(default_factory=ParseStats)

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    @property
    def index(self) -> dict[str, Sentence]:
        # cached on first use; the dataclass is frozen so bypass __setattr__
        idx = self.__dict__.get("_index")
        if idx is None:
            idx = {s.sent_id: s for s in self.sentences}
            object.__setattr__(self, "_index", idx)
        return idx

    def example_ref(self, provenance: tuple) -> ExampleRef:
        sent_id, *ids = provenance
        return self.index[sent_id].example_ref(*ids)

    def sentence_length(self, provenance: tuple) -> int:
        return len(self.index[provenance[0]])


class Violation(NamedTuple):
    kind: str
    sent_id: str
    detail: str


def _parse_feats(col: str, lineno: int) -> dict[str, str]:
    feats: dict[str, str] = {}
    if col in ("", MISSING):
        return feats
    for item in col.split("|"):
        name, sep, value = item.partition("=")
        if not sep or not name or not value:
            raise ConllUError(f"bad feature {item!r}", lineno)
        if name in feats:
            raise ConllUError(f"duplicate feature {name!r}", lineno)
        feats[name] = value
    return feats


def _col(value: str) -> str:
    return "" if value == MISSING else value


def _build_sentence(comments, tokens, counter) -> Sentence:
    sent_id = None
    translation = None
    for c in comments:
        key, sep, value = c.partition("=")
        key = key.strip()
        if not sep:
            continue
        if key == "sent_id":
            sent_id = value.strip()
        elif key == "text_en":
            translation = value.strip()
    if not sent_id:
        sent_id = f"s{counter}"
    return Sentence(sent_id, tuple(tokens), tuple(comments), translation)


def parse_conllu(data: bytes | str, language: str = "und", source: str | None = None) -> Treebank:
    """Parse CoNLL-U text into a :class:`Treebank`.

    Raises :class:`ConllUError` on the first malformed line and
    :class:`ConllUEncodingError` when ``data`` is not UTF-8.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ConllUEncodingError(f"input is not UTF-8 ({e.reason} at byte {e.start})") from e
    if data.startswith("﻿"):
        data = data[1:]

    sentences: list[Sentence] = []
    comments: list[str] = []
    tokens: list[Token] = []
    n_ranges = n_empty = n_tokens = 0

    def flush():
        nonlocal comments, tokens
        if tokens:
            sentences.append(_build_sentence(comments, tokens, len(sentences) + 1))
        comments, tokens = [], []

    for lineno, raw in enumerate(data.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            if tokens:
                raise ConllUError("comment inside token block", lineno)
            comments.append(line[1:].lstrip(" ") if line.startswith("# ") else line[1:])
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConllUError(f"expected 10 tab-separated columns, found {len(cols)}", lineno)
        tid = cols[0]
        if "-" in tid:
            n_ranges += 1
            continue
        if "." in tid:
            n_empty += 1
            continue
        try:
            token_id = int(tid)
        except ValueError:
            raise ConllUError(f"non-integer token id {tid!r}", lineno) from None
        try:
            head = int(cols[6])
        except ValueError:
            raise ConllUError(f"non-integer head {cols[6]!r}", lineno) from None
        if token_id < 1 or head < 0:
            raise ConllUError("token id must be >= 1 and head >= 0", lineno)
        tokens.append(Token(
            id=token_id,
            form=_col(cols[1]),
            lemma=_col(cols[2]),
            upos=_col(cols[3]),
            feats=_parse_feats(cols[5], lineno),
            head=head,
            deprel=_col(cols[7]),
            xpos=_col(cols[4]),
            deps=_col(cols[8]),
            misc=_col(cols[9]),
        ))
        n_tokens += 1
    flush()

    # deterministic suffixes for duplicate sent_ids
    seen: dict[str, int] = {}
    renamed = 0
    unique: list[Sentence] = []
    taken = {s.sent_id for s in sentences}
    for s in sentences:
        if s.sent_id in seen:
            k = seen[s.sent_id]
            new_id = f"{s.sent_id}-{k}"
            while new_id in taken:
                k += 1
                new_id = f"{s.sent_id}-{k}"
            seen[s.sent_id] = k + 1
            taken.add(new_id)
            renamed += 1
            s = Sentence(new_id, s.tokens, s.comments, s.translation)
        else:
            seen[s.sent_id] = 2
        unique.append(s)

    stats = ParseStats(len(unique), n_tokens, n_ranges, n_empty, renamed)
    return Treebank(language, tuple(unique), (source,) if source else (), stats)


def read_conllu(paths: str | Path | Iterable[str | Path], language: str = "und") -> Treebank:
    """Read one or more CoNLL-U files into a single treebank."""
    if isinstance(paths, (str, Path)):
        paths = [paths]
    parts = [parse_conllu(Path(p).read_bytes(), language, source=str(p)) for p in paths]
    if len(parts) == 1:
        return parts[0]
    # re-parse the concatenation so duplicate ids across files get suffixed
    joined = b"".join(serialize_conllu(t) for t in parts)
    tb = parse_conllu(joined, language)
    stats = ParseStats(
        tb.stats.sentences, tb.stats.tokens,
        sum(t.stats.multiword_ranges for t in parts),
        sum(t.stats.empty_nodes for t in parts),
        tb.stats.renamed_ids,
    )
    return Treebank(language, tb.sentences, tuple(str(p) for p in paths), stats)


def validate(tb: Treebank) -> list[Violation]:
    """Return every structural problem found; never raises."""
    out: list[Violation] = []
    for s in tb.sentences:
        ids = [t.id for t in s.tokens]
        if ids != list(range(1, len(ids) + 1)):
            out.append(Violation("non-contiguous-ids", s.sent_id, f"ids {ids}"))
        idset = set(ids)
        roots = [t.id for t in s.tokens if t.head == 0]
        for t in s.tokens:
            if t.head == t.id:
                out.append(Violation("self-head", s.sent_id, f"token {t.id} is its own head"))
            elif t.head != 0 and t.head not in idset:
                out.append(Violation("dangling-head", s.sent_id, f"token {t.id} has head {t.head}"))
        if not roots:
            out.append(Violation("zero-roots", s.sent_id, "no token has head 0"))
        elif len(roots) > 1:
            out.append(Violation("multi-root", s.sent_id, f"roots {roots}"))
    return out


def well_formed_ids(tb: Treebank) -> set[str]:
    """Ids of sentences with no violations; only these feed instance extraction."""
    bad = {v.sent_id for v in validate(tb)}
    return {s.sent_id for s in tb.sentences if s.sent_id not in bad}


def _out(value: str) -> str:
    return value if value else MISSING


def format_feats(feats: dict[str, str]) -> str:
    if not feats:
        return MISSING
    return "|".join(f"{k}={feats[k]}" for k in sorted(feats))


def serialize_conllu(tb: Treebank) -> bytes:
    lines: list[str] = []
    for s in tb.sentences:
        lines.extend(f"# {c}" for c in s.comments)
        for t in s.tokens:
            lines.append("\t".join((
                str(t.id), _out(t.form), _out(t.lemma), _out(t.upos), _out(t.xpos),
                format_feats(t.feats), str(t.head), _out(t.deprel), _out(t.deps), _out(t.misc),
            )))
        lines.append("")
    if not lines:
        return b""
    return ("\n".join(lines) + "\n").encode("utf-8")
