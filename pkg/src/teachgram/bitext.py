"""Sentence-aligned bitext and IBM Model 1 word alignment.

Convention: the *source* side is English, the *target* side the L2. The
translation table holds t(target | source), with an optional NULL source.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, NamedTuple, Sequence

from .treebank import ExampleRef

NULL = "<NULL>"


class BitextError(ValueError):
    pass


class SentencePair(NamedTuple):
    source: tuple[str, ...]
    target: tuple[str, ...]
    pair_id: str


@dataclass(frozen=True)
class Bitext:
    pairs: tuple[SentencePair, ...]
    dropped_long: int = 0
    dropped_empty: int = 0

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def index(self) -> dict[str, SentencePair]:
        idx = self.__dict__.get("_index")
        if idx is None:
            idx = {p.pair_id: p for p in self.pairs}
            object.__setattr__(self, "_index", idx)
        return idx

    def reversed(self) -> "Bitext":
        return Bitext(tuple(SentencePair(p.target, p.source, p.pair_id) for p in self.pairs),
                      self.dropped_long, self.dropped_empty)

    def example_ref(self, provenance: tuple) -> ExampleRef:
        """Provenance is ``(pair_id, source_index, target_index)``, 0-based.

        The L2 sentence is shown with the aligned target word highlighted and
        the English sentence as gloss.
        """
        pair = self.index[provenance[0]]
        highlight = (provenance[2] + 1,) if len(provenance) > 2 else ()
        return ExampleRef(pair.pair_id, pair.target, highlight, " ".join(pair.source))

    def sentence_length(self, provenance: tuple) -> int:
        return len(self.index[provenance[0]].target)


def make_bitext(pairs: Iterable[tuple[Sequence[str], Sequence[str]]], max_len: int = 80) -> Bitext:
    kept, long_, empty = [], 0, 0
    for n, (src, tgt) in enumerate(pairs, start=1):
        if not src or not tgt:
            empty += 1
            continue
        if len(src) > max_len or len(tgt) > max_len:
            long_ += 1
            continue
        kept.append(SentencePair(tuple(src), tuple(tgt), f"p{n}"))
    return Bitext(tuple(kept), long_, empty)


def load_bitext(source_path, target_path, max_len: int = 80, lowercase_source: bool = True) -> Bitext:
    """Read a Moses-style pair of files; line *i* of each file forms pair ``p<i>``."""
    try:
        src_lines = Path(source_path).read_text(encoding="utf-8").splitlines()
        tgt_lines = Path(target_path).read_text(encoding="utf-8").splitlines()
    except (OSError, UnicodeDecodeError) as e:
        raise BitextError(f"cannot read bitext: {e}") from e
    if len(src_lines) != len(tgt_lines):
        raise BitextError(f"line count mismatch: {len(src_lines)} source vs {len(tgt_lines)} target")
    return make_bitext(
        ((s.lower() if lowercase_source else s).split(), t.split()) for s, t in zip(src_lines, tgt_lines)
    )


class TranslationTable(dict):
    """``table[source][target] -> probability``."""

    def prob(self, target: str, source: str) -> float:
        return self.get(source, {}).get(target, 0.0)

    def to_tsv(self, min_prob: float = 1e-4) -> str:
        lines = []
        for s in sorted(self):
            for f in sorted(self[s]):
                p = self[s][f]
                if p >= min_prob:
                    lines.append(f"{s}\t{f}\t{p!r}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_tsv(cls, text: str) -> "TranslationTable":
        table = cls()
        for line in text.splitlines():
            if line:
                s, f, p = line.split("\t")
                table.setdefault(s, {})[f] = float(p)
        return table


def _sources(pair: SentencePair, use_null: bool):
    return ((NULL,) + pair.source) if use_null else pair.source


def log_likelihood(bt: Bitext, table: TranslationTable, use_null: bool) -> float:
    """Corpus log-likelihood under Model 1, dropping the constant length term."""
    total = 0.0
    for pair in bt.pairs:
        srcs = _sources(pair, use_null)
        for f in pair.target:
            total += math.log(sum(table.prob(f, s) for s in srcs) / len(srcs))
    return total


def train_ibm1(bt: Bitext, iterations: int = 10, use_null: bool = True,
               on_iteration: Callable[[int, TranslationTable, float], None] | None = None) -> TranslationTable:
    """Estimate t(target | source) with EM.

    ``on_iteration(i, table, loglik)`` is called after each M-step, where
    ``loglik`` is the likelihood of the parameters the E-step started from.
    """
    if not bt.pairs:
        raise BitextError("empty bitext")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")

    cooc: dict[str, set[str]] = defaultdict(set)
    for pair in bt.pairs:
        for s in _sources(pair, use_null):
            cooc[s].update(pair.target)
    table = TranslationTable()
    for s in sorted(cooc):
        targets = sorted(cooc[s])
        table[s] = {f: 1.0 / len(targets) for f in targets}

    for it in range(iterations):
        counts: dict[str, dict[str, float]] = {s: dict.fromkeys(row, 0.0) for s, row in table.items()}
        loglik = 0.0
        for pair in bt.pairs:
            srcs = _sources(pair, use_null)
            for f in pair.target:
                probs = [table[s][f] for s in srcs]
                z = sum(probs)
                loglik += math.log(z / len(srcs))
                for s, p in zip(srcs, probs):
                    counts[s][f] += p / z
        new = TranslationTable()
        for s in sorted(counts):
            row = counts[s]
            total = math.fsum(row.values())
            new[s] = {f: c / total for f, c in row.items()} if total > 0 else dict(table[s])
        table = new
        if on_iteration:
            on_iteration(it + 1, table, loglik)
    return table


@dataclass(frozen=True)
class Alignment:
    links: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def transposed(self) -> "Alignment":
        return Alignment(frozenset((j, i) for i, j in self.links))

    def to_pharaoh(self) -> str:
        return " ".join(f"{i}-{j}" for i, j in sorted(self.links))

    @classmethod
    def from_pharaoh(cls, line: str) -> "Alignment":
        links = set()
        for item in line.split():
            i, _, j = item.partition("-")
            links.add((int(i), int(j)))
        return cls(frozenset(links))


def align(pair: SentencePair, table: TranslationTable, use_null: bool = True) -> Alignment:
    """Viterbi alignment: each target word links to its most probable source.

    NULL wins ties against real words; among real words the smallest index
    wins. Target words the table has never seen stay unlinked.
    """
    links = set()
    for j, f in enumerate(pair.target):
        best_i, best_p = None, 0.0
        if use_null:
            best_p = table.prob(f, NULL)
        for i, s in enumerate(pair.source):
            p = table.prob(f, s)
            if p > best_p:
                best_i, best_p = i, p
        if best_i is not None:
            links.add((best_i, j))
    return Alignment(frozenset(links))


def symmetrize(forward: Alignment, reverse: Alignment) -> Alignment:
    """Intersection; ``reverse`` must already be transposed into (source, target) order."""
    return Alignment(forward.links & reverse.links)


def align_corpus(bt: Bitext, iterations: int = 10, use_null: bool = True):
    """Train both directions and return (forward table, intersected alignments)."""
    fwd = train_ibm1(bt, iterations, use_null)
    rev_bt = bt.reversed()
    rev = train_ibm1(rev_bt, iterations, use_null)
    alignments = [
        symmetrize(align(p, fwd, use_null), align(rp, rev, use_null).transposed())
        for p, rp in zip(bt.pairs, rev_bt.pairs)
    ]
    return fwd, alignments


def write_pharaoh(alignments: Iterable[Alignment]) -> str:
    return "".join(a.to_pharaoh() + "\n" for a in alignments)


def read_pharaoh(text: str) -> list[Alignment]:
    return [Alignment.from_pharaoh(line) for line in text.split("\n")[:-1]] if text else []
