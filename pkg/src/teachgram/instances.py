"""Labelled datasets for word order, agreement and suffix questions."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .treebank import Sentence, Treebank, well_formed_ids

MISSING_VALUE = "∅"
OTHER = "OTHER"
NO_SUFFIX = "NONE"


@dataclass(frozen=True)
class Instance:
    features: dict[str, str]
    label: str
    provenance: tuple = ()

    def __post_init__(self):
        if not self.label:
            raise ValueError("instance label must be nonempty")


class Dataset(list):
    """A list of instances that also remembers how many candidates were skipped."""

    def __init__(self, items: Iterable[Instance] = (), candidates: int = 0, skipped: int = 0):
        super().__init__(items)
        self.candidates = candidates
        self.skipped = skipped


@dataclass(frozen=True)
class RelationSpec:
    name: str
    dependent_deprels: frozenset[str]
    head_upos: frozenset[str] = frozenset()
    dependent_upos: frozenset[str] = frozenset()
    # plural nouns used when phrasing the question, e.g. ("subjects", "verbs")
    dependent_noun: str = ""
    head_noun: str = ""

    def __post_init__(self):
        if not self.dependent_deprels:
            raise ValueError(f"relation {self.name!r}: dependent_deprels must be nonempty")

    def matches_deprel(self, deprel: str) -> bool:
        return deprel in self.dependent_deprels or deprel.split(":")[0] in self.dependent_deprels

    def matches_upos(self, head_upos: str, dep_upos: str) -> bool:
        # an empty set means "any tag"
        return (not self.head_upos or head_upos in self.head_upos) and (
            not self.dependent_upos or dep_upos in self.dependent_upos)


_NOMINAL = frozenset({"NOUN", "PROPN", "PRON"})

DEFAULT_RELATIONS: tuple[RelationSpec, ...] = (
    RelationSpec("subject-verb", frozenset({"nsubj"}), frozenset({"VERB"}), _NOMINAL, "subjects", "verbs"),
    RelationSpec("object-verb", frozenset({"obj"}), frozenset({"VERB"}), _NOMINAL, "objects", "verbs"),
    RelationSpec("numeral-noun", frozenset({"nummod"}), frozenset({"NOUN", "PROPN"}), frozenset({"NUM"}),
                 "numerals", "nouns"),
    RelationSpec("adjective-noun", frozenset({"amod"}), frozenset({"NOUN", "PROPN"}), frozenset({"ADJ"}),
                 "adjectives", "nouns"),
    RelationSpec("noun-adposition", frozenset({"case"}), _NOMINAL, frozenset({"ADP"}),
                 "adpositions", "nouns"),
)


@dataclass(frozen=True)
class FeatureConfig:
    lemma_vocab_size: int = 100
    include_neighbor_pos: bool = True
    neighbor_window: int = 1
    include_morph_feats: bool = True
    include_sibling_deprels: bool = True

    def __post_init__(self):
        if self.lemma_vocab_size < 0 or self.neighbor_window < 0:
            raise ValueError("lemma_vocab_size and neighbor_window must be >= 0")


def lemma_vocab(tb: Treebank, size: int) -> frozenset[str]:
    """The ``size`` most frequent lemmas; ties go to the alphabetically first."""
    counts = Counter(t.lemma for s in tb.sentences for t in s.tokens if t.lemma)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return frozenset(lemma for lemma, _ in ranked[:size])


def _clean(value: str) -> str | None:
    if not value or value == MISSING_VALUE:
        return None
    return value


def featurize(sentence: Sentence, head_id: int, dep_id: int, cfg: FeatureConfig,
              lemma_vocab: frozenset[str] | set[str]) -> dict[str, str]:
    head = sentence.token(head_id)
    dep = sentence.token(dep_id)
    feats: dict[str, str] = {}

    def put(name, value):
        value = _clean(value)
        if value is not None:
            feats[name] = value

    put("head-lemma", head.lemma if head.lemma in lemma_vocab else OTHER)
    put("dep-lemma", dep.lemma if dep.lemma in lemma_vocab else OTHER)
    put("head-upos", head.upos)
    put("dep-upos", dep.upos)
    put("deprel", dep.deprel)
    if cfg.include_morph_feats:
        for attr, value in head.feats.items():
            put(f"head-{attr}", value)
        for attr, value in dep.feats.items():
            put(f"dep-{attr}", value)
    if cfg.include_neighbor_pos:
        n = len(sentence)
        for offset in range(-cfg.neighbor_window, cfg.neighbor_window + 1):
            pos = dep_id + offset
            if offset == 0 or not 1 <= pos <= n:
                continue
            put(f"nbr-{offset}-upos", sentence.token(pos).upos)
    if cfg.include_sibling_deprels:
        for sib in sentence.children(head_id):
            if sib.id != dep_id and sib.deprel:
                feats[f"sib-{sib.deprel}"] = "yes"
    return feats


def _usable(tb: Treebank):
    ok = well_formed_ids(tb)
    return [s for s in tb.sentences if s.sent_id in ok]


def extract_order_instances(tb: Treebank, spec: RelationSpec, cfg: FeatureConfig,
                            vocab: frozenset[str] | None = None) -> Dataset:
    """One instance per matching (head, dependent) edge, labelled before/after.

    Candidates are edges whose deprel matches ``spec``; those failing the POS
    constraints or sitting in a malformed sentence count as skipped.
    """
    if vocab is None:
        vocab = lemma_vocab(tb, cfg.lemma_vocab_size)
    ok = well_formed_ids(tb)
    out: list[Instance] = []
    candidates = skipped = 0
    for s in tb.sentences:
        for dep in s.tokens:
            if dep.head == 0 or not spec.matches_deprel(dep.deprel):
                continue
            candidates += 1
            if s.sent_id not in ok:
                skipped += 1
                continue
            head = s.token(dep.head)
            if not spec.matches_upos(head.upos, dep.upos):
                skipped += 1
                continue
            label = "before" if dep.id < head.id else "after"
            out.append(Instance(featurize(s, head.id, dep.id, cfg, vocab), label,
                                (s.sent_id, head.id, dep.id)))
    return Dataset(out, candidates, skipped)


def extract_agreement_instances(tb: Treebank, attribute: str, cfg: FeatureConfig,
                                vocab: frozenset[str] | None = None) -> Dataset:
    """Label every edge whose two ends both mark ``attribute`` as agree/disagree."""
    if vocab is None:
        vocab = lemma_vocab(tb, cfg.lemma_vocab_size)
    leaky = {f"head-{attribute}", f"dep-{attribute}"}
    out: list[Instance] = []
    candidates = skipped = 0
    for s in _usable(tb):
        for dep in s.tokens:
            if dep.head == 0:
                continue
            candidates += 1
            head = s.token(dep.head)
            if attribute not in head.feats or attribute not in dep.feats:
                skipped += 1
                continue
            label = "agree" if head.feats[attribute] == dep.feats[attribute] else "disagree"
            feats = featurize(s, head.id, dep.id, cfg, vocab)
            for name in leaky:
                feats.pop(name, None)
            out.append(Instance(feats, label, (s.sent_id, head.id, dep.id)))
    return Dataset(out, candidates, skipped)


class Segmentation(NamedTuple):
    stem: str
    suffix: str
    confident: bool


def segment_suffix(form: str, lemma: str) -> Segmentation:
    """Split ``form`` into stem + suffix by its longest common prefix with ``lemma``.

    When the shared prefix is shorter than 2 characters or than half the
    lemma, the split is not trusted: ``confident`` is False and the suffix
    is empty.
    """
    f, l = form.casefold(), lemma.casefold()
    n = 0
    for a, b in zip(f, l):
        if a != b:
            break
        n += 1
    stem = f[:n]
    if n < 2 or n < len(l) / 2:
        return Segmentation(f, "", False)
    return Segmentation(stem, f[n:], True)


@dataclass
class SuffixData:
    upos: str
    inventory: dict[str, int]
    instances: Dataset
    sandhi_variants: list[tuple[str, str]] = field(default_factory=list)

    def __iter__(self):
        # allows ``inventory, instances = extract_suffix_instances(...)``
        return iter((self.inventory, self.instances))


def sandhi_candidates(inventory: dict[str, int]) -> list[tuple[str, str]]:
    """Suffix pairs that differ only in their first character (stem-final vowel changes).

    Either one suffix is the other with one extra leading character
    (``alaa``/``laa``), or both have the same length and differ only in the
    first character (``aat``/``iat``).
    """
    found = set()
    items = sorted(inventory)
    for a in items:
        for b in items:
            if a >= b:
                continue
            if a[1:] == b or b[1:] == a or (len(a) == len(b) > 1 and a[1:] == b[1:]):
                found.add((a, b))
    return sorted(found)


def extract_suffix_instances(tb: Treebank, upos: str, cfg: FeatureConfig, min_suffix_count: int = 5,
                             vocab: frozenset[str] | None = None) -> SuffixData:
    if vocab is None:
        vocab = lemma_vocab(tb, cfg.lemma_vocab_size)
    raw: Counter[str] = Counter()
    rows = []
    skipped = candidates = 0
    for s in _usable(tb):
        for t in s.tokens:
            if t.upos != upos:
                continue
            candidates += 1
            if not t.form or not t.lemma:
                skipped += 1
                continue
            seg = segment_suffix(t.form, t.lemma)
            if not seg.confident:
                skipped += 1
                continue
            if seg.suffix:
                raw[seg.suffix] += 1
            rows.append((s, t, seg.suffix))

    inventory = {k: v for k, v in sorted(raw.items(), key=lambda kv: (-kv[1], kv[0]))
                 if v >= min_suffix_count}
    out: list[Instance] = []
    for s, t, suffix in rows:
        if not suffix:
            label = NO_SUFFIX
        elif suffix in inventory:
            label = suffix
        else:
            label = OTHER
        feats: dict[str, str] = {}
        if cfg.include_morph_feats:
            for attr, value in t.feats.items():
                feats[f"dep-{attr}"] = value
        if t.deprel:
            feats["deprel"] = t.deprel
        if t.head:
            head = s.token(t.head)
            if head.upos:
                feats["head-upos"] = head.upos
            if head.lemma:
                feats["head-lemma"] = head.lemma if head.lemma in vocab else OTHER
        out.append(Instance(feats, label, (s.sent_id, t.id)))
    return SuffixData(upos, inventory, Dataset(out, candidates, skipped), sandhi_candidates(inventory))


def dump_tsv(instances: Iterable[Instance]) -> str:
    """One line per instance: sorted feature=value pairs, a tab, then the label."""
    lines = []
    for inst in instances:
        pairs = " ".join(f"{k}={inst.features[k]}" for k in sorted(inst.features))
        lines.append(f"{pairs}\t{inst.label}")
    return "\n".join(lines) + ("\n" if lines else "")
