"""Frequency-ordered summaries of the morphological attributes in a treebank."""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass

from .treebank import ExampleRef, Treebank


@dataclass(frozen=True)
class ExampleForm:
    form: str
    lemma: str
    count: int
    example: ExampleRef


@dataclass(frozen=True)
class ValueSummary:
    value: str
    total_count: int
    by_upos: dict[str, int]
    example_forms: tuple[ExampleForm, ...]


@dataclass(frozen=True)
class FeatureSummary:
    attribute: str
    values: tuple[ValueSummary, ...]

    def to_dict(self) -> dict:
        return {
            "attribute": self.attribute,
            "values": [{
                "value": v.value,
                "total_count": v.total_count,
                "by_upos": [[k, n] for k, n in v.by_upos.items()],
                "example_forms": [{"form": e.form, "lemma": e.lemma, "count": e.count,
                                   "example": e.example.to_dict()} for e in v.example_forms],
            } for v in self.values],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSummary":
        return cls(d["attribute"], tuple(
            ValueSummary(v["value"], v["total_count"], {k: n for k, n in v["by_upos"]},
                         tuple(ExampleForm(e["form"], e["lemma"], e["count"],
                                           ExampleRef.from_dict(e["example"]))
                               for e in v["example_forms"]))
            for v in d["values"]))


def _desc(counter: Counter) -> list:
    return sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))


def summarize_features(tb: Treebank, top_n_examples: int = 5) -> list[FeatureSummary]:
    """Answer "which values does attribute X take, on which word types, e.g.?".

    Attributes are listed alphabetically; values, POS tags and example forms
    by descending count (ties alphabetical). Each example form is shown in
    the shortest sentence that contains it.
    """
    value_counts: dict[str, Counter] = defaultdict(Counter)
    upos_counts: dict[tuple[str, str], Counter] = defaultdict(Counter)
    form_counts: dict[tuple[str, str], Counter] = defaultdict(Counter)
    # (attr, value, form, lemma) -> (sentence length, corpus order, sentence, token id)
    shortest: dict[tuple, tuple] = {}

    for order, s in enumerate(tb.sentences):
        for t in s.tokens:
            for attr, value in t.feats.items():
                value_counts[attr][value] += 1
                upos_counts[attr, value][t.upos or "_"] += 1
                form_counts[attr, value][t.form, t.lemma] += 1
                key = (attr, value, t.form, t.lemma)
                cand = (len(s), order, t.id)
                if key not in shortest or cand < shortest[key][:3]:
                    shortest[key] = cand + (s,)

    out = []
    for attr in sorted(value_counts):
        values = []
        for value, total in _desc(value_counts[attr]):
            forms = []
            for (form, lemma), n in _desc(form_counts[attr, value])[:top_n_examples]:
                _, _, tid, sent = shortest[attr, value, form, lemma]
                forms.append(ExampleForm(form, lemma, n, sent.example_ref(tid)))
            values.append(ValueSummary(value, total, dict(_desc(upos_counts[attr, value])), tuple(forms)))
        out.append(FeatureSummary(attr, tuple(values)))
    return out
