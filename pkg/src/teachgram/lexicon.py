"""Vocabulary materials: divergent translations, categories, adjective sets."""
from __future__ import annotations

import configparser
import math
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .bitext import Alignment, Bitext, TranslationTable
from .instances import Instance
from .treebank import ExampleRef, Treebank

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

# 50 frequent English function words
DEFAULT_STOPLIST = frozenset("""
the of and to a in is it that was for on are with as i his they be at one have this from or had
by but not what all were we when your can said there an each which she do how their if will he
""".split())

ADJECTIVE_POS = frozenset({"a", "s"})
UPOS_TO_LEXPOS = {"NOUN": "n", "PROPN": "n", "VERB": "v", "ADJ": "a", "ADV": "r"}


class LexiconError(ValueError):
    pass


@dataclass
class TranslationSet:
    english: str
    candidates: dict[str, int]
    example_pair_ids: dict[str, list[str]]
    surface_forms: dict[str, set[str]] = field(default_factory=dict)

    def total(self) -> int:
        return sum(self.candidates.values())

    def to_dict(self) -> dict:
        return {
            "english": self.english,
            "candidates": [[k, n] for k, n in self.candidates.items()],
            "example_pair_ids": {k: v for k, v in sorted(self.example_pair_ids.items())},
        }


def _desc(counter) -> dict:
    return dict(sorted(counter.items(), key=lambda kv: (-kv[1], kv[0])))


def extract_translation_sets(bt: Bitext, alignments: Sequence[Alignment],
                             target_lemmas: Mapping[str, Sequence[str]] | None = None,
                             merge_lemmas: bool = True) -> list[TranslationSet]:
    """Count, for each English word, which L2 words it was linked to.

    With ``target_lemmas`` (pair_id -> lemma per target token) and
    ``merge_lemmas`` on, L2 keys are lemmas; otherwise surface forms.
    """
    if len(alignments) != len(bt.pairs):
        raise ValueError("alignments must correspond 1:1 to bitext pairs")
    counts: dict[str, Counter] = defaultdict(Counter)
    examples: dict[str, dict[str, list[str]]] = defaultdict(lambda: defaultdict(list))
    forms: dict[str, dict[str, set[str]]] = defaultdict(lambda: defaultdict(set))
    for pair, al in zip(bt.pairs, alignments):
        lemmas = target_lemmas.get(pair.pair_id) if target_lemmas and merge_lemmas else None
        for i, j in sorted(al.links):
            english = pair.source[i].lower()
            surface = pair.target[j]
            key = lemmas[j] if lemmas and j < len(lemmas) and lemmas[j] else surface
            counts[english][key] += 1
            forms[english][key].add(surface)
            ids = examples[english][key]
            if not ids or ids[-1] != pair.pair_id:
                ids.append(pair.pair_id)
    return [
        TranslationSet(e, _desc(counts[e]), {k: examples[e][k] for k in sorted(examples[e])},
                       {k: forms[e][k] for k in sorted(forms[e])})
        for e in sorted(counts)
    ]


def _candidate_prob(ts: TranslationSet, key: str, table: TranslationTable) -> float:
    row = table.get(ts.english, {})
    forms = ts.surface_forms.get(key)
    if not forms:
        return row.get(key, 0.0)
    # lemma keys: total probability over the surface forms folded into them
    return math.fsum(row.get(f, 0.0) for f in sorted(forms))


def filter_divergent_pairs(sets: Sequence[TranslationSet], min_count: int = 3, min_candidates: int = 2,
                           stoplist=DEFAULT_STOPLIST, table: TranslationTable | None = None,
                           min_prob: float = 0.1) -> list[TranslationSet]:
    """Keep English words with at least ``min_candidates`` well-attested translations."""
    if min_count < 0 or min_candidates < 0 or min_prob < 0:
        raise ValueError("thresholds must be >= 0")
    kept = []
    for ts in sets:
        if ts.english in stoplist:
            continue
        good = {
            k: n for k, n in ts.candidates.items()
            if n >= min_count and (table is None or _candidate_prob(ts, k, table) >= min_prob)
        }
        if len(good) >= max(min_candidates, 1):
            kept.append(TranslationSet(
                ts.english, good,
                {k: ts.example_pair_ids[k] for k in good},
                {k: ts.surface_forms.get(k, set()) for k in good},
            ))
    return kept


def _occurrences(ts: TranslationSet, bt: Bitext, alignments, target_lemmas=None):
    """(pair, source index, target index, L2 key) for each retained link."""
    wanted = set(ts.candidates)
    pair_ids = {pid for ids in ts.example_pair_ids.values() for pid in ids}
    for pair, al in zip(bt.pairs, alignments):
        if pair.pair_id not in pair_ids:
            continue
        lemmas = target_lemmas.get(pair.pair_id) if target_lemmas else None
        for i, j in sorted(al.links):
            if pair.source[i].lower() != ts.english:
                continue
            key = lemmas[j] if lemmas and j < len(lemmas) and lemmas[j] else pair.target[j]
            if key in wanted:
                yield pair, i, j, key


def build_selection_instances(ts: TranslationSet, bt: Bitext, alignments: Sequence[Alignment],
                              target_lemmas=None, window: int = 2, bow_size: int = 20,
                              stoplist=DEFAULT_STOPLIST) -> list[Instance]:
    """Lexical-selection dataset: which L2 word was chosen, given English context."""
    occ = list(_occurrences(ts, bt, alignments, target_lemmas))
    cooc: Counter[str] = Counter()
    for pair, i, _, _ in occ:
        words = {w.lower() for k, w in enumerate(pair.source) if k != i}
        cooc.update(w for w in words if w not in stoplist and w != ts.english and w.isalpha())
    bow = [w for w, _ in sorted(cooc.items(), key=lambda kv: (-kv[1], kv[0]))[:bow_size]]

    out = []
    for pair, i, j, key in occ:
        src = [w.lower() for w in pair.source]
        feats = {}
        for off in range(-window, window + 1):
            if off and 0 <= i + off < len(src):
                feats[f"ctx-{off}"] = src[i + off]
        present = set(src[:i] + src[i + 1:])
        for w in bow:
            if w in present:
                feats[f"ctx-bow-{w}"] = "yes"
        out.append(Instance(feats, key, (pair.pair_id, i, j)))
    return out


# -- sense lexicon -------------------------------------------------------------

@dataclass(frozen=True)
class Synset:
    id: str
    pos: str
    lemmas: tuple[str, ...]
    hypernyms: tuple[str, ...]
    antonyms: tuple[str, ...]
    gloss: str


@dataclass
class SenseLexicon:
    synsets: dict[str, Synset]
    lemma_index: dict[tuple[str, str], list[str]]

    def senses(self, lemma: str, pos: str) -> list[str]:
        if pos in ADJECTIVE_POS:
            # satellite and head adjectives interleave in file order
            return sorted(
                self.lemma_index.get((lemma, "a"), []) + self.lemma_index.get((lemma, "s"), []),
                key=self._rank.__getitem__)
        return self.lemma_index.get((lemma, pos), [])

    def __post_init__(self):
        self._rank = {sid: n for n, sid in enumerate(self.synsets)}


def _split_ids(col: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in col.split(",") if x.strip())


def parse_sense_lexicon(text: str) -> SenseLexicon:
    """Parse the six-column TSV: id, pos, lemmas, hypernyms, antonyms, gloss."""
    synsets: dict[str, Synset] = {}
    index: dict[tuple[str, str], list[str]] = defaultdict(list)
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 6 or not cols[0] or not cols[1]:
            raise LexiconError(f"line {lineno}: expected 6 tab-separated columns with id and pos")
        sid, pos = cols[0].strip(), cols[1].strip()
        if sid in synsets:
            raise LexiconError(f"line {lineno}: duplicate synset {sid!r}")
        lemmas = _split_ids(cols[2])
        synsets[sid] = Synset(sid, pos, lemmas, _split_ids(cols[3]), _split_ids(cols[4]), cols[5].strip())
        for lemma in lemmas:
            index[lemma.lower(), pos].append(sid)

    for s in synsets.values():
        for ref in s.hypernyms + s.antonyms:
            if ref not in synsets:
                raise LexiconError(f"synset {s.id!r} references unknown synset {ref!r}")
    _check_acyclic(synsets)
    return SenseLexicon(synsets, dict(index))


def _check_acyclic(synsets: dict[str, Synset]) -> None:
    state: dict[str, int] = {}  # 1 = on stack, 2 = done
    for start in synsets:
        if state.get(start):
            continue
        stack = [(start, iter(synsets[start].hypernyms))]
        state[start] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[node] = 2
                stack.pop()
            elif state.get(nxt) == 1:
                raise LexiconError(f"hypernym cycle through {nxt!r}")
            elif not state.get(nxt):
                state[nxt] = 1
                stack.append((nxt, iter(synsets[nxt].hypernyms)))


def load_sense_lexicon(path) -> SenseLexicon:
    return parse_sense_lexicon(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class CategoryConfig:
    categories: dict[str, frozenset[str]]


def load_categories(path) -> CategoryConfig:
    """TOML (``[categories] food = ["food.n.01"]``) or INI (``food = food.n.01, ...``)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".toml":
        data = tomllib.loads(text)
        raw = data.get("categories", data)
        return CategoryConfig({k: frozenset(v) for k, v in sorted(raw.items())})
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp.read_string(text)
    section = cp["categories"] if cp.has_section("categories") else cp.defaults()
    return CategoryConfig({k: frozenset(_split_ids(v)) for k, v in sorted(section.items())})


def hypernym_distances(synset_id: str, lex: SenseLexicon) -> dict[str, int]:
    """Breadth-first hop counts to every ancestor; the synset itself is at 0."""
    dist = {synset_id: 0}
    queue = deque([synset_id])
    while queue:
        cur = queue.popleft()
        for h in lex.synsets[cur].hypernyms:
            if h not in dist:
                dist[h] = dist[cur] + 1
                queue.append(h)
    return dist


def assign_category(lemma: str, pos: str, lex: SenseLexicon, cats: CategoryConfig) -> str | None:
    """Category of the lemma's first sense, by nearest configured ancestor."""
    senses = lex.senses(lemma.lower(), pos)
    if not senses:
        return None
    dist = hypernym_distances(senses[0], lex)
    best = None
    for name in sorted(cats.categories):
        hops = [dist[s] for s in cats.categories[name] if s in dist]
        if hops and (best is None or min(hops) < best[0]):
            best = (min(hops), name)
    return best[1] if best else None


def categorize_vocabulary(sets: Sequence[TranslationSet], lex: SenseLexicon, cats: CategoryConfig,
                          bt: Bitext, k: int = 3, include_verbs: bool = True) -> dict[str, list[dict]]:
    """Group English words (with their top L2 translations) into categories.

    Verbs are grouped by part of speech rather than by an ancestor synset.
    """
    out: dict[str, list[dict]] = defaultdict(list)
    for ts in sets:
        cat = assign_category(ts.english, "n", lex, cats)
        if cat is None and include_verbs and lex.senses(ts.english, "v") and not lex.senses(ts.english, "n"):
            cat = "verbs"
        if cat is None:
            continue
        best = next(iter(ts.candidates))
        out[cat].append({
            "english": ts.english,
            "translations": [[key, n] for key, n in ts.candidates.items()],
            "examples": [_pair_example(bt, pid, ts.english, best).to_dict()
                         for pid in ts.example_pair_ids[best][:k]],
        })
    return {c: out[c] for c in sorted(out)}


def _pair_example(bt: Bitext, pair_id: str, english: str, l2: str | None = None) -> ExampleRef:
    pair = bt.index[pair_id]
    hl = tuple(j + 1 for j, w in enumerate(pair.target) if l2 is not None and w == l2)
    return ExampleRef(pair_id, pair.target, hl, " ".join(pair.source))


@dataclass(frozen=True)
class AdjectiveEntry:
    adjective: str
    gloss: str
    synonyms: tuple[str, ...]
    antonyms: tuple[str, ...]
    translations: tuple[tuple[str, int], ...]
    examples: tuple[ExampleRef, ...]

    def to_dict(self) -> dict:
        return {
            "adjective": self.adjective,
            "gloss": self.gloss,
            "synonyms": list(self.synonyms),
            "antonyms": list(self.antonyms),
            "translations": [list(t) for t in self.translations],
            "examples": [e.to_dict() for e in self.examples],
        }


def adjective_sets(tb_english: Treebank | None, bt: Bitext, lex: SenseLexicon, min_freq: int = 3,
                   translation_sets: Sequence[TranslationSet] = (), k: int = 3) -> list[AdjectiveEntry]:
    """Frequent English adjectives with gloss, synonyms, antonyms and L2 translations."""
    freq: Counter[str] = Counter(w.lower() for p in bt.pairs for w in p.source)
    if tb_english is not None:
        adjectives = {t.form.lower() for s in tb_english for t in s.tokens if t.upos == "ADJ"}
        adjectives |= {t.lemma.lower() for s in tb_english for t in s.tokens if t.upos == "ADJ" and t.lemma}
    else:
        adjectives = {lemma for (lemma, pos) in lex.lemma_index if pos in ADJECTIVE_POS}
    by_english = {ts.english: ts for ts in translation_sets}

    out = []
    for adj in sorted(adjectives, key=lambda a: (-freq[a], a)):
        if freq[adj] < min_freq:
            continue
        senses = lex.senses(adj, "a")
        if not senses:
            continue
        syn = lex.synsets[senses[0]]
        synonyms = tuple(sorted({x for x in syn.lemmas if x.lower() != adj}))
        antonyms = tuple(sorted({x for a in syn.antonyms for x in lex.synsets[a].lemmas}))
        ts = by_english.get(adj)
        translations = tuple(ts.candidates.items()) if ts else ()
        examples = []
        for p in bt.pairs:
            if adj in p.source:
                examples.append(_pair_example(bt, p.pair_id, adj, translations[0][0] if translations else None))
                if len(examples) == k:
                    break
        out.append(AdjectiveEntry(adj, syn.gloss, synonyms, antonyms, translations, tuple(examples)))
    return out


def dump_translation_sets(sets: Sequence[TranslationSet]) -> str:
    lines = [f"{ts.english}\t{key}\t{n}" for ts in sets for key, n in ts.candidates.items()]
    return "\n".join(lines) + ("\n" if lines else "")
