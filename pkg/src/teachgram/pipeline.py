"""From corpus to grammar points: one function per kind of question."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .bitext import Alignment, Bitext, TranslationTable
from .instances import (DEFAULT_RELATIONS, NO_SUFFIX, OTHER, FeatureConfig, Instance, RelationSpec,
                        extract_agreement_instances, extract_order_instances, extract_suffix_instances,
                        lemma_vocab)
from .lexicon import (DEFAULT_STOPLIST, CategoryConfig, SenseLexicon, TranslationSet, adjective_sets,
                      build_selection_instances, categorize_vocabulary, extract_translation_sets,
                      filter_divergent_pairs)
from .morphsum import summarize_features
from .report import GrammarPoint, build_grammar_point
from .rules import (LearnerConfig, Metrics, TreeNode, attach_examples, evaluate, extract_rules, split_dataset,
                    train_tree)
from .treebank import Treebank

UPOS_NAMES = {
    "NOUN": "nouns", "VERB": "verbs", "ADJ": "adjectives", "PRON": "pronouns", "PROPN": "proper nouns",
    "ADV": "adverbs", "NUM": "numerals", "AUX": "auxiliaries", "ADP": "adpositions", "DET": "determiners",
    "PART": "particles", "SCONJ": "subordinating conjunctions", "CCONJ": "conjunctions",
}


@dataclass(frozen=True)
class ExtractConfig:
    learner: LearnerConfig = LearnerConfig()
    features: FeatureConfig = FeatureConfig()
    relations: tuple[RelationSpec, ...] = DEFAULT_RELATIONS
    agreement_attributes: tuple[str, ...] = ("Gender",)
    suffix_upos: tuple[str, ...] = ("NOUN", "VERB")
    min_suffix_count: int = 5
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    examples_per_rule: int = 5
    top_n_examples: int = 5

    @property
    def seed(self) -> int:
        return self.learner.seed


@dataclass(frozen=True)
class VocabConfig:
    iterations: int = 10
    use_null: bool = True
    max_len: int = 80
    min_count: int = 3
    min_candidates: int = 2
    min_prob: float = 0.1
    merge_lemmas: bool = True
    min_adjective_freq: int = 3
    stoplist: frozenset[str] = DEFAULT_STOPLIST


@dataclass
class Learned:
    tree: TreeNode
    rules: list
    metrics: Metrics | None
    train: list[Instance] = field(repr=False, default_factory=list)
    test: list[Instance] = field(repr=False, default_factory=list)


def learn(instances: Sequence[Instance], source, cfg: ExtractConfig) -> Learned:
    """Split by sentence, grow a tree on train, score it on held-out data, attach examples.

    Nothing is tuned on the dev portion, so it is scored together with test.
    """
    train, dev, test = split_dataset(instances, cfg.ratios, cfg.seed)
    held_out = dev + test
    if not train:
        train, held_out = held_out, []
    test = held_out
    tree = train_tree(train, cfg.learner)
    rules = [attach_examples(r, train, source, cfg.examples_per_rule) for r in extract_rules(tree)]
    metrics = evaluate(tree, train, test) if test else None
    return Learned(tree, rules, metrics, list(train), list(test))


def _counts(ds) -> dict:
    return {"instances": len(ds), "candidates": ds.candidates, "skipped": ds.skipped}


def word_order_point(tb: Treebank, spec: RelationSpec, cfg: ExtractConfig, vocab=None):
    ds = extract_order_instances(tb, spec, cfg.features, vocab)
    if not ds:
        return None
    fit = learn(ds, tb, cfg)
    dep = spec.dependent_noun or f"{spec.name.split('-')[0]}s"
    head = spec.head_noun or f"{spec.name.split('-')[-1]}s"
    q = f"Are {dep} before or after {head} in {tb.language}?"
    point = build_grammar_point(tb.language, "word_order", q, fit.tree, fit.rules, fit.metrics,
                                {"type": spec.name, "counts": _counts(ds)})
    return point, fit


def agreement_point(tb: Treebank, attribute: str, cfg: ExtractConfig, vocab=None):
    ds = extract_agreement_instances(tb, attribute, cfg.features, vocab)
    if not ds:
        return None
    fit = learn(ds, tb, cfg)
    q = f"Do some words need to agree on {attribute.lower()} in {tb.language}?"
    point = build_grammar_point(tb.language, "agreement", q, fit.tree, fit.rules, fit.metrics,
                                {"type": attribute, "counts": _counts(ds)})
    return point, fit


def group_rules_by_prediction(point: GrammarPoint, label_order: Sequence[str]) -> list[dict]:
    rank = {label: n for n, label in enumerate(label_order)}
    groups: dict[str, list[int]] = {}
    for i, r in enumerate(point.rules):
        groups.setdefault(r.prediction, []).append(i)
    labels = sorted(groups, key=lambda lab: (rank.get(lab, len(rank)), lab))
    return [{"label": lab, "rules": groups[lab]} for lab in labels]


def suffix_point(tb: Treebank, upos: str, cfg: ExtractConfig, vocab=None):
    data = extract_suffix_instances(tb, upos, cfg.features, cfg.min_suffix_count, vocab)
    if not data.instances:
        return None
    fit = learn(data.instances, tb, cfg)
    name = UPOS_NAMES.get(upos, upos)
    q = f"Which suffix is used on {name} when, in {tb.language}?"
    payload = {
        "type": upos,
        "inventory": [[s, n] for s, n in data.inventory.items()],
        "sandhi_variants": [list(p) for p in data.sandhi_variants],
        "counts": _counts(data.instances),
    }
    point = build_grammar_point(tb.language, "suffix", q, fit.tree, fit.rules, fit.metrics, payload)
    # one table per suffix, as if a classifier had been trained for each
    point.payload["by_suffix"] = group_rules_by_prediction(
        point, list(data.inventory) + [NO_SUFFIX, OTHER])
    return point, fit


def general_point(tb: Treebank, cfg: ExtractConfig):
    summaries = summarize_features(tb, cfg.top_n_examples)
    q = f"What morphological properties does {tb.language} show?"
    point = build_grammar_point(tb.language, "general", q,
                                payload={"features": [s.to_dict() for s in summaries]})
    return point, None


def _run_one(task):
    fn, args = task
    return fn(*args)


def extract_points(tb: Treebank, questions: Sequence[str], cfg: ExtractConfig, jobs: int | None = None):
    """Run every requested question; results come back in a fixed order."""
    vocab = lemma_vocab(tb, cfg.features.lemma_vocab_size)
    tasks: list[tuple[Callable, tuple]] = []
    if "general" in questions:
        tasks.append((general_point, (tb, cfg)))
    if "word_order" in questions:
        tasks += [(word_order_point, (tb, spec, cfg, vocab)) for spec in cfg.relations]
    if "agreement" in questions:
        tasks += [(agreement_point, (tb, a, cfg, vocab)) for a in cfg.agreement_attributes]
    if "suffix" in questions:
        tasks += [(suffix_point, (tb, u, cfg, vocab)) for u in cfg.suffix_upos]
    jobs = jobs or os.cpu_count() or 1
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(t) for t in tasks]
    return [r for r in results if r is not None]


# -- vocabulary ------------------------------------------------------------------

def vocabulary_points(bt: Bitext, alignments: Sequence[Alignment], table: TranslationTable, language: str,
                      cfg: ExtractConfig, vcfg: VocabConfig = VocabConfig(),
                      lex: SenseLexicon | None = None, cats: CategoryConfig | None = None,
                      tb_english: Treebank | None = None, target_lemmas=None):
    """Divergent translations with selection rules, plus category lists and adjective sets."""
    sets = extract_translation_sets(bt, alignments, target_lemmas, vcfg.merge_lemmas)
    divergent = filter_divergent_pairs(sets, vcfg.min_count, vcfg.min_candidates, vcfg.stoplist, table,
                                       vcfg.min_prob)
    lemmas = target_lemmas if vcfg.merge_lemmas else None
    results = []
    for ts in divergent:
        insts = build_selection_instances(ts, bt, alignments, lemmas, stoplist=vcfg.stoplist)
        if not insts:
            continue
        fit = learn(insts, bt, cfg)
        q = f"Which {language} word translates '{ts.english}' when?"
        payload = {
            "type": ts.english,
            "english": ts.english,
            "candidates": [[k, n] for k, n in ts.candidates.items()],
            "counts": {"instances": len(insts)},
        }
        results.append((build_grammar_point(language, "vocabulary", q, fit.tree, fit.rules, fit.metrics,
                                            payload), fit))

    # single-translation words are fine for category lists and adjective glosses
    attested = filter_divergent_pairs(sets, vcfg.min_count, 1, vcfg.stoplist, table, vcfg.min_prob)
    if lex is not None and cats is not None:
        groups = categorize_vocabulary(attested, lex, cats, bt)
        if groups:
            q = "What words to use for popular categories?"
            results.append((build_grammar_point(language, "vocabulary", q, payload={
                "categories": [[c, words] for c, words in groups.items()]}), None))
    if lex is not None:
        adjs = adjective_sets(tb_english, bt, lex, vcfg.min_adjective_freq, attested)
        if adjs:
            q = "What are some adjectives, their synonyms and antonyms?"
            results.append((build_grammar_point(language, "vocabulary", q, payload={
                "adjectives": [a.to_dict() for a in adjs]}), None))
    return results, sets, divergent
