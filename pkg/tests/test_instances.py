from collections import Counter

from hypothesis import given, settings
from hypothesis import strategies as st

from teachgram.instances import (DEFAULT_RELATIONS, NO_SUFFIX, OTHER, FeatureConfig, Instance, RelationSpec,
                                 dump_tsv, extract_agreement_instances, extract_order_instances,
                                 extract_suffix_instances, featurize, lemma_vocab, sandhi_candidates,
                                 segment_suffix)
from teachgram.treebank import parse_conllu

import pytest

from synth import planted_order_treebank, planted_suffix_treebank, synthetic_ud_treebank

SUBJ = DEFAULT_RELATIONS[0]
OBJ = DEFAULT_RELATIONS[1]


def tb_of(*rows, sent_id="a"):
    lines = [f"# sent_id = {sent_id}"]
    for i, (form, lemma, upos, feats, head, deprel) in enumerate(rows, start=1):
        lines.append(f"{i}\t{form}\t{lemma}\t{upos}\t_\t{feats}\t{head}\t{deprel}\t_\t_")
    return parse_conllu("\n".join(lines) + "\n\n")


def test_subject_before_verb():
    tb = tb_of(("dog", "dog", "NOUN", "_", 2, "nsubj"), ("barks", "bark", "VERB", "_", 0, "root"))
    ds = extract_order_instances(tb, SUBJ, FeatureConfig())
    assert [i.label for i in ds] == ["before"]
    assert ds[0].provenance == ("a", 2, 1)


def test_object_after_verb():
    tb = tb_of(("eat", "eat", "VERB", "_", 0, "root"), ("rice", "rice", "NOUN", "_", 1, "obj"))
    assert [i.label for i in extract_order_instances(tb, OBJ, FeatureConfig())] == ["after"]


def test_subtyped_deprel_matches_base():
    tb = tb_of(("it", "it", "PRON", "_", 2, "nsubj:pass"), ("went", "go", "VERB", "_", 0, "root"))
    assert len(extract_order_instances(tb, SUBJ, FeatureConfig())) == 1


def test_relation_needs_deprels():
    with pytest.raises(ValueError):
        RelationSpec("x", frozenset())


def test_order_count_conservation():
    tb = parse_conllu(synthetic_ud_treebank(200))
    for spec in DEFAULT_RELATIONS:
        ds = extract_order_instances(tb, spec, FeatureConfig())
        matching = sum(1 for s in tb.sentences for t in s.tokens
                       if t.head and spec.matches_deprel(t.deprel))
        assert ds.candidates == matching
        assert len(ds) + ds.skipped == ds.candidates


def test_upos_mismatch_is_skipped():
    tb = tb_of(("dog", "dog", "ADJ", "_", 2, "nsubj"), ("barks", "bark", "VERB", "_", 0, "root"))
    ds = extract_order_instances(tb, SUBJ, FeatureConfig())
    assert len(ds) == 0 and ds.skipped == 1 and ds.candidates == 1


def test_multi_root_sentence_excluded():
    tb = tb_of(("dog", "dog", "NOUN", "_", 2, "nsubj"), ("barks", "bark", "VERB", "_", 0, "root"),
               ("x", "x", "X", "_", 0, "root"))
    ds = extract_order_instances(tb, SUBJ, FeatureConfig())
    assert len(ds) == 0 and ds.skipped == 1


def test_featurize_direct_construction():
    tb = tb_of(("ate", "eat", "VERB", "Tense=Past", 0, "root"), ("rice", "rice", "NOUN", "Case=Acc", 1, "obj"))
    cfg = FeatureConfig(neighbor_window=0)
    feats = featurize(tb.sentences[0], 1, 2, cfg, {"eat", "rice"})
    assert feats == {"head-upos": "VERB", "dep-upos": "NOUN", "deprel": "obj", "head-Tense": "Past",
                     "dep-Case": "Acc", "head-lemma": "eat", "dep-lemma": "rice"}


def test_featurize_out_of_vocab_lemma():
    tb = tb_of(("ate", "eat", "VERB", "_", 0, "root"), ("rice", "rice", "NOUN", "_", 1, "obj"))
    feats = featurize(tb.sentences[0], 1, 2, FeatureConfig(), {"eat"})
    assert feats["dep-lemma"] == OTHER and feats["head-lemma"] == "eat"


def test_featurize_edge_neighbour_omitted():
    tb = tb_of(("ate", "eat", "VERB", "_", 0, "root"), ("rice", "rice", "NOUN", "_", 1, "obj"))
    feats = featurize(tb.sentences[0], 1, 2, FeatureConfig(neighbor_window=1), set())
    assert feats["nbr--1-upos"] == "VERB"
    assert "nbr-1-upos" not in feats


def test_featurize_siblings():
    tb = tb_of(("I", "I", "PRON", "_", 2, "nsubj"), ("ate", "eat", "VERB", "_", 0, "root"),
               ("rice", "rice", "NOUN", "_", 2, "obj"))
    feats = featurize(tb.sentences[0], 2, 3, FeatureConfig(), set())
    assert feats["sib-nsubj"] == "yes"
    assert "sib-obj" not in feats


def test_agreement_labels_and_skips():
    tb = tb_of(("mulgi", "mulgi", "NOUN", "Gender=Fem", 2, "nsubj"),
               ("geli", "ja", "VERB", "Gender=Fem", 0, "root"),
               ("ghar", "ghar", "NOUN", "Gender=Masc", 2, "obl"),
               ("aaj", "aaj", "ADV", "_", 2, "advmod"))
    ds = extract_agreement_instances(tb, "Gender", FeatureConfig())
    assert [i.label for i in ds] == ["agree", "disagree"]
    assert ds.skipped == 1 and ds.candidates == 3


def test_agreement_has_no_label_leakage():
    tb = parse_conllu(synthetic_ud_treebank(200))
    for attr in ("Gender", "Number"):
        for inst in extract_agreement_instances(tb, attr, FeatureConfig()):
            assert f"head-{attr}" not in inst.features
            assert f"dep-{attr}" not in inst.features


def test_extraction_is_deterministic():
    text = synthetic_ud_treebank(150)
    a = extract_order_instances(parse_conllu(text), SUBJ, FeatureConfig())
    b = extract_order_instances(parse_conllu(text), SUBJ, FeatureConfig())
    assert list(a) == list(b)


def test_no_missing_marker_in_features():
    tb = parse_conllu(synthetic_ud_treebank(100))
    for spec in DEFAULT_RELATIONS:
        for inst in extract_order_instances(tb, spec, FeatureConfig()):
            assert "∅" not in inst.features.values()


def test_instance_label_nonempty():
    with pytest.raises(ValueError):
        Instance({}, "")


def test_lemma_vocab_ties_alphabetical():
    tb = tb_of(("b", "b", "X", "_", 0, "root"), ("a", "a", "X", "_", 1, "dep"), ("c", "c", "X", "_", 1, "dep"))
    assert lemma_vocab(tb, 2) == {"a", "b"}


@pytest.mark.parametrize("form,lemma,expected", [
    ("deshaala", "desh", ("desh", "aala", True)),
    ("dog", "dog", ("dog", "", True)),
    ("ran", "run", ("ran", "", False)),
    ("Houses", "house", ("house", "s", True)),
    ("went", "go", ("went", "", False)),
])
def test_segment_suffix(form, lemma, expected):
    assert tuple(segment_suffix(form, lemma)) == expected


@settings(max_examples=200, deadline=None)
@given(st.text(min_size=1, max_size=10), st.text(min_size=1, max_size=10))
def test_segment_suffix_reconstructs(form, lemma):
    seg = segment_suffix(form, lemma)
    if seg.suffix:
        assert seg.stem + seg.suffix == form.casefold()
    if seg.confident:
        assert len(seg.stem) >= 2 and lemma.casefold().startswith(seg.stem)


def test_planted_suffix_inventory_and_labels():
    # oracle: tally suffixes per Case value straight from the generated lines
    text = planted_suffix_treebank(300)
    by_case = Counter()
    for line in text.splitlines():
        cols = line.split("\t")
        if len(cols) == 10 and cols[3] == "NOUN":
            case = dict(kv.split("=") for kv in cols[5].split("|")).get("Case")
            by_case[case, cols[1][len(cols[2]):]] += 1
    assert {suffix for (case, suffix) in by_case if case == "Acc"} == {"laa"}
    assert "laa" not in {suffix for (case, suffix) in by_case if case != "Acc"}

    data = extract_suffix_instances(parse_conllu(text), "NOUN", FeatureConfig(), 5)
    inventory, instances = data
    assert inventory["laa"] == sum(n for (case, s), n in by_case.items() if s == "laa")
    for inst in instances:
        assert (inst.label == "laa") == (inst.features["dep-Case"] == "Acc")


def test_suffix_empty_upos():
    data = extract_suffix_instances(parse_conllu(planted_suffix_treebank(20)), "INTJ", FeatureConfig())
    assert data.inventory == {} and list(data.instances) == []


def test_rare_suffix_becomes_other():
    text = "".join(
        f"# sent_id = r{n}\n1\t{f}\t{l}\tNOUN\t_\t_\t0\troot\t_\t_\n\n"
        for n, (f, l) in enumerate([("deshlaa", "desh")] * 6 + [("deshaat", "desh")] * 3 + [("desh", "desh")]))
    data = extract_suffix_instances(parse_conllu(text), "NOUN", FeatureConfig(), min_suffix_count=5)
    assert data.inventory == {"laa": 6}
    assert Counter(i.label for i in data.instances) == {"laa": 6, OTHER: 3, NO_SUFFIX: 1}


def test_sandhi_candidates():
    assert sandhi_candidates({"alaa": 5, "laa": 9, "aat": 4, "iat": 3, "aala": 2}) == [
        ("aat", "iat"), ("alaa", "laa")]


def test_dump_tsv():
    out = dump_tsv([Instance({"b": "2", "a": "1"}, "x")])
    assert out == "a=1 b=2\tx\n"
    assert dump_tsv([]) == ""


def test_planted_order_oracle_unique_separator():
    from synth import perfect_separators
    ds = extract_order_instances(parse_conllu(planted_order_treebank(200)), SUBJ, FeatureConfig())
    seps = perfect_separators(ds)
    assert [(t, m) for t, m, _ in seps] == [(("dep-upos", "PRON"), "after")]
