import json
from pathlib import Path

import pytest

from teachgram.cli import run
from teachgram.config import ConfigError, load_config
from teachgram.report import load_report

from synth import rice_bitext, synthetic_ud_treebank

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    (d / "mr_synth.conllu").write_text(synthetic_ud_treebank(300))
    src, tgt, _ = rice_bitext()
    (d / "en.txt").write_text("\n".join(src) + "\n")
    (d / "mr.txt").write_text("\n".join(tgt) + "\n")
    return d


def test_extract_writes_report_and_trees(corpus, tmp_path, capsys):
    out = tmp_path / "out"
    code = run(["extract", "--treebank", str(corpus / "mr_synth.conllu"), "--questions",
                "word_order,agreement,suffix", "--out", str(out), "--seed", "42", "--jobs", "1"])
    assert code == 0
    report = load_report(out / "report.json")
    trees = sorted(p.stem for p in (out / "trees").glob("*.json"))
    assert trees == sorted(p.id for p in report.points)
    assert {p.aspect for p in report.points} == {"word_order", "agreement", "suffix"}
    assert all(p.language == "mr" for p in report.points)
    line = capsys.readouterr().err.strip().splitlines()[-1]
    assert line.startswith("extract sentences=300 instances=") and " rules=" in line


def test_extract_dump_instances(corpus, tmp_path):
    out = tmp_path / "out"
    assert run(["extract", "--treebank", str(corpus / "mr_synth.conllu"), "--questions", "word_order",
                "--out", str(out), "--dump-instances", "--jobs", "1"]) == 0
    dumps = list((out / "instances").glob("*.tsv"))
    assert len(dumps) == 5 and all("\t" in p.read_text().splitlines()[0] for p in dumps)


def test_parallel_matches_serial(corpus, tmp_path):
    args = ["extract", "--treebank", str(corpus / "mr_synth.conllu"), "--questions", "word_order,suffix"]
    assert run(args + ["--out", str(tmp_path / "a"), "--jobs", "1"]) == 0
    assert run(args + ["--out", str(tmp_path / "b"), "--jobs", "3"]) == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_vocab_merges_into_report(corpus, tmp_path, capsys):
    out = tmp_path / "out"
    run(["summarize", "--treebank", str(corpus / "mr_synth.conllu"), "--out", str(out)])
    code = run(["vocab", "--bitext-src", str(corpus / "en.txt"), "--bitext-tgt", str(corpus / "mr.txt"),
                "--lexicon", str(DATA / "senses.tsv"), "--categories", str(DATA / "categories.toml"),
                "--out", str(out), "--language", "mr"])
    assert code == 0
    aspects = [p.aspect for p in load_report(out / "report.json").points]
    assert aspects.count("general") == 1 and aspects.count("vocabulary") == 2
    assert (out / "translation_sets.tsv").read_text() == "rice\ttandul\t120\nrice\tbhaat\t80\n"
    assert "alignment_cached=0" in capsys.readouterr().err
    # second run reuses the stored alignment and gives the same report
    before = (out / "report.json").read_bytes()
    assert run(["vocab", "--bitext-src", str(corpus / "en.txt"), "--bitext-tgt", str(corpus / "mr.txt"),
                "--lexicon", str(DATA / "senses.tsv"), "--categories", str(DATA / "categories.toml"),
                "--out", str(out), "--language", "mr"]) == 0
    assert "alignment_cached=1" in capsys.readouterr().err
    assert (out / "report.json").read_bytes() == before


def test_evaluate_tsv(corpus, tmp_path, capsys):
    out = tmp_path / "out"
    run(["extract", "--treebank", str(corpus / "mr_synth.conllu"), "--questions", "word_order",
         "--out", str(out), "--jobs", "1"])
    run(["vocab", "--bitext-src", str(corpus / "en.txt"), "--bitext-tgt", str(corpus / "mr.txt"),
         "--out", str(out), "--language", "mr"])
    capsys.readouterr()
    assert run(["evaluate", "--in", str(out), "--format", "tsv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "concept\ttype\tmodel\tbaseline"
    rows = [line.split("\t") for line in lines[1:]]
    assert [r[1] for r in rows[:5]] == ["subject-verb", "object-verb", "numeral-noun", "adjective-noun",
                                       "noun-adposition"]
    assert rows[-1][:2] == ["Vocabulary", "Semantic Subdivisions"]
    assert all(0 <= float(r[2]) <= 100 and 0 <= float(r[3]) <= 100 for r in rows)


def test_evaluate_json(corpus, tmp_path, capsys):
    out = tmp_path / "out"
    run(["extract", "--treebank", str(corpus / "mr_synth.conllu"), "--questions", "agreement",
         "--out", str(out), "--jobs", "1"])
    capsys.readouterr()
    assert run(["evaluate", "--in", str(out / "report.json"), "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert [r["concept"] for r in rows] == ["Agreement"]


def test_report_site(corpus, tmp_path):
    out = tmp_path / "out"
    run(["extract", "--treebank", str(corpus / "mr_synth.conllu"), "--out", str(out), "--jobs", "1"])
    assert run(["report", "--in", str(out)]) == 0
    assert (out / "site" / "index.html").exists()


def test_report_merges_two_inputs(corpus, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(["extract", "--treebank", str(corpus / "mr_synth.conllu"), "--questions", "word_order",
         "--out", str(a), "--jobs", "1"])
    run(["summarize", "--treebank", str(corpus / "mr_synth.conllu"), "--out", str(b)])
    assert run(["report", "--in", str(a), "--in", str(b), "--out", str(tmp_path / "site")]) == 0
    merged = load_report(tmp_path / "site" / "report.json")
    assert {p.aspect for p in merged.points} == {"word_order", "general"}
    # the same report twice collides on ids
    assert run(["report", "--in", str(a), "--in", str(a), "--out", str(tmp_path / "x")]) == 2


def test_validate_exit_codes(tmp_path):
    good = tmp_path / "good.conllu"
    good.write_text("1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n\n")
    bad = tmp_path / "bad.conllu"
    bad.write_text("1\ta\ta\tX\t_\t_\t9\troot\t_\t_\n\n")
    assert run(["validate", "--treebank", str(good)]) == 0
    assert run(["validate", "--treebank", str(bad)]) == 2


def test_usage_errors(corpus, tmp_path):
    assert run(["extract", "--bogus"]) == 1
    assert run(["extract", "--treebank", str(corpus / "mr_synth.conllu"), "--questions", "phonology",
                "--out", str(tmp_path)]) == 1
    assert run([]) == 1
    assert run(["nonsense"]) == 1
    assert run(["--help"]) == 0


def test_data_errors(tmp_path):
    assert run(["extract", "--treebank", str(tmp_path / "missing.conllu"), "--out", str(tmp_path)]) == 2
    broken = tmp_path / "broken.conllu"
    broken.write_text("1\ta\n\n")
    assert run(["extract", "--treebank", str(broken), "--out", str(tmp_path / "o")]) == 2
    (tmp_path / "en").write_text("a\nb\n")
    (tmp_path / "mr").write_text("x\n")
    assert run(["vocab", "--bitext-src", str(tmp_path / "en"), "--bitext-tgt", str(tmp_path / "mr"),
                "--out", str(tmp_path / "v")]) == 2


def test_config_toml_and_ini(tmp_path):
    toml = tmp_path / "run.toml"
    toml.write_text('[learner]\nmax_depth = 3\n[features]\nneighbor_window = 2\n'
                    '[extract]\nsuffix_upos = ["NOUN"]\n[vocab]\nmin_count = 5\n'
                    '[[relations]]\nname = "subject-verb"\ndependent_deprels = ["nsubj"]\nhead_upos = ["VERB"]\n')
    ecfg, vcfg = load_config(toml, seed=7, overrides={"min_leaf": 4})
    assert (ecfg.learner.max_depth, ecfg.learner.min_leaf, ecfg.seed) == (3, 4, 7)
    assert ecfg.features.neighbor_window == 2 and ecfg.suffix_upos == ("NOUN",)
    assert vcfg.min_count == 5 and [r.name for r in ecfg.relations] == ["subject-verb"]

    ini = tmp_path / "run.ini"
    ini.write_text("[learner]\nmin_leaf = 5\n[relation:object-verb]\ndependent_deprels = obj\n")
    ecfg, _ = load_config(ini)
    assert ecfg.learner.min_leaf == 5 and ecfg.relations[0].dependent_deprels == {"obj"}

    bad = tmp_path / "bad.toml"
    bad.write_text("[learner]\nbogus = 1\n")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_config_flag_applies(corpus, tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text("[learner]\nmax_depth = 1\n")
    out = tmp_path / "out"
    assert run(["extract", "--treebank", str(corpus / "mr_synth.conllu"), "--questions", "suffix",
                "--config", str(cfg), "--out", str(out), "--jobs", "1"]) == 0
    for tree in (out / "trees").glob("*.json"):
        root = json.loads(tree.read_text())["root"]
        assert root["kind"] == "leaf" or all(root[k]["kind"] == "leaf" for k in ("match", "other"))
