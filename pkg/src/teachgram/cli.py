"""Command-line driver.

Subcommands: extract, vocab, summarize, evaluate, report, validate.
Exit status: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .bitext import (Bitext, BitextError, TranslationTable, align_corpus, load_bitext, read_pharaoh,
                     write_pharaoh)
from .config import ConfigError, describe, load_config
from .instances import dump_tsv
from .lexicon import LexiconError, dump_translation_sets, load_categories, load_sense_lexicon
from .pipeline import extract_points, vocabulary_points
from .report import (AssemblyError, Report, ReportError, config_digest, emit_json, load_report,
                     merge_reports, replace_points)
from .rules import tree_to_dict
from .site import emit_html, load_translit
from .treebank import ConllUError, read_conllu, validate

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
CONCEPTS = {"word_order": "Word Order", "agreement": "Agreement", "suffix": "Suffix Usage",
            "vocabulary": "Vocabulary"}
QUESTIONS = ("general", "word_order", "agreement", "suffix")


class DataError(Exception):
    pass


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _csv(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="teachgram", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out_required=True):
        sp.add_argument("--out", type=Path, required=out_required, help="output directory")
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--config", type=Path, help="TOML/INI file overriding defaults")
        sp.add_argument("--language", help="language name used in questions")

    ex = sub.add_parser("extract", help="learn word order, agreement and suffix rules")
    ex.add_argument("--treebank", type=Path, action="append", required=True)
    ex.add_argument("--questions", type=_csv, default=["word_order", "agreement", "suffix"])
    ex.add_argument("--agreement", type=_csv, help="attributes, e.g. Gender,Person")
    ex.add_argument("--suffix-upos", type=_csv, help="POS tags, e.g. NOUN,VERB")
    ex.add_argument("--min-support", type=int, help="minimum leaf size")
    ex.add_argument("--max-depth", type=int)
    ex.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    ex.add_argument("--dump-instances", action="store_true", help="also write instances/*.tsv")
    common(ex)

    sm = sub.add_parser("summarize", help="frequency tables of morphological features")
    sm.add_argument("--treebank", type=Path, action="append", required=True)
    sm.add_argument("--top-n", type=int, default=5)
    common(sm)

    vo = sub.add_parser("vocab", help="mine divergent translations from bitext")
    vo.add_argument("--bitext-src", type=Path, required=True, help="English side, one sentence per line")
    vo.add_argument("--bitext-tgt", type=Path, required=True, help="L2 side, same line count")
    vo.add_argument("--lexicon", type=Path)
    vo.add_argument("--categories", type=Path)
    vo.add_argument("--target-treebank", type=Path, help="CoNLL-U of the L2 side, one sentence per line")
    vo.add_argument("--english-treebank", type=Path)
    vo.add_argument("--min-count", type=int)
    vo.add_argument("--min-prob", type=float)
    vo.add_argument("--iterations", type=int)
    vo.add_argument("--min-support", type=int)
    vo.add_argument("--max-depth", type=int)
    common(vo)

    ev = sub.add_parser("evaluate", help="accuracy table: rules vs majority baseline")
    ev.add_argument("--in", dest="inp", type=Path, required=True, help="directory or report.json")
    ev.add_argument("--format", choices=("tsv", "json"), default="tsv")

    rp = sub.add_parser("report", help="render the HTML site")
    rp.add_argument("--in", dest="inp", type=Path, action="append", required=True)
    rp.add_argument("--out", type=Path, help="site directory (default: <first --in>/site)")
    rp.add_argument("--translit", type=Path, help="TSV map from script characters to roman")

    va = sub.add_parser("validate", help="check CoNLL-U structure")
    va.add_argument("--treebank", type=Path, action="append", required=True)
    return p


def _require(*paths):
    for p in paths:
        if p is not None and not Path(p).exists():
            raise DataError(f"no such file: {p}")


def _language(args, paths) -> str:
    if getattr(args, "language", None):
        return args.language
    return Path(paths[0]).name.split("_")[0].split(".")[0] or "und"


def _report_path(out: Path) -> Path:
    return out / "report.json"


def _write_report(out: Path, stage: str, new: Report) -> Report:
    out.mkdir(parents=True, exist_ok=True)
    path = _report_path(out)
    # one digest per stage, so rerunning a stage replaces its entry instead of chaining
    stages_path = out / "stages.json"
    stages = {}
    if path.exists():
        if stages_path.exists():
            stages = json.loads(stages_path.read_text(encoding="utf-8"))
        merged = replace_points(load_report(path), new)
    else:
        merged = new
    stages[stage] = new.config_digest
    digest = new.config_digest if len(stages) == 1 else config_digest(dict(sorted(stages.items())))
    merged = replace(merged, config_digest=digest)
    stages_path.write_text(json.dumps(stages, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    path.write_bytes(emit_json(merged))
    return merged


def _write_trees(out: Path, results) -> None:
    trees = out / "trees"
    trees.mkdir(parents=True, exist_ok=True)
    for point, fit in results:
        if fit is not None:
            doc = tree_to_dict(fit.tree)
            (trees / f"{point.id}.json").write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n",
                                                    encoding="utf-8")


def _summary(command: str, **counts) -> None:
    print(command + " " + " ".join(f"{k}={v}" for k, v in counts.items()), file=sys.stderr)


def _rule_count(results) -> int:
    return sum(len(p.rules) for p, _ in results)


def cmd_extract(args) -> int:
    _require(*args.treebank, args.config)
    unknown = set(args.questions) - set(QUESTIONS)
    if unknown:
        raise UsageError(f"unknown question kinds: {sorted(unknown)}")
    ecfg, _ = load_config(args.config, args.seed, {
        "max_depth": args.max_depth, "min_leaf": args.min_support,
        "agreement_attributes": args.agreement, "suffix_upos": args.suffix_upos})
    tb = read_conllu(args.treebank, _language(args, args.treebank))
    results = extract_points(tb, args.questions, ecfg, args.jobs)
    digest = config_digest({"command": "extract", "questions": args.questions, "extract": describe(ecfg)})
    _write_trees(args.out, results)
    if args.dump_instances:
        inst_dir = args.out / "instances"
        inst_dir.mkdir(parents=True, exist_ok=True)
        for point, fit in results:
            if fit is not None:
                (inst_dir / f"{point.id}.tsv").write_text(dump_tsv(fit.train + fit.test), encoding="utf-8")
    _write_report(args.out, args.command, Report(tuple(p for p, _ in results), digest))
    _summary("extract", sentences=len(tb), instances=sum(p.payload.get("counts", {}).get("instances", 0)
                                                          for p, _ in results),
             rules=_rule_count(results), points=len(results))
    return EXIT_OK


def cmd_summarize(args) -> int:
    _require(*args.treebank, args.config)
    ecfg, _ = load_config(args.config, args.seed)
    ecfg = type(ecfg)(**{**ecfg.__dict__, "top_n_examples": args.top_n})
    tb = read_conllu(args.treebank, _language(args, args.treebank))
    results = extract_points(tb, ["general"], ecfg, 1)
    digest = config_digest({"command": "summarize", "top_n": args.top_n})
    _write_report(args.out, args.command, Report(tuple(p for p, _ in results), digest))
    n_attrs = sum(len(p.payload["features"]) for p, _ in results)
    _summary("summarize", sentences=len(tb), instances=0, rules=0, attributes=n_attrs)
    return EXIT_OK


def _target_lemmas(path, bt: Bitext, language: str):
    """Map pair ids to lemma sequences; sentence *i* of the treebank is line *i* of the bitext."""
    tb = read_conllu(path, language)
    lemmas = {}
    for n, s in enumerate(tb.sentences, start=1):
        lemmas[f"p{n}"] = [t.lemma or t.form for t in s.tokens]
    for pair in bt.pairs:
        got = lemmas.get(pair.pair_id)
        if got is not None and len(got) != len(pair.target):
            raise DataError(f"target treebank sentence for {pair.pair_id} has {len(got)} tokens, "
                            f"bitext line has {len(pair.target)}")
    return lemmas


def _cached_alignment(args, bt: Bitext, vcfg):
    """Alignment is the slow step; reuse the previous run's output when its inputs match."""
    key = config_digest({
        "src": _file_digest(args.bitext_src),
        "tgt": _file_digest(args.bitext_tgt),
        "iterations": vcfg.iterations, "use_null": vcfg.use_null, "max_len": vcfg.max_len,
    })
    meta = args.out / "alignment.meta.json"
    al_path, tt_path = args.out / "alignments.pharaoh", args.out / "ttable.tsv"
    if meta.exists() and al_path.exists() and tt_path.exists():
        if json.loads(meta.read_text(encoding="utf-8")).get("key") == key:
            return (TranslationTable.from_tsv(tt_path.read_text(encoding="utf-8")),
                    read_pharaoh(al_path.read_text(encoding="utf-8")), True)
    table, alignments = align_corpus(bt, vcfg.iterations, vcfg.use_null)
    args.out.mkdir(parents=True, exist_ok=True)
    al_path.write_text(write_pharaoh(alignments), encoding="utf-8")
    tt_path.write_text(table.to_tsv(), encoding="utf-8")
    meta.write_text(json.dumps({"key": key}) + "\n", encoding="utf-8")
    # reload so fresh and cached runs filter against the same (rounded) table
    return TranslationTable.from_tsv(tt_path.read_text(encoding="utf-8")), alignments, False


def _file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def cmd_vocab(args) -> int:
    _require(args.bitext_src, args.bitext_tgt, args.lexicon, args.categories, args.target_treebank,
             args.english_treebank, args.config)
    if args.categories and not args.lexicon:
        raise UsageError("--categories needs --lexicon")
    ecfg, vcfg = load_config(args.config, args.seed, {
        "max_depth": args.max_depth, "min_leaf": args.min_support,
        "min_count": args.min_count, "min_prob": args.min_prob, "iterations": args.iterations})
    language = args.language or "L2"
    bt = load_bitext(args.bitext_src, args.bitext_tgt, vcfg.max_len)
    if not bt.pairs:
        raise DataError("bitext has no usable sentence pairs")
    table, alignments, cached = _cached_alignment(args, bt, vcfg)
    lex = load_sense_lexicon(args.lexicon) if args.lexicon else None
    cats = load_categories(args.categories) if args.categories else None
    tb_en = read_conllu(args.english_treebank, "en") if args.english_treebank else None
    lemmas = _target_lemmas(args.target_treebank, bt, language) if args.target_treebank else None
    results, sets, divergent = vocabulary_points(bt, alignments, table, language, ecfg, vcfg, lex, cats,
                                                 tb_en, lemmas)
    (args.out / "translation_sets.tsv").write_text(dump_translation_sets(divergent), encoding="utf-8")
    _write_trees(args.out, results)
    digest = config_digest({"command": "vocab", "extract": describe(ecfg), "vocab": describe(vcfg)})
    _write_report(args.out, args.command, Report(tuple(p for p, _ in results), digest))
    _summary("vocab", pairs=len(bt), dropped=bt.dropped_long + bt.dropped_empty,
             alignment_cached=int(cached), english_words=len(sets), divergent=len(divergent),
             instances=sum(p.payload.get("counts", {}).get("instances", 0) for p, _ in results),
             rules=_rule_count(results), points=len(results))
    return EXIT_OK


def evaluation_rows(report: Report) -> list[dict]:
    """One row per trained question, plus a pooled vocabulary row."""
    rows = []
    pooled = [0.0, 0.0, 0]
    for aspect in ("word_order", "agreement", "suffix", "vocabulary"):
        for p in report.by_aspect(aspect):
            m = p.metrics
            if m is None:
                continue
            rows.append({"concept": CONCEPTS[aspect], "type": str(p.payload.get("type", p.id)),
                         "model": 100 * m.tree_accuracy, "baseline": 100 * m.baseline_accuracy,
                         "test_size": m.test_size})
            if aspect == "vocabulary":
                pooled[0] += m.tree_accuracy * m.test_size
                pooled[1] += m.baseline_accuracy * m.test_size
                pooled[2] += m.test_size
    if pooled[2]:
        rows.append({"concept": "Vocabulary", "type": "Semantic Subdivisions",
                     "model": 100 * pooled[0] / pooled[2], "baseline": 100 * pooled[1] / pooled[2],
                     "test_size": pooled[2]})
    return rows


def cmd_evaluate(args) -> int:
    path = args.inp / "report.json" if args.inp.is_dir() else args.inp
    _require(path)
    rows = evaluation_rows(load_report(path))
    if args.format == "json":
        sys.stdout.write(json.dumps(rows, indent=1, sort_keys=True) + "\n")
    else:
        sys.stdout.write("concept\ttype\tmodel\tbaseline\n")
        for r in rows:
            sys.stdout.write(f"{r['concept']}\t{r['type']}\t{r['model']:.2f}\t{r['baseline']:.2f}\n")
    _summary("evaluate", questions=len(rows),
             model_wins=sum(r["model"] > r["baseline"] for r in rows))
    return EXIT_OK


def cmd_report(args) -> int:
    paths = [p / "report.json" if p.is_dir() else p for p in args.inp]
    _require(*paths, args.translit)
    report = merge_reports([load_report(p) for p in paths])
    out = args.out or (paths[0].parent / "site")
    translit = load_translit(args.translit) if args.translit else None
    emit_html(report, out, translit)
    if len(paths) > 1:
        (out / "report.json").write_bytes(emit_json(report))
    _summary("report", points=len(report.points), rules=sum(len(p.rules) for p in report.points),
             pages=len({p.aspect for p in report.points}) + 1)
    return EXIT_OK


def cmd_validate(args) -> int:
    _require(*args.treebank)
    tb = read_conllu(args.treebank)
    violations = validate(tb)
    for v in violations:
        print(f"{v.kind}\t{v.sent_id}\t{v.detail}")
    _summary("validate", sentences=len(tb), tokens=tb.stats.tokens, violations=len(violations),
             multiword_ranges=tb.stats.multiword_ranges, empty_nodes=tb.stats.empty_nodes)
    return EXIT_DATA if violations else EXIT_OK


COMMANDS = {"extract": cmd_extract, "summarize": cmd_summarize, "vocab": cmd_vocab,
            "evaluate": cmd_evaluate, "report": cmd_report, "validate": cmd_validate}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help / --version
        return EXIT_OK if not e.code else EXIT_USAGE
    except (DataError, ConllUError, BitextError, LexiconError, ReportError, AssemblyError, ConfigError,
            OSError, ValueError) as e:
        print(f"teachgram: {e}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())
