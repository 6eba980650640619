"""Render a report as a small static HTML site with figures."""
from __future__ import annotations

from pathlib import Path
from typing import Mapping

import jinja2

from . import figures
from .report import ASPECTS, Report

ASPECT_TITLES = {
    "general": "General information",
    "word_order": "Word order",
    "agreement": "Agreement",
    "suffix": "Suffix usage",
    "vocabulary": "Vocabulary",
}
PAGE_ORDER = ("general", "vocabulary", "word_order", "suffix", "agreement")

GLOSSARY = (
    ("lemma", "the dictionary form of a word, e.g. 'go' for 'went'"),
    ("upos", "the word's part of speech (NOUN, VERB, ADJ, PRON, ...)"),
    ("deprel", "how a word relates to the word it depends on, e.g. nsubj = subject, obj = object"),
    ("head", "the word another word depends on, e.g. the verb of a subject"),
    ("dep", "the dependent word the question is about"),
    ("support", "how many corpus examples a rule covers"),
    ("precision", "the share of covered examples that follow the rule"),
    ("baseline", "accuracy of always giving the most common answer"),
)

_FEATURE_HINTS = {
    "head-lemma": "dictionary form (lemma) of the head word",
    "dep-lemma": "dictionary form (lemma) of the dependent word",
    "head-upos": "part of speech of the head word",
    "dep-upos": "part of speech of the dependent word",
    "deprel": "relation of the word to its head (e.g. nsubj = subject)",
}


def explain(feature: str) -> str:
    if feature in _FEATURE_HINTS:
        return _FEATURE_HINTS[feature]
    if feature.startswith("head-"):
        return f"{feature[5:]} of the head word"
    if feature.startswith("dep-"):
        return f"{feature[4:]} of the dependent word"
    if feature.startswith("nbr-"):
        offset = feature.split("-")[1:-1]
        return f"part of speech of the word at offset {'-'.join(offset)} from the dependent"
    if feature.startswith("sib-"):
        return f"the head also has a {feature[4:]} dependent"
    if feature.startswith("ctx-bow-"):
        return f"the English sentence contains '{feature[8:]}'"
    if feature.startswith("ctx-"):
        return f"English word at offset {feature[4:]} from the translated word"
    return feature


def load_translit(path) -> dict[str, str]:
    """TSV of (script characters, roman string)."""
    mapping = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        src, sep, dst = line.partition("\t")
        if not sep or not src:
            raise ValueError(f"{path}:{lineno}: expected 'characters<TAB>roman'")
        mapping[src] = dst
    return mapping


def transliterate(text: str, mapping: Mapping[str, str]) -> str:
    """Greedy longest-match-first replacement; unmapped characters pass through."""
    if not mapping:
        return text
    longest = max(map(len, mapping))
    out, i = [], 0
    while i < len(text):
        for n in range(min(longest, len(text) - i), 0, -1):
            piece = text[i:i + n]
            if piece in mapping:
                out.append(mapping[piece])
                i += n
                break
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


def _env(translit: Mapping[str, str] | None) -> jinja2.Environment:
    env = jinja2.Environment(
        loader=jinja2.PackageLoader("teachgram", "templates"),
        autoescape=True,
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
        undefined=jinja2.ChainableUndefined,
    )
    env.filters["explain"] = explain
    env.filters["translit"] = lambda s: transliterate(s, translit or {})
    env.filters["rule_at"] = lambda i, point: point.rules[i]
    return env


def _figures(report: Report, out: Path) -> tuple[dict[str, str], dict[str, str]]:
    """Draw every figure; returns (per-aspect overview, per-point) relative paths."""
    overview, per_point = {}, {}
    for aspect in ASPECTS:
        pts = [p for p in report.by_aspect(aspect) if p.metrics]
        if pts:
            rows = [(p.payload.get("type", p.id), p.metrics.tree_accuracy, p.metrics.baseline_accuracy)
                    for p in pts]
            rel = f"figures/{aspect}-accuracy.png"
            figures.accuracy_chart(rows, out / rel, ASPECT_TITLES[aspect])
            overview[aspect] = rel
    for p in report.points:
        if p.aspect == "general":
            for fs in p.payload.get("features", []):
                rel = f"figures/{p.id}-{fs['attribute'].lower()}.png"
                figures.frequency_chart([(v["value"], v["total_count"]) for v in fs["values"]],
                                        out / rel, fs["attribute"])
                per_point[f"{p.id}:{fs['attribute']}"] = rel
        elif p.payload.get("inventory"):
            rel = f"figures/{p.id}-suffixes.png"
            figures.frequency_chart([(f"-{s}", n) for s, n in p.payload["inventory"]], out / rel,
                                    "suffix frequency")
            per_point[p.id] = rel
    return overview, per_point


def emit_html(report: Report, out_dir, translit: Mapping[str, str] | None = None) -> Path:
    """Write index.html plus one page per aspect present in ``report``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {out}: {e}") from e
    env = _env(translit)
    pages = [a for a in PAGE_ORDER if report.by_aspect(a)]
    overview, per_point = _figures(report, out)
    common = {
        "pages": pages,
        "aspect_titles": ASPECT_TITLES,
        "translit": bool(translit),
    }
    languages = sorted({p.language for p in report.points})
    index = env.get_template("index.html").render(
        title="Teaching materials", languages=languages, glossary=GLOSSARY,
        points_by_aspect={a: report.by_aspect(a) for a in pages}, **common)
    (out / "index.html").write_text(index, encoding="utf-8")
    tpl = env.get_template("aspect.html")
    for aspect in pages:
        html = tpl.render(title=ASPECT_TITLES[aspect], aspect=aspect, points=report.by_aspect(aspect),
                          overview_figure=overview.get(aspect), figures=per_point, **common)
        (out / f"{aspect}.html").write_text(html, encoding="utf-8")
    return out
