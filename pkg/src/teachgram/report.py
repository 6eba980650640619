"""Grammar points, the report container, and canonical JSON emission."""
from __future__ import annotations

import hashlib
import json
import os
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import jsonschema

from .rules import Metrics, Rule, TreeNode, leaves

SCHEMA_VERSION = "1.0"
ASPECTS = ("general", "word_order", "agreement", "suffix", "vocabulary")


class AssemblyError(ValueError):
    pass


class ReportError(ValueError):
    pass


@dataclass(frozen=True)
class GrammarPoint:
    id: str
    language: str
    aspect: str
    question: str
    dominant: tuple[str, float] | None = None
    metrics: Metrics | None = None
    rules: tuple[Rule, ...] = ()
    payload: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "language": self.language,
            "aspect": self.aspect,
            "question": self.question,
            "dominant": {"label": self.dominant[0], "fraction": self.dominant[1]} if self.dominant else None,
            "metrics": self.metrics.to_dict() if self.metrics else None,
            "rules": [r.to_dict() for r in self.rules],
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GrammarPoint":
        dom = d.get("dominant")
        return cls(
            d["id"], d["language"], d["aspect"], d["question"],
            (dom["label"], dom["fraction"]) if dom else None,
            Metrics.from_dict(d["metrics"]) if d.get("metrics") else None,
            tuple(Rule.from_dict(r) for r in d["rules"]),
            d.get("payload", {}),
        )


def slug(*parts: str) -> str:
    text = "-".join(parts).lower()
    text = re.sub(r"[^a-z0-9]+", "-", text)
    return text.strip("-") or "point"


def _check_rules_match_tree(tree: TreeNode, rules: Sequence[Rule]) -> None:
    want = Counter((l.prediction, tuple(sorted(l.class_counts.items()))) for l in leaves(tree))
    got = Counter((r.prediction, tuple(sorted(r.class_counts.items()))) for r in rules)
    if want != got:
        raise AssemblyError("rules were not extracted from this tree")


def order_rules(rules: Iterable[Rule]) -> tuple[Rule, ...]:
    """Exceptions (non-dominant predictions) first, then by descending support."""
    return tuple(sorted(rules, key=lambda r: (not r.exception, -r.support)))


def build_grammar_point(language: str, aspect: str, question: str, tree: TreeNode | None = None,
                        rules: Sequence[Rule] = (), metrics: Metrics | None = None,
                        payload: dict | None = None) -> GrammarPoint:
    if aspect not in ASPECTS:
        raise AssemblyError(f"unknown aspect {aspect!r}")
    if rules and tree is None:
        raise AssemblyError("rules given without the tree they came from")
    if tree is not None:
        _check_rules_match_tree(tree, rules)
    for r in rules:
        if r.support > 0 and not r.examples:
            raise AssemblyError(f"rule {r.describe()!r} has no examples attached")
    if aspect == "general" and metrics is not None:
        raise AssemblyError("general points carry no metrics")
    dominant = (metrics.dominant_label, metrics.dominant_fraction) if metrics else None
    return GrammarPoint(slug(language, aspect, question), language, aspect, question, dominant,
                        metrics, order_rules(rules), payload or {})


def created_timestamp() -> str:
    """Honours SOURCE_DATE_EPOCH; defaults to the epoch so reruns are byte-identical."""
    epoch = int(os.environ.get("SOURCE_DATE_EPOCH", "0"))
    return datetime.fromtimestamp(epoch, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def config_digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, ensure_ascii=False, default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Report:
    points: tuple[GrammarPoint, ...] = ()
    config_digest: str = ""
    created: str = field(default_factory=created_timestamp)
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "created": self.created,
            "config_digest": self.config_digest,
            "points": [p.to_dict() for p in self.points],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        return cls(tuple(GrammarPoint.from_dict(p) for p in d["points"]), d.get("config_digest", ""),
                   d.get("created", created_timestamp()), d["schema_version"])

    def by_aspect(self, aspect: str) -> list[GrammarPoint]:
        return [p for p in self.points if p.aspect == aspect]


@lru_cache(maxsize=1)
def report_schema() -> dict:
    return json.loads(resources.files("teachgram").joinpath("report.schema.json").read_text("utf-8"))


def validate_report(doc: dict) -> None:
    jsonschema.validate(doc, report_schema())


def emit_json(report: Report) -> bytes:
    doc = report.to_dict()
    validate_report(doc)
    return (json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=1) + "\n").encode("utf-8")


def load_report(path) -> Report:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ReportError(f"{path}: unsupported schema_version {doc.get('schema_version')!r}")
    validate_report(doc)
    return Report.from_dict(doc)


def merge_reports(reports: Sequence[Report]) -> Report:
    """Concatenate points; all inputs must share schema version and language."""
    if not reports:
        raise ReportError("nothing to merge")
    versions = {r.schema_version for r in reports}
    if len(versions) != 1:
        raise ReportError(f"schema mismatch: {sorted(versions)}")
    languages = {p.language for r in reports for p in r.points}
    if len(languages) > 1:
        raise ReportError(f"language mismatch: {sorted(languages)}")
    points: list[GrammarPoint] = []
    seen: set[str] = set()
    for r in reports:
        for p in r.points:
            if p.id in seen:
                raise ReportError(f"duplicate id {p.id!r}")
            seen.add(p.id)
            points.append(p)
    digest = reports[0].config_digest if len(reports) == 1 else config_digest(
        [r.config_digest for r in reports])
    return Report(tuple(points), digest, reports[0].created, reports[0].schema_version)


def replace_points(old: Report, new: Report) -> Report:
    """``new`` wins for ids present in both; used when a stage is rerun into the same directory."""
    ids = {p.id for p in new.points}
    kept = replace(old, points=tuple(p for p in old.points if p.id not in ids))
    return merge_reports([kept, new])
