"""Run configuration from TOML or INI files."""
from __future__ import annotations

import configparser
import dataclasses
from pathlib import Path

from .instances import DEFAULT_RELATIONS, FeatureConfig, RelationSpec
from .lexicon import tomllib
from .pipeline import ExtractConfig, VocabConfig
from .rules import LearnerConfig


class ConfigError(ValueError):
    pass


def _as_list(v):
    if isinstance(v, str):
        return [x.strip() for x in v.split(",") if x.strip()]
    return list(v)


def _coerce(cls, section: dict):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    out = {}
    for key, raw in section.items():
        if key not in fields:
            raise ConfigError(f"unknown option {key!r} for {cls.__name__}")
        default = getattr(cls(), key) if key != "relations" else None
        if isinstance(default, bool):
            value = raw if isinstance(raw, bool) else str(raw).lower() in ("1", "true", "yes", "on")
        elif isinstance(default, int):
            value = int(raw)
        elif isinstance(default, float):
            value = float(raw)
        elif isinstance(default, (tuple, frozenset)):
            items = _as_list(raw)
            if key == "ratios":
                items = [float(x) for x in items]
            value = type(default)(items)
        else:
            value = raw
        out[key] = value
    return out


def _relation(d: dict) -> RelationSpec:
    try:
        return RelationSpec(
            d["name"],
            frozenset(_as_list(d["dependent_deprels"])),
            frozenset(_as_list(d.get("head_upos", []))),
            frozenset(_as_list(d.get("dependent_upos", []))),
            d.get("dependent_noun", ""),
            d.get("head_noun", ""),
        )
    except KeyError as e:
        raise ConfigError(f"relation missing {e}") from None


def _read(path: Path) -> dict:
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".toml":
        try:
            return tomllib.loads(text)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{path}: {e}") from e
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp.read_string(text)
    data: dict = {}
    for name in cp.sections():
        if name.startswith("relation:"):
            data.setdefault("relations", []).append({"name": name.split(":", 1)[1], **cp[name]})
        else:
            data[name] = dict(cp[name])
    return data


def load_config(path=None, seed: int | None = None, overrides: dict | None = None):
    """Return (ExtractConfig, VocabConfig) with file values, then CLI overrides, applied."""
    data = _read(Path(path)) if path else {}
    overrides = overrides or {}
    learner = dict(_coerce(LearnerConfig, data.get("learner", {})))
    for key in ("max_depth", "min_leaf"):
        if overrides.get(key) is not None:
            learner[key] = overrides[key]
    if seed is not None:
        learner["seed"] = seed
    features = _coerce(FeatureConfig, data.get("features", {}))
    extract = _coerce(ExtractConfig, {k: v for k, v in data.get("extract", {}).items()})
    for key in ("agreement_attributes", "suffix_upos"):
        if overrides.get(key):
            extract[key] = tuple(overrides[key])
    relations = tuple(_relation(r) for r in data["relations"]) if data.get("relations") else DEFAULT_RELATIONS
    try:
        ecfg = ExtractConfig(learner=LearnerConfig(**learner), features=FeatureConfig(**features),
                             relations=relations, **extract)
        vocab = _coerce(VocabConfig, data.get("vocab", {}))
        for key in ("min_count", "min_prob", "iterations"):
            if overrides.get(key) is not None:
                vocab[key] = overrides[key]
        vcfg = VocabConfig(**vocab)
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e
    return ecfg, vcfg


def describe(cfg) -> dict:
    """JSON-ready view of a config dataclass, for digests."""
    def conv(v):
        if isinstance(v, (frozenset, set)):
            return sorted(v)
        if dataclasses.is_dataclass(v):
            return {f.name: conv(getattr(v, f.name)) for f in dataclasses.fields(v)}
        if isinstance(v, (list, tuple)):
            return [conv(x) for x in v]
        return v
    return conv(cfg)
