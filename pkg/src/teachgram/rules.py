"""Greedy CART over categorical equality tests, plus rule extraction and evaluation.

Every split is a binary test ``feature = value``; an instance lacking the
feature takes the "other" branch. Ties (labels in leaves, candidate splits)
are broken lexicographically so trees are identical across platforms.
"""
from __future__ import annotations

import hashlib
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Sequence, Union

from .instances import Instance
from .treebank import ExampleRef

TREE_SCHEMA_VERSION = "1"
_EPS = 1e-12


@dataclass(frozen=True)
class LearnerConfig:
    max_depth: int = 8
    min_leaf: int = 20
    min_impurity_decrease: float = 0.001
    seed: int = 42

    def __post_init__(self):
        if self.max_depth < 1 or self.min_leaf < 1:
            raise ValueError("max_depth and min_leaf must be >= 1")


@dataclass(frozen=True)
class Leaf:
    prediction: str
    class_counts: dict[str, int]


@dataclass(frozen=True)
class Split:
    feature: str
    value: str
    match_child: "TreeNode"
    other_child: "TreeNode"
    class_counts: dict[str, int] = field(default_factory=dict)


TreeNode = Union[Leaf, Split]


def majority(counts: dict[str, int]) -> str:
    """Most frequent label, alphabetically first on ties."""
    return min(counts, key=lambda k: (-counts[k], k))


def gini(class_counts: dict[str, int]) -> float:
    total = sum(class_counts.values())
    if total <= 0:
        raise ValueError("gini of an empty node is undefined")
    return 1.0 - sum((c / total) ** 2 for c in class_counts.values())


def _gini_or_zero(counts) -> float:
    total = sum(counts.values())
    return gini(counts) if total else 0.0


def _sorted_counts(counts: Counter) -> dict[str, int]:
    return {k: counts[k] for k in sorted(counts) if counts[k]}


def train_tree(train: Sequence[Instance], cfg: LearnerConfig = LearnerConfig()) -> TreeNode:
    if not train:
        raise ValueError("cannot train on an empty dataset")
    return _grow(list(train), cfg, depth=0, used=frozenset())


def _best_split(rows: list[Instance], parent: Counter, cfg: LearnerConfig, used):
    n = len(rows)
    by_test: dict[tuple[str, str], Counter] = defaultdict(Counter)
    for inst in rows:
        for fv in inst.features.items():
            by_test[fv][inst.label] += 1

    parent_gini = gini(parent)
    best = None
    best_gain = -1.0
    for test in sorted(by_test):
        if test in used:
            continue
        match = by_test[test]
        n_match = sum(match.values())
        n_other = n - n_match
        if n_match < cfg.min_leaf or n_other < cfg.min_leaf:
            continue
        other = parent - match
        child = (n_match * _gini_or_zero(match) + n_other * _gini_or_zero(other)) / n
        gain = parent_gini - child
        # sorted iteration + strict ">" keeps the lexicographically first on ties
        if gain > best_gain + _EPS:
            best, best_gain = test, gain
    return best, best_gain


def _grow(rows: list[Instance], cfg: LearnerConfig, depth: int, used: frozenset) -> TreeNode:
    counts = Counter(inst.label for inst in rows)
    leaf = Leaf(majority(counts), _sorted_counts(counts))
    if depth >= cfg.max_depth or len(counts) == 1 or len(rows) < 2 * cfg.min_leaf:
        return leaf
    test, gain = _best_split(rows, counts, cfg, used)
    if test is None or gain <= _EPS or gain < cfg.min_impurity_decrease - _EPS:
        return leaf
    feature, value = test
    matched = [r for r in rows if r.features.get(feature) == value]
    rest = [r for r in rows if r.features.get(feature) != value]
    used = used | {test}
    return Split(feature, value,
                 _grow(matched, cfg, depth + 1, used),
                 _grow(rest, cfg, depth + 1, used),
                 leaf.class_counts)


def predict(tree: TreeNode, inst: Instance | dict) -> str:
    feats = inst.features if isinstance(inst, Instance) else inst
    node = tree
    while isinstance(node, Split):
        node = node.match_child if feats.get(node.feature) == node.value else node.other_child
    return node.prediction


def tree_depth(tree: TreeNode) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(tree_depth(tree.match_child), tree_depth(tree.other_child))


def leaves(tree: TreeNode) -> list[Leaf]:
    if isinstance(tree, Leaf):
        return [tree]
    return leaves(tree.match_child) + leaves(tree.other_child)


def root_counts(tree: TreeNode) -> dict[str, int]:
    return tree.class_counts


# -- rules -------------------------------------------------------------------

class Condition(NamedTuple):
    feature: str
    value: str
    polarity: str  # "is" | "is-not"

    def holds(self, feats: dict) -> bool:
        same = feats.get(self.feature) == self.value
        return same if self.polarity == "is" else not same

    def __str__(self):
        return f"{self.feature} {self.polarity} {self.value}"


@dataclass(frozen=True)
class Rule:
    conditions: tuple[Condition, ...]
    prediction: str
    support: int
    precision: float
    class_counts: dict[str, int] = field(default_factory=dict)
    exception: bool = False
    examples: tuple[ExampleRef, ...] = ()
    counterexamples: tuple[ExampleRef, ...] = ()

    def matches(self, inst: Instance | dict) -> bool:
        feats = inst.features if isinstance(inst, Instance) else inst
        return all(c.holds(feats) for c in self.conditions)

    def describe(self) -> str:
        if not self.conditions:
            return f"always -> {self.prediction}"
        return "if " + " and ".join(map(str, self.conditions)) + f" then {self.prediction}"

    def to_dict(self) -> dict:
        return {
            "conditions": [{"feature": c.feature, "value": c.value, "polarity": c.polarity}
                           for c in self.conditions],
            "prediction": self.prediction,
            "support": self.support,
            "precision": self.precision,
            "class_counts": dict(self.class_counts),
            "exception": self.exception,
            "examples": [e.to_dict() for e in self.examples],
            "counterexamples": [e.to_dict() for e in self.counterexamples],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Rule":
        return cls(
            tuple(Condition(c["feature"], c["value"], c["polarity"]) for c in d["conditions"]),
            d["prediction"], d["support"], d["precision"], dict(d["class_counts"]), d["exception"],
            tuple(ExampleRef.from_dict(e) for e in d["examples"]),
            tuple(ExampleRef.from_dict(e) for e in d["counterexamples"]),
        )


def extract_rules(tree: TreeNode) -> list[Rule]:
    """One rule per leaf, ordered by descending support.

    Rules whose prediction differs from the root majority are flagged as
    exceptions.
    """
    dominant = majority(tree.class_counts)
    found: list[Rule] = []

    def walk(node, path):
        if isinstance(node, Leaf):
            support = sum(node.class_counts.values())
            precision = node.class_counts[node.prediction] / support
            found.append(Rule(tuple(path), node.prediction, support, precision,
                              dict(node.class_counts), node.prediction != dominant))
            return
        walk(node.match_child, path + [Condition(node.feature, node.value, "is")])
        walk(node.other_child, path + [Condition(node.feature, node.value, "is-not")])

    walk(tree, [])
    # stable sort keeps the left-to-right leaf order among equal supports
    return sorted(found, key=lambda r: -r.support)


def rules_predict(rules: Sequence[Rule], inst: Instance | dict) -> str:
    hits = [r for r in rules if r.matches(inst)]
    if len(hits) != 1:
        raise ValueError(f"expected exactly one matching rule, found {len(hits)}")
    return hits[0].prediction


def attach_examples(rule: Rule, instances: Sequence[Instance], source, k: int = 5) -> Rule:
    """Fill ``examples`` and ``counterexamples`` from matching instances.

    ``source`` resolves provenance: anything with ``example_ref(provenance)``
    and ``sentence_length(provenance)`` (a Treebank or a Bitext). Shorter
    sentences are preferred; ties keep corpus order.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = [inst for inst in instances if rule.matches(inst)]
    good = [i for i in hits if i.label == rule.prediction]
    bad = [i for i in hits if i.label != rule.prediction]

    def pick(pool):
        ranked = sorted(enumerate(pool), key=lambda p: (source.sentence_length(p[1].provenance), p[0]))
        refs, seen = [], set()
        for _, inst in ranked:
            if inst.provenance in seen:
                continue
            seen.add(inst.provenance)
            refs.append(source.example_ref(inst.provenance))
            if len(refs) == k:
                break
        return tuple(refs)

    return replace(rule, examples=pick(good), counterexamples=pick(bad))


# -- splitting and evaluation ------------------------------------------------

def _stable_key(seed: int, sent_id: str) -> str:
    return hashlib.sha256(f"{seed}\x00{sent_id}".encode("utf-8")).hexdigest()


def split_dataset(instances: Sequence[Instance], ratios=(0.8, 0.1, 0.1), seed: int = 42):
    """Partition into (train, dev, test) by sentence.

    Sentences are ordered by a seeded SHA-256 of their id and cut according
    to ``ratios``; every instance follows its sentence.
    """
    if not instances:
        raise ValueError("no instances")
    if len(ratios) != 3 or abs(sum(ratios) - 1.0) > 1e-9 or min(ratios) < 0:
        raise ValueError("ratios must be three non-negative fractions summing to 1")
    sent_ids = sorted({inst.provenance[0] for inst in instances}, key=lambda s: (_stable_key(seed, s), s))
    n = len(sent_ids)
    n_train = round(ratios[0] * n)
    n_dev = min(round(ratios[1] * n), n - n_train)
    where = {}
    for rank, sid in enumerate(sent_ids):
        where[sid] = 0 if rank < n_train else 1 if rank < n_train + n_dev else 2
    parts: tuple[list, list, list] = ([], [], [])
    for inst in instances:
        parts[where[inst.provenance[0]]].append(inst)
    return parts


@dataclass(frozen=True)
class Metrics:
    train_size: int
    test_size: int
    tree_accuracy: float
    baseline_accuracy: float
    dominant_label: str
    dominant_fraction: float
    train_accuracy: float
    train_baseline_accuracy: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "Metrics":
        return cls(**d)


def accuracy(tree: TreeNode, data: Iterable[Instance]) -> float:
    data = list(data)
    return sum(predict(tree, i) == i.label for i in data) / len(data)


def evaluate(tree: TreeNode, train: Sequence[Instance], test: Sequence[Instance]) -> Metrics:
    if not train or not test:
        raise ValueError("train and test must be nonempty")
    counts = Counter(i.label for i in train)
    dominant = majority(counts)
    return Metrics(
        train_size=len(train),
        test_size=len(test),
        tree_accuracy=accuracy(tree, test),
        baseline_accuracy=sum(i.label == dominant for i in test) / len(test),
        dominant_label=dominant,
        dominant_fraction=counts[dominant] / len(train),
        train_accuracy=accuracy(tree, train),
        train_baseline_accuracy=counts[dominant] / len(train),
    )


# -- serialization -----------------------------------------------------------

def tree_to_dict(tree: TreeNode) -> dict:
    def node(n):
        if isinstance(n, Leaf):
            return {"kind": "leaf", "prediction": n.prediction, "counts": dict(n.class_counts)}
        return {"kind": "split", "feature": n.feature, "value": n.value, "counts": dict(n.class_counts),
                "match": node(n.match_child), "other": node(n.other_child)}
    return {"schema_version": TREE_SCHEMA_VERSION, "root": node(tree)}


def tree_from_dict(doc: dict) -> TreeNode:
    if doc.get("schema_version") != TREE_SCHEMA_VERSION:
        raise ValueError(f"unsupported tree schema_version {doc.get('schema_version')!r}")

    def node(d):
        if d["kind"] == "leaf":
            return Leaf(d["prediction"], dict(d["counts"]))
        return Split(d["feature"], d["value"], node(d["match"]), node(d["other"]), dict(d["counts"]))
    return node(doc["root"])
