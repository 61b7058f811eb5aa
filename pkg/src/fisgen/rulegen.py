"""Rule extraction from multi-dimensional FCM centers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import DataError, DimensionMismatch, EmptyRuleSet, InvalidConfig, InvalidK
from .fcm import FCMConfig, fcm_cluster
from .membership import Partition, eval_partition

WEIGHT_SCHEMES = ("product", "sum")
COMBINE_SCHEMES = ("sum", "product", "bounded_sum")


@dataclass(frozen=True)
class Rule:
    """One IF-THEN rule over 1-based membership indices.

    ``support`` counts the cluster centers merged into the rule.
    """

    antecedents: tuple[int, ...]
    consequent: int
    weight: float = 1.0
    support: int = field(default=1, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "antecedents", tuple(int(a) for a in self.antecedents))
        if self.support < 1:
            raise DataError(f"rule support must be >= 1, got {self.support!r}")
        if not (math.isfinite(self.weight) and self.weight > 0):
            raise DataError(f"rule weight must be positive and finite, got {self.weight!r}")
        if min(self.antecedents + (self.consequent,)) < 1:
            raise DataError("rule indices are 1-based")

    @property
    def key(self) -> tuple[int, ...]:
        return self.antecedents + (self.consequent,)

    @property
    def rule_id(self) -> str:
        return rule_id(self)


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]
    provenance: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        keys = [r.key for r in self.rules]
        if len(set(keys)) != len(keys):
            raise DataError("rule set contains duplicate rules")

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    @property
    def weights(self) -> np.ndarray:
        return np.array([r.weight for r in self.rules])

    def to_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "rules": [
                {"antecedents": list(r.antecedents), "consequent": r.consequent, "weight": r.weight, "support": r.support}
                for r in self.rules
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RuleSet":
        try:
            rules = [
                Rule(tuple(d["antecedents"]), int(d["consequent"]), float(d["weight"]), int(d.get("support", 1)))
                for d in doc["rules"]
            ]
        except KeyError as exc:
            raise DataError(f"rule set document lacks field {exc.args[0]!r}") from None
        return cls(tuple(rules), doc.get("provenance"))


def rule_id(rule: Rule) -> str:
    return ",".join(str(i) for i in rule.key)


def possible_rule_count(partitions: Sequence[Partition]) -> int:
    if not partitions:
        raise DataError("no partitions given")
    return math.prod(p.size for p in partitions)


def check_rule_bounds(rules: RuleSet, partitions: Sequence[Partition]) -> None:
    """Raise unless every rule index fits the given (inputs..., output) partitions."""
    sizes = [p.size for p in partitions]
    for r in rules:
        if len(r.key) != len(sizes):
            raise DimensionMismatch(f"rule {rule_id(r)} has {len(r.key)} terms, partitions cover {len(sizes)}")
        for idx, size in zip(r.key, sizes):
            if not 1 <= idx <= size:
                raise DataError(f"rule {rule_id(r)} references index {idx} outside 1..{size}")


def _combine(a: float, b: float, scheme: str) -> float:
    if scheme == "sum":
        return a + b
    if scheme == "product":
        return a * b
    return min(1.0, a + b)


def combine_rules(candidates: Sequence[Rule], combine_scheme: str = "sum") -> list[Rule]:
    """Merge candidates sharing antecedents and consequent, keeping first-seen order."""
    if combine_scheme not in COMBINE_SCHEMES:
        raise InvalidConfig(f"combine_scheme must be one of {COMBINE_SCHEMES}, got {combine_scheme!r}")
    merged: dict[tuple[int, ...], Rule] = {}
    for rule in candidates:
        prior = merged.get(rule.key)
        if prior is None:
            merged[rule.key] = rule
        else:
            merged[rule.key] = replace(
                prior,
                weight=_combine(prior.weight, rule.weight, combine_scheme),
                support=prior.support + rule.support,
            )
    return list(merged.values())


def extract_rules(
    build_points,
    partitions: Sequence[Partition],
    k: int,
    weight_scheme: str = "product",
    combine_scheme: str = "sum",
    fcm_config: FCMConfig | None = None,
    provenance: dict | None = None,
) -> RuleSet:
    """Cluster the build data into ``k`` groups and read one rule off each center.

    Parameters
    ----------
    build_points : array_like, shape (n, d)
        Input columns followed by the target as the last column.
    partitions : sequence of Partition
        One per column, in the same order.
    k : int
        Number of clusters, i.e. the rule budget before merging.
    weight_scheme : {"product", "sum"}
        How the per-dimension maximal degrees at a center become a weight.
    combine_scheme : {"sum", "product", "bounded_sum"}
        How weights of rules with identical terms are merged.
    fcm_config : FCMConfig, optional
        Clustering hyperparameters; the cluster count is replaced by ``k``.

    Returns
    -------
    RuleSet
        At most ``k`` rules, with unnormalised weights.
    """
    if weight_scheme not in WEIGHT_SCHEMES:
        raise InvalidConfig(f"weight_scheme must be one of {WEIGHT_SCHEMES}, got {weight_scheme!r}")
    if combine_scheme not in COMBINE_SCHEMES:
        raise InvalidConfig(f"combine_scheme must be one of {COMBINE_SCHEMES}, got {combine_scheme!r}")
    x = np.asarray(build_points, dtype=float)
    if x.ndim != 2:
        raise DimensionMismatch(f"build_points must be an n x d matrix, got shape {x.shape}")
    n, d = x.shape
    if len(partitions) != d:
        raise DimensionMismatch(f"{len(partitions)} partitions for {d} columns")
    if not isinstance(k, (int, np.integer)) or k < 1 or k > n:
        raise InvalidK(f"k must lie in 1..{n}, got {k!r}")

    base = fcm_config or FCMConfig(cluster_count=k)
    config = replace(base, cluster_count=int(k))
    centers = fcm_cluster(x, config).centers

    candidates = []
    for center in centers:
        terms = []
        degrees = []
        for value, part in zip(center, partitions):
            mu = eval_partition(part, float(value))
            j = int(np.argmax(mu))
            terms.append(j + 1)
            degrees.append(float(mu[j]))
        weight = math.prod(degrees) if weight_scheme == "product" else math.fsum(degrees)
        candidates.append(Rule(tuple(terms[:-1]), terms[-1], weight))

    rules = combine_rules(candidates, combine_scheme)
    prov = {"cluster_count": int(k)}
    if provenance:
        prov.update(provenance)
    return RuleSet(tuple(rules), prov)


def normalize_weights(rules: RuleSet) -> RuleSet:
    """Rescale weights so they average 1, keeping order and support."""
    if len(rules) == 0:
        raise EmptyRuleSet("cannot normalise an empty rule set")
    total = math.fsum(r.weight for r in rules)
    factor = len(rules) / total
    return RuleSet(tuple(replace(r, weight=r.weight * factor) for r in rules), rules.provenance)


def format_rule(rule: Rule, input_partitions: Sequence[Partition], output_partition: Partition) -> str:
    parts = [
        f"<{p.variable_name}> IS [{p.labels[j - 1]}]" for p, j in zip(input_partitions, rule.antecedents)
    ]
    then = f"<{output_partition.variable_name}> IS [{output_partition.labels[rule.consequent - 1]}]"
    return f"IF {' AND '.join(parts)} THEN {then} (w={rule.weight:.4g})"


def format_rules(rules: RuleSet, input_partitions: Sequence[Partition], output_partition: Partition) -> str:
    return "\n".join(format_rule(r, input_partitions, output_partition) for r in rules)
