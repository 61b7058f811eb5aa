"""Firing rules and producing crisp predictions with height defuzzification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError, DimensionMismatch, EmptyTestSet, InvalidConfig
from .membership import Partition, eval_mf, eval_partition_many
from .rulegen import Rule, RuleSet, check_rule_bounds

FIRING_SCHEMES = ("product", "min")
DEFUZZ_SCHEMES = ("weighted_centers",)


@dataclass(frozen=True)
class FISModel:
    input_partitions: tuple[Partition, ...]
    output_partition: Partition
    rules: RuleSet
    firing_scheme: str = "product"
    defuzz_scheme: str = "weighted_centers"
    use_weights: bool = True

    def __post_init__(self):
        object.__setattr__(self, "input_partitions", tuple(self.input_partitions))
        if self.firing_scheme not in FIRING_SCHEMES:
            raise InvalidConfig(f"firing_scheme must be one of {FIRING_SCHEMES}, got {self.firing_scheme!r}")
        if self.defuzz_scheme not in DEFUZZ_SCHEMES:
            raise InvalidConfig(f"defuzz_scheme must be one of {DEFUZZ_SCHEMES}, got {self.defuzz_scheme!r}")
        if len(self.rules) == 0:
            raise DataError("a model needs at least one rule")
        check_rule_bounds(self.rules, list(self.input_partitions) + [self.output_partition])

    @property
    def input_count(self) -> int:
        return len(self.input_partitions)

    def to_dict(self) -> dict:
        return {
            "input_partitions": [p.to_dict() for p in self.input_partitions],
            "output_partition": self.output_partition.to_dict(),
            "rules": self.rules.to_dict(),
            "firing_scheme": self.firing_scheme,
            "defuzz_scheme": self.defuzz_scheme,
            "use_weights": self.use_weights,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FISModel":
        try:
            return cls(
                tuple(Partition.from_dict(p) for p in doc["input_partitions"]),
                Partition.from_dict(doc["output_partition"]),
                RuleSet.from_dict(doc["rules"]),
                doc.get("firing_scheme", "product"),
                doc.get("defuzz_scheme", "weighted_centers"),
                bool(doc.get("use_weights", True)),
            )
        except KeyError as exc:
            raise DataError(f"model document lacks field {exc.args[0]!r}") from None


@dataclass(frozen=True)
class Prediction:
    value: float | None
    fired_rule_count: int
    total_firing_mass: float

    @property
    def covered(self) -> bool:
        return self.value is not None


def fire_rule(
    rule: Rule,
    input_partitions: Sequence[Partition],
    x,
    firing_scheme: str = "product",
    use_weight: bool = True,
) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != len(rule.antecedents) or len(input_partitions) != len(rule.antecedents):
        raise DimensionMismatch(
            f"rule has {len(rule.antecedents)} antecedents, input has {x.size} values "
            f"and {len(input_partitions)} partitions"
        )
    degrees = [eval_mf(p.mfs[j - 1], float(v)) for p, j, v in zip(input_partitions, rule.antecedents, x)]
    if firing_scheme == "product":
        strength = float(np.prod(degrees))
    elif firing_scheme == "min":
        strength = min(degrees)
    else:
        raise InvalidConfig(f"firing_scheme must be one of {FIRING_SCHEMES}, got {firing_scheme!r}")
    return rule.weight * strength if use_weight else strength


def firing_strengths(model: FISModel, inputs) -> np.ndarray:
    """Strength of every rule at every input row, shape (n, rule count)."""
    x = np.asarray(inputs, dtype=float)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.shape[1] != model.input_count:
        raise DimensionMismatch(f"model expects {model.input_count} inputs, got {x.shape[1]}")
    ante = np.array([r.antecedents for r in model.rules.rules]) - 1
    strengths = None
    for v, part in enumerate(model.input_partitions):
        deg = eval_partition_many(part, x[:, v])[:, ante[:, v]]
        if strengths is None:
            strengths = deg
        elif model.firing_scheme == "product":
            strengths = strengths * deg
        else:
            strengths = np.minimum(strengths, deg)
    if model.use_weights:
        strengths = strengths * model.rules.weights[None, :]
    return strengths


def _defuzzify(model: FISModel, strengths: np.ndarray) -> list[Prediction]:
    centers = model.output_partition.centers[[r.consequent - 1 for r in model.rules.rules]]
    out = []
    for row in strengths:
        mass = float(np.sum(row))
        fired = int(np.count_nonzero(row > 0.0))
        if mass > 0.0:
            share = row / mass
            out.append(Prediction(float(share @ centers), fired, mass))
        else:
            out.append(Prediction(None, 0, 0.0))
    return out


def predict(model: FISModel, x) -> Prediction:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != model.input_count:
        raise DimensionMismatch(f"model expects {model.input_count} inputs, got {x.size}")
    return _defuzzify(model, firing_strengths(model, x))[0]


def predict_inputs(model: FISModel, inputs) -> list[Prediction]:
    return _defuzzify(model, firing_strengths(model, inputs))


def predict_set(model: FISModel, test_points) -> tuple[list[Prediction], float]:
    """Predict every row of ``test_points`` (inputs then target column).

    Returns the predictions in input order and the covered fraction.
    """
    t = np.asarray(test_points, dtype=float)
    if t.ndim != 2 or t.shape[0] == 0:
        raise EmptyTestSet("test set is empty")
    if t.shape[1] not in (model.input_count, model.input_count + 1):
        raise DimensionMismatch(f"test points have {t.shape[1]} columns, model uses {model.input_count} inputs")
    preds = predict_inputs(model, t[:, : model.input_count])
    coverage = sum(p.covered for p in preds) / len(preds)
    return preds, coverage
