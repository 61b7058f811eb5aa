"""Full, Sampled and Top-N model-building regimes with rule-count sweeps."""

from __future__ import annotations

import csv
import json
import logging
import warnings
from collections import Counter
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataio import Dataset
from .errors import InsufficientDistinctRules, InvalidConfig, InvalidK, InvalidSizes
from .fcm import UINT64_MASK, FCMConfig
from .inference import FISModel, predict_inputs
from .membership import DEFAULT_LABELS, Partition, build_partition, default_labels
from .metrics import (
    COVERAGE_MODES,
    MEASURES,
    RECORDS_CSV_HEADER,
    AccuracyRecord,
    ComparisonResult,
    accuracy_record,
    compare_approaches,
    record_csv_row,
    round_half_up,
    select_best,
    summarize_comparison,
)
from .rulegen import Rule, RuleSet, extract_rules, normalize_weights, rule_id
from .sampling import SplitPlan, make_splits, pairwise_uniformity, splits_to_dict

log = logging.getLogger(__name__)

APPROACHES = ("full", "sampled", "top_n")
PARTITION_TAG = 1
RULE_TAG = 2


@dataclass(frozen=True)
class ExperimentConfig:
    predictors: tuple[str, ...] = ("Attrib", "Nonmenu")
    target: str = "Size"
    mf_count: int | dict = 7
    labels: tuple[str, ...] | None = DEFAULT_LABELS
    rule_sweep_max: int = 50
    sample_count: int = 10
    build_size: int = 50
    top_n: int = 50
    seed: int = 0
    weight_scheme: str = "product"
    combine_scheme: str = "sum"
    firing_scheme: str = "product"
    normalize_weights: bool = True
    use_weights: bool = True
    fuzzifier: float = 2.0
    tolerance: float = 1e-6
    max_iterations: int = 300
    scale: bool = False
    ave_denominator: str = "predictions"
    ttest_subset: str = "build"

    def __post_init__(self):
        object.__setattr__(self, "predictors", tuple(self.predictors))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
        if not self.predictors:
            raise InvalidConfig("at least one predictor is required")
        if self.target in self.predictors:
            raise InvalidConfig("target must not also be a predictor")
        for name in ("rule_sweep_max", "sample_count", "build_size", "top_n"):
            if int(getattr(self, name)) < 1:
                raise InvalidConfig(f"{name} must be >= 1, got {getattr(self, name)!r}")
        if not 0 <= int(self.seed) <= UINT64_MASK:
            raise InvalidConfig(f"seed must fit in 64 unsigned bits, got {self.seed!r}")
        if self.ave_denominator not in ("predictions", "test_size"):
            raise InvalidConfig(f"ave_denominator must be 'predictions' or 'test_size', got {self.ave_denominator!r}")
        if self.ttest_subset not in ("build", "test"):
            raise InvalidConfig(f"ttest_subset must be 'build' or 'test', got {self.ttest_subset!r}")
        for var in self.variables:
            count = self.mf_count_for(var)
            if count < 2:
                raise InvalidConfig(f"{var}: mf_count must be >= 2, got {count}")
        FCMConfig(1, self.fuzzifier, self.tolerance, self.max_iterations, self.seed, self.scale)

    @property
    def variables(self) -> tuple[str, ...]:
        return self.predictors + (self.target,)

    def mf_count_for(self, variable: str) -> int:
        if isinstance(self.mf_count, dict):
            return int(self.mf_count.get(variable, 7))
        return int(self.mf_count)

    def labels_for(self, variable: str) -> tuple[str, ...]:
        count = self.mf_count_for(variable)
        if self.labels is not None and len(self.labels) == count:
            return self.labels
        return default_labels(count)

    def fcm_config(self, k: int, seed: int) -> FCMConfig:
        return FCMConfig(k, self.fuzzifier, self.tolerance, self.max_iterations, seed, self.scale)

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["predictors"] = list(self.predictors)
        doc["labels"] = list(self.labels) if self.labels is not None else None
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise InvalidConfig(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise InvalidConfig(str(exc)) from None


def derive_seed(seed: int, *keys: int) -> int:
    """64-bit child seed from numpy's SeedSequence hashing of (seed, keys...)."""
    state = np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(1, dtype=np.uint64)
    return int(state[0])


@dataclass
class SweepResult:
    approach: str
    sample_index: int
    records: list[AccuracyRecord]
    rule_sets: list[RuleSet]

    def to_dict(self, include_rules: bool = True) -> dict:
        doc = {
            "approach": self.approach,
            "sample": self.sample_index,
            "records": [r.to_dict() for r in self.records],
        }
        if include_rules:
            doc["rule_sets"] = [rs.to_dict() for rs in self.rule_sets]
        return doc


def data_matrix(dataset: Dataset, config: ExperimentConfig) -> np.ndarray:
    return np.asarray(dataset.columns(config.variables), dtype=float)


def build_partitions(data: np.ndarray, config: ExperimentConfig, sample_index: int) -> list[Partition]:
    parts = []
    for col, var in enumerate(config.variables):
        seed = derive_seed(config.seed, PARTITION_TAG, sample_index, col)
        count = config.mf_count_for(var)
        parts.append(
            build_partition(data[:, col], count, config.labels_for(var), config.fcm_config(count, seed), var)
        )
    return parts


def build_rule_sweep(
    data: np.ndarray,
    partitions: Sequence[Partition],
    config: ExperimentConfig,
    sample_index: int,
    rule_counts: Sequence[int],
) -> list[RuleSet]:
    """One independent FCM rule extraction per requested rule count."""
    out = []
    for k in rule_counts:
        if k > data.shape[0]:
            raise InvalidK(f"cannot extract {k} rules from {data.shape[0]} build rows")
        seed = derive_seed(config.seed, RULE_TAG, sample_index, k)
        rules = extract_rules(
            data,
            partitions,
            k,
            config.weight_scheme,
            config.combine_scheme,
            config.fcm_config(k, seed),
            provenance={"sample_index": sample_index},
        )
        out.append(normalize_weights(rules) if config.normalize_weights else rules)
    return out


def make_model(partitions: Sequence[Partition], rules: RuleSet, config: ExperimentConfig) -> FISModel:
    return FISModel(
        tuple(partitions[:-1]),
        partitions[-1],
        rules,
        firing_scheme=config.firing_scheme,
        use_weights=config.use_weights,
    )


def evaluate(model: FISModel, test: np.ndarray, rule_count: int, config: ExperimentConfig) -> AccuracyRecord:
    preds = predict_inputs(model, test[:, :-1])
    return accuracy_record(rule_count, [p.value for p in preds], test[:, -1].tolist(), config.ave_denominator)


def _splits(dataset: Dataset, config: ExperimentConfig, splits: Sequence[SplitPlan] | None) -> list[SplitPlan]:
    if config.build_size >= dataset.n:
        raise InvalidSizes(f"build_size {config.build_size} must be smaller than the {dataset.n} dataset rows")
    if splits is None:
        return make_splits(dataset.n, config.build_size, config.sample_count, config.seed)
    return list(splits)


def run_full(dataset: Dataset, config: ExperimentConfig, splits: Sequence[SplitPlan] | None = None) -> list[SweepResult]:
    """Partitions and rules from every row; each k-rule FIS scored on every test subset."""
    plans = _splits(dataset, config, splits)
    data = data_matrix(dataset, config)
    partitions = build_partitions(data, config, 0)
    rule_counts = range(1, config.rule_sweep_max + 1)
    rule_sets = build_rule_sweep(data, partitions, config, 0, rule_counts)
    models = [make_model(partitions, rs, config) for rs in rule_sets]
    out = []
    for plan in plans:
        test = data[list(plan.test_indices)]
        records = [evaluate(model, test, k, config) for k, model in zip(rule_counts, models)]
        out.append(SweepResult("full", plan.sample_index, records, rule_sets))
    return out


def run_sampled(dataset: Dataset, config: ExperimentConfig, splits: Sequence[SplitPlan] | None = None) -> list[SweepResult]:
    """Per sample: build from the build subset only, score on that sample's test subset."""
    plans = _splits(dataset, config, splits)
    data = data_matrix(dataset, config)
    rule_counts = range(1, config.rule_sweep_max + 1)
    out = []
    for plan in plans:
        build = data[list(plan.build_indices)]
        test = data[list(plan.test_indices)]
        partitions = build_partitions(build, config, plan.sample_index)
        rule_sets = build_rule_sweep(build, partitions, config, plan.sample_index, rule_counts)
        records = [evaluate(make_model(partitions, rs, config), test, k, config) for k, rs in zip(rule_counts, rule_sets)]
        out.append(SweepResult("sampled", plan.sample_index, records, rule_sets))
        log.debug("sample %d swept", plan.sample_index)
    return out


def rule_frequency(sweeps: Sequence[SweepResult], count: str = "instances") -> dict[str, int]:
    """Occurrences of every rule across all rule sets of ``sweeps``.

    ``count="instances"`` counts cluster centers, so a rule merged from three
    centers in one set counts three times and each k-rule set contributes k.
    ``count="sets"`` counts each rule once per set it appears in.
    Ordered by descending count, then ascending rule id.
    """
    if count not in ("instances", "sets"):
        raise InvalidConfig(f"count must be 'instances' or 'sets', got {count!r}")
    counts: Counter[str] = Counter()
    for sweep in sweeps:
        for rules in sweep.rule_sets:
            for r in rules:
                counts[rule_id(r)] += r.support if count == "instances" else 1
    return dict(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))


def rule_slots(sweep: SweepResult) -> int:
    """Cluster budget of a sweep: the sum of k over its rule sets."""
    return sum(int((rs.provenance or {}).get("cluster_count", len(rs))) for rs in sweep.rule_sets)


def parse_rule_id(text: str) -> tuple[tuple[int, ...], int]:
    terms = tuple(int(t) for t in text.split(","))
    return terms[:-1], terms[-1]


def top_n_rules(frequency: dict[str, int], n: int, normalize: bool = True) -> RuleSet:
    """The ``n`` most frequent rules, weighted by their frequency."""
    chosen = list(frequency.items())[:n]
    rules = []
    for rid, count in chosen:
        ante, cons = parse_rule_id(rid)
        rules.append(Rule(ante, cons, float(count), count))
    rs = RuleSet(tuple(rules), {"top_n": n, "selected": len(rules)})
    return normalize_weights(rs) if normalize and rules else rs


def run_top_n(
    sampled_sweeps: Sequence[SweepResult],
    dataset: Dataset,
    config: ExperimentConfig,
    splits: Sequence[SplitPlan] | None = None,
) -> tuple[list[SweepResult], list[str]]:
    """Score every prefix of the frequency-ranked mega rule set on every test subset.

    Returns the sweeps and any warnings raised while assembling the rule set.
    """
    plans = _splits(dataset, config, splits)
    data = data_matrix(dataset, config)
    notes = []
    frequency = rule_frequency(sampled_sweeps)
    if len(frequency) < config.top_n:
        msg = f"only {len(frequency)} distinct rules available for a top-{config.top_n} rule set; using all"
        warnings.warn(msg, InsufficientDistinctRules, stacklevel=2)
        notes.append(msg)
    mega = top_n_rules(frequency, config.top_n, config.normalize_weights)
    partitions = build_partitions(data, config, 0)
    prefixes = []
    for t in range(1, len(mega) + 1):
        rs = RuleSet(mega.rules[:t], {"top_n": config.top_n, "prefix": t})
        prefixes.append(rs)
    models = [make_model(partitions, rs, config) for rs in prefixes]
    out = []
    for plan in plans:
        test = data[list(plan.test_indices)]
        records = [evaluate(model, test, t, config) for t, model in enumerate(models, start=1)]
        out.append(SweepResult("top_n", plan.sample_index, records, prefixes))
    return out, notes


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    splits: list[SplitPlan]
    full: list[SweepResult]
    sampled: list[SweepResult]
    top_n: list[SweepResult]
    best_models: list[dict]
    comparison: dict[int, dict[str, ComparisonResult]]
    comparison_summary: dict
    full_comparison: dict
    ttests: list[dict]
    rule_frequency: dict
    counts: dict
    qualitative: dict
    warnings: list[str] = field(default_factory=list)

    def sweeps(self, approach: str) -> list[SweepResult]:
        return {"full": self.full, "sampled": self.sampled, "top_n": self.top_n}[approach]

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "splits": splits_to_dict(self.splits, self.config.seed),
            "counts": self.counts,
            "sweeps": {
                # every full sweep shares one rule family; store it once
                "full": [s.to_dict(include_rules=(i == 0)) for i, s in enumerate(self.full)],
                "sampled": [s.to_dict() for s in self.sampled],
                "top_n": [s.to_dict(include_rules=(i == 0)) for i, s in enumerate(self.top_n)],
            },
            "best_models": self.best_models,
            "comparison": {
                "approaches": {"a": "sampled", "b": "top_n"},
                "per_sample": {
                    str(s): {m: asdict(res) for m, res in row.items()} for s, row in self.comparison.items()
                },
                "summary": self.comparison_summary,
            },
            "full_comparison": self.full_comparison,
            "ttests": self.ttests,
            "rule_frequency": self.rule_frequency,
            "qualitative": self.qualitative,
            "warnings": self.warnings,
        }


def _best_rows(sweeps_by_approach: dict[str, list[SweepResult]]) -> list[dict]:
    rows = []
    for approach, sweeps in sweeps_by_approach.items():
        for sweep in sweeps:
            for mode in COVERAGE_MODES:
                for measure in MEASURES:
                    best = select_best(sweep.records, measure, mode)
                    rows.append(
                        {
                            "approach": approach,
                            "sample": sweep.sample_index,
                            "coverage_mode": mode,
                            "measure": measure,
                            "record": best.to_dict(),
                        }
                    )
    return rows


def _value(record: AccuracyRecord, measure: str) -> float:
    v = record.measure(measure)
    return float("inf") if v is None else v


def _full_comparison(full, sampled, top_n, rule_count_limit: int) -> dict:
    """Where the Full approach stands against the other two, under two readings."""
    cases = 0
    best_wins = 0
    fixed_k = {}
    for f, s, t in zip(full, sampled, top_n):
        per_measure = {}
        for measure in MEASURES:
            cases += 1
            bf, bs, bt = (_value(select_best(x.records, measure, "ignore"), measure) for x in (f, s, t))
            if bf <= min(bs, bt):
                best_wins += 1
            wins = 0
            for k in range(rule_count_limit):
                vf, vs, vt = (_value(x.records[k], measure) for x in (f, s, t))
                wins += vf <= min(vs, vt)
            per_measure[measure] = 100.0 * wins / rule_count_limit
        fixed_k[str(f.sample_index)] = per_measure
    return {
        "best_per_sample": {"full_most_accurate": best_wins, "cases": cases},
        "fixed_k_pct_full_best": fixed_k,
    }


def _ttest_rows(splits, data, config) -> list[dict]:
    matrix = pairwise_uniformity(splits, data, column=-1, subset=config.ttest_subset)
    rows = []
    for i in range(len(splits)):
        for j in range(i + 1, len(splits)):
            res = matrix[i][j]
            rows.append(
                {
                    "sample_a": splits[i].sample_index,
                    "sample_b": splits[j].sample_index,
                    "t_statistic": res.t_statistic,
                    "df": res.degrees_of_freedom,
                    "p_value": res.p_value,
                    "significant_at": {str(a): flag for a, flag in res.significant_at.items()},
                }
            )
    return rows


def run_experiment(dataset: Dataset, config: ExperimentConfig) -> ExperimentReport:
    """Run all three regimes and assemble every table analogue."""
    splits = _splits(dataset, config, None)
    data = data_matrix(dataset, config)
    full = run_full(dataset, config, splits)
    sampled = run_sampled(dataset, config, splits)
    notes: list[str] = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", InsufficientDistinctRules)
        top, top_notes = run_top_n(sampled, dataset, config, splits)
    notes.extend(top_notes)

    aligned = min(config.rule_sweep_max, len(top[0].records))
    comparison = {}
    for s, t in zip(sampled, top):
        comparison[s.sample_index] = {
            m: compare_approaches(s.records[:aligned], t.records[:aligned], m) for m in MEASURES
        }
    summary = summarize_comparison(comparison)
    summary_doc = {m: {stat: {"sampled": v["a"], "top_n": v["b"]} for stat, v in d.items()} for m, d in summary.overall.items()}

    favoring = [m for m in MEASURES if summary.overall[m]["mean"]["b"] >= summary.overall[m]["mean"]["a"]]
    qualitative = {"measures_top_n_mean_at_least_sampled": favoring, "holds": len(favoring) >= 2}
    if not qualitative["holds"]:
        notes.append(
            f"Top-N mean pct-best reached the Sampled level on only {len(favoring)} of {len(MEASURES)} measures"
        )

    per_sample_freq = {str(s.sample_index): rule_frequency([s]) for s in sampled}
    overall_freq = rule_frequency(sampled)
    partitions_sizes = [config.mf_count_for(v) for v in config.variables]
    counts = {
        "possible_rules": int(np.prod(partitions_sizes)),
        "rule_slots_per_sample": {str(s.sample_index): rule_slots(s) for s in sampled},
        "merged_rules_per_sample": {str(s.sample_index): sum(len(rs) for rs in s.rule_sets) for s in sampled},
        "distinct_rules_per_sample": {k: len(v) for k, v in per_sample_freq.items()},
        "distinct_rules_overall": len(overall_freq),
        "comparison_cells": len(comparison) * len(MEASURES),
        "ttest_pairs": len(splits) * (len(splits) - 1) // 2,
        "records": {a: sum(len(s.records) for s in sw) for a, sw in (("full", full), ("sampled", sampled), ("top_n", top))},
    }

    return ExperimentReport(
        config=config,
        splits=splits,
        full=full,
        sampled=sampled,
        top_n=top,
        best_models=_best_rows({"full": full, "sampled": sampled, "top_n": top}),
        comparison=comparison,
        comparison_summary=summary_doc,
        full_comparison=_full_comparison(full, sampled, top, aligned),
        ttests=_ttest_rows(splits, data, config),
        rule_frequency={"overall": overall_freq, "per_sample": per_sample_freq},
        counts=counts,
        qualitative=qualitative,
        warnings=notes,
    )


REPORT_FILES = ("report.json", "records.csv", "best_models.csv", "comparison.csv", "ttests.csv", "rule_frequency.csv")
BEST_MODELS_HEADER = ("approach", "sample", "coverage_mode", "measure") + RECORDS_CSV_HEADER[2:]
COMPARISON_HEADER = ("sample", "measure", "sampled_pct_best", "top_n_pct_best")
TTESTS_HEADER = ("sample_a", "sample_b", "t_statistic", "df", "p_value", "significant_05")
RULE_FREQUENCY_HEADER = ("scope", "rank", "rule_id", "count")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def report_json(report: ExperimentReport) -> str:
    return json.dumps(report.to_dict(), indent=1, allow_nan=False) + "\n"


def write_report(report: ExperimentReport, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report_json(report), encoding="utf-8")

    rows = []
    for approach in APPROACHES:
        for sweep in report.sweeps(approach):
            rows.extend(record_csv_row(sweep.sample_index, approach, r) for r in sweep.records)
    _write_csv(out / "records.csv", RECORDS_CSV_HEADER, rows)

    rows = []
    for b in report.best_models:
        rec = AccuracyRecord.from_dict(b["record"])
        rows.append([b["approach"], b["sample"], b["coverage_mode"], b["measure"]] + record_csv_row("", "", rec)[2:])
    _write_csv(out / "best_models.csv", BEST_MODELS_HEADER, rows)

    rows = []
    for s, row in report.comparison.items():
        for m, res in row.items():
            a, b = res.display
            rows.append([s, m, a, b])
    for stat in ("mean", "median"):
        for m, d in report.comparison_summary.items():
            rows.append([stat, m, round_half_up(d[stat]["sampled"]), round_half_up(d[stat]["top_n"])])
    _write_csv(out / "comparison.csv", COMPARISON_HEADER, rows)

    rows = [
        [t["sample_a"], t["sample_b"], repr(t["t_statistic"]), repr(t["df"]), repr(t["p_value"]), int(t["significant_at"]["0.05"])]
        for t in report.ttests
    ]
    _write_csv(out / "ttests.csv", TTESTS_HEADER, rows)

    rows = [["all", i, rid, c] for i, (rid, c) in enumerate(report.rule_frequency["overall"].items(), start=1)]
    for s, freq in report.rule_frequency["per_sample"].items():
        rows.extend([f"sample:{s}", i, rid, c] for i, (rid, c) in enumerate(freq.items(), start=1))
    _write_csv(out / "rule_frequency.csv", RULE_FREQUENCY_HEADER, rows)
    return [out / name for name in REPORT_FILES]
