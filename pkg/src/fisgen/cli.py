"""Command-line harness.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .dataio import BUNDLED_DATASET, SyntheticSpec, dataset_to_csv, file_digest, generate_synthetic, load_dataset
from .errors import ConfigError, DataError, InvalidConfig, NumericalError
from .experiment import (
    ExperimentConfig,
    build_partitions,
    build_rule_sweep,
    data_matrix,
    evaluate,
    make_model,
    run_experiment,
    write_report,
)
from .inference import FISModel, predict_inputs
from .metrics import RECORDS_CSV_HEADER, record_csv_row
from .sampling import make_splits

log = logging.getLogger("fisgen")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    def __init__(self, message: str, prog: str):
        super().__init__(message)
        self.prog = prog


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, self.prog)


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="JSON document with ExperimentConfig fields")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--out-dir", type=Path, help="directory for output files (default: stdout where possible)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", type=Path, help="CSV dataset (default: bundled synthetic data)")
    p.add_argument("--predictors", help="comma-separated predictor columns")
    p.add_argument("--target", help="target column")
    p.add_argument("--mf-count", type=int, help="membership functions per variable")


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = _Parser(prog="fisgen", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--version", action="version", version=f"fisgen {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    fit = sub.add_parser("fit", parents=[common], help="build one FIS and emit its JSON")
    _data_flags(fit)
    fit.add_argument("--k", type=int, default=7, help="cluster count, i.e. maximum rule count (default 7)")

    pred = sub.add_parser("predict", parents=[common], help="apply a model JSON to a dataset")
    _data_flags(pred)
    pred.add_argument("--model", type=Path, required=True)

    sweep = sub.add_parser("sweep", parents=[common], help="rule counts 1..R on one build set")
    _data_flags(sweep)
    sweep.add_argument("--rules", type=int, help="largest rule count R")
    sweep.add_argument("--sample", type=int, help="use this sample's build/test split instead of all rows")
    sweep.add_argument("--samples", type=int, help="number of samples the split is drawn from")
    sweep.add_argument("--build-size", type=int)

    exp = sub.add_parser("experiment", parents=[common], help="Full, Sampled and Top-N pipeline")
    _data_flags(exp)
    exp.add_argument("--rules", type=int, help="largest rule count R")
    exp.add_argument("--samples", type=int, help="number of build/test samples S")
    exp.add_argument("--build-size", type=int)
    exp.add_argument("--top-n", type=int)

    syn = sub.add_parser("synth", parents=[common], help="emit a synthetic dataset CSV")
    syn.add_argument("--n", type=int, default=70)
    syn.add_argument("--noise", type=float, default=SyntheticSpec.noise)
    return parser


def load_config(args) -> ExperimentConfig:
    doc = {}
    if args.config is not None:
        try:
            doc = json.loads(args.config.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise InvalidConfig(f"config file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"config file is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise InvalidConfig("config document must be a JSON object")
    overrides = {
        "seed": getattr(args, "seed", None),
        "target": getattr(args, "target", None),
        "mf_count": getattr(args, "mf_count", None),
        "rule_sweep_max": getattr(args, "rules", None),
        "sample_count": getattr(args, "samples", None),
        "build_size": getattr(args, "build_size", None),
        "top_n": getattr(args, "top_n", None),
    }
    if getattr(args, "predictors", None):
        overrides["predictors"] = [p.strip() for p in args.predictors.split(",") if p.strip()]
    doc.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(doc)


def _data_path(args) -> Path:
    return args.data if args.data is not None else BUNDLED_DATASET


def _emit(text: str, out_dir: Path | None, name: str) -> None:
    if out_dir is None:
        sys.stdout.write(text)
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(text, encoding="utf-8")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_fit(args) -> int:
    config = load_config(args)
    dataset = load_dataset(_data_path(args), config.predictors, config.target)
    data = data_matrix(dataset, config)
    partitions = build_partitions(data, config, 0)
    rules = build_rule_sweep(data, partitions, config, 0, [args.k])[0]
    model = make_model(partitions, rules, config)
    _emit(json.dumps(model.to_dict(), indent=2) + "\n", args.out_dir, "model.json")
    return EXIT_OK


def cmd_predict(args) -> int:
    try:
        doc = json.loads(args.model.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"no such model file: {args.model}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"model file is not valid JSON: {exc}") from None
    model = FISModel.from_dict(doc)
    inputs = [p.variable_name for p in model.input_partitions]
    target = model.output_partition.variable_name
    full = load_dataset(_data_path(args))
    dataset = load_dataset(_data_path(args), inputs, target if target in full.column_names else None)
    preds = predict_inputs(model, dataset.columns(inputs))
    has_target = target in dataset.column_names
    actual = dataset.columns([target])[:, 0] if has_target else [None] * dataset.n
    rows = []
    for i, (p, a) in enumerate(zip(preds, actual), start=1):
        rows.append([i, "" if p.value is None else repr(p.value), "" if a is None else repr(float(a)), p.fired_rule_count])
    _emit(_csv_text(("row", "prediction", "actual", "fired_rules"), rows), args.out_dir, "predictions.csv")
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = load_config(args)
    dataset = load_dataset(_data_path(args), config.predictors, config.target)
    data = data_matrix(dataset, config)
    if args.sample is None:
        build = test = data
        sample, label = 0, "fit"
    else:
        plans = make_splits(dataset.n, config.build_size, config.sample_count, config.seed)
        if not 1 <= args.sample <= len(plans):
            raise InvalidConfig(f"--sample must lie in 1..{len(plans)}")
        plan = plans[args.sample - 1]
        build, test = data[list(plan.build_indices)], data[list(plan.test_indices)]
        sample, label = plan.sample_index, "sampled"
    partitions = build_partitions(build, config, sample)
    counts = range(1, config.rule_sweep_max + 1)
    rule_sets = build_rule_sweep(build, partitions, config, sample, counts)
    rows = [
        record_csv_row(sample, label, evaluate(make_model(partitions, rs, config), test, k, config))
        for k, rs in zip(counts, rule_sets)
    ]
    _emit(_csv_text(RECORDS_CSV_HEADER, rows), args.out_dir, "records.csv")
    return EXIT_OK


def cmd_experiment(args) -> int:
    config = load_config(args)
    path = _data_path(args)
    dataset = load_dataset(path, config.predictors, config.target)
    report = run_experiment(dataset, config)
    out_dir = args.out_dir or Path("out")
    write_report(report, out_dir)
    manifest = {
        "config": config.to_dict(),
        "dataset": {"path": str(path), "sha256": file_digest(path)},
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    for note in report.warnings:
        log.warning(note)
    log.info("report written to %s", out_dir)
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = SyntheticSpec(n=args.n, noise=args.noise, seed=args.seed if args.seed is not None else SyntheticSpec.seed)
    _emit(dataset_to_csv(generate_synthetic(spec)), args.out_dir, "synthetic.csv")
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "predict": cmd_predict,
    "sweep": cmd_sweep,
    "experiment": cmd_experiment,
    "synth": cmd_synth,
}


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"{exc.prog}: error: {exc}", file=sys.stderr)
        print(f"hint: run '{exc.prog} --help' for usage", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"fisgen {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"fisgen {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, ArithmeticError) as exc:
        print(f"fisgen {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
