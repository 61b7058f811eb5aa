import csv
import json
import subprocess
import sys

import pytest

from fisgen.cli import cli_main
from fisgen.dataio import file_digest, load_dataset
from fisgen.experiment import (
    BEST_MODELS_HEADER,
    COMPARISON_HEADER,
    REPORT_FILES,
    RULE_FREQUENCY_HEADER,
    TTESTS_HEADER,
)
from fisgen.metrics import RECORDS_CSV_HEADER

SMALL = ["--rules", "6", "--samples", "3", "--top-n", "6"]


def header(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return tuple(next(csv.reader(fh)))


@pytest.fixture
def constant_column(tmp_path):
    path = tmp_path / "flat.csv"
    path.write_text("Attrib,Nonmenu,Size\n" + "".join(f"5,{i},{10 * i}\n" for i in range(1, 13)))
    return path


class TestFit:
    def test_stdout_model(self, capsys):
        assert cli_main(["fit", "--k", "20"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert 1 <= len(doc["rules"]["rules"]) <= 20

    def test_out_dir_and_rerun(self, tmp_path):
        assert cli_main(["fit", "--out-dir", str(tmp_path / "a")]) == 0
        assert cli_main(["fit", "--out-dir", str(tmp_path / "b")]) == 0
        assert (tmp_path / "a" / "model.json").read_bytes() == (tmp_path / "b" / "model.json").read_bytes()

    def test_numerical_failure(self, constant_column, capsys):
        assert cli_main(["fit", "--data", str(constant_column), "--mf-count", "3", "--k", "3"]) == 3
        assert "numerical failure" in capsys.readouterr().err


class TestPredict:
    def test_round_trip(self, tmp_path):
        assert cli_main(["fit", "--k", "7", "--out-dir", str(tmp_path)]) == 0
        assert cli_main(["predict", "--model", str(tmp_path / "model.json"), "--out-dir", str(tmp_path)]) == 0
        with open(tmp_path / "predictions.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 70 and list(rows[0]) == ["row", "prediction", "actual", "fired_rules"]
        assert any(r["prediction"] for r in rows)

    def test_without_target_column(self, tmp_path):
        assert cli_main(["fit", "--out-dir", str(tmp_path)]) == 0
        inputs = tmp_path / "inputs.csv"
        inputs.write_text("Attrib,Nonmenu\n50,20\n95,38\n")
        assert cli_main(["predict", "--model", str(tmp_path / "model.json"), "--data", str(inputs), "--out-dir", str(tmp_path)]) == 0
        rows = (tmp_path / "predictions.csv").read_text().splitlines()
        assert len(rows) == 3 and rows[1].split(",")[2] == ""

    def test_bad_model(self, tmp_path):
        bad = tmp_path / "m.json"
        bad.write_text("{not json")
        assert cli_main(["predict", "--model", str(bad)]) == 2
        assert cli_main(["predict", "--model", str(tmp_path / "none.json")]) == 2


class TestSweep:
    def test_records(self, tmp_path):
        assert cli_main(["sweep", "--rules", "5", "--sample", "2", "--out-dir", str(tmp_path)]) == 0
        path = tmp_path / "records.csv"
        assert header(path) == RECORDS_CSV_HEADER
        rows = path.read_text().splitlines()[1:]
        assert [r.split(",")[2] for r in rows] == ["1", "2", "3", "4", "5"]
        assert all(r.startswith("2,sampled,") for r in rows)

    def test_sample_out_of_range(self):
        assert cli_main(["sweep", "--rules", "2", "--sample", "11"]) == 1


class TestExperiment:
    def test_outputs_and_determinism(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"rule_sweep_max": 6, "sample_count": 3, "top_n": 6}))
        for name in ("a", "b"):
            assert cli_main(["experiment", "--config", str(cfg), "--out-dir", str(tmp_path / name)]) == 0
        produced = {p.name for p in (tmp_path / "a").iterdir()}
        assert produced == set(REPORT_FILES) | {"manifest.json"}
        for name in REPORT_FILES:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        manifests = [json.loads((tmp_path / n / "manifest.json").read_text()) for n in ("a", "b")]
        for m in manifests:
            m.pop("timestamp")
        assert manifests[0] == manifests[1]
        assert manifests[0]["config"]["sample_count"] == 3

    def test_headers_and_reparse(self, tmp_path):
        assert cli_main(["experiment", *SMALL, "--out-dir", str(tmp_path)]) == 0
        expected = {
            "records.csv": RECORDS_CSV_HEADER,
            "best_models.csv": BEST_MODELS_HEADER,
            "comparison.csv": COMPARISON_HEADER,
            "ttests.csv": TTESTS_HEADER,
            "rule_frequency.csv": RULE_FREQUENCY_HEADER,
        }
        for name, head in expected.items():
            assert header(tmp_path / name) == head
        # numeric-only tables parse back under the dataset loader
        assert load_dataset(tmp_path / "ttests.csv").n == 3

    def test_flags_override_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"rule_sweep_max": 50, "sample_count": 3, "top_n": 6, "seed": 1}))
        assert cli_main(["experiment", "--config", str(cfg), "--rules", "4", "--seed", "2", "--out-dir", str(tmp_path)]) == 0
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["config"]["rule_sweep_max"] == 4 and manifest["config"]["seed"] == 2

    def test_manifest_digest(self, tmp_path):
        assert cli_main(["experiment", *SMALL, "--out-dir", str(tmp_path)]) == 0
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["dataset"]["sha256"] == file_digest(manifest["dataset"]["path"])


class TestSynth:
    def test_stdout(self, capsys):
        assert cli_main(["synth", "--n", "14", "--noise", "0"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "Attrib,Nonmenu,Size" and lines[1] == "20,8,300" and len(lines) == 15

    def test_invalid_spec(self):
        assert cli_main(["synth", "--n", "0"]) == 1


class TestErrors:
    def test_unknown_flag_names_it(self, capsys):
        assert cli_main(["fit", "--bogus"]) == 1
        err = capsys.readouterr().err
        assert "--bogus" in err and "hint:" in err

    def test_no_command(self):
        assert cli_main([]) == 1

    def test_bad_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"unknown_key": 1}))
        assert cli_main(["fit", "--config", str(cfg)]) == 1
        cfg.write_text("[1, 2]")
        assert cli_main(["fit", "--config", str(cfg)]) == 1
        assert cli_main(["fit", "--config", str(tmp_path / "missing.json")]) == 1

    def test_data_errors(self, tmp_path):
        empty = tmp_path / "e.csv"
        empty.write_text("Attrib,Nonmenu,Size\n")
        assert cli_main(["fit", "--data", str(empty)]) == 2
        assert cli_main(["fit", "--data", str(tmp_path / "missing.csv")]) == 2
        assert cli_main(["fit", "--target", "Effort"]) == 2

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "fisgen", "synth", "--n", "3"], capture_output=True, text=True)
        assert proc.returncode == 0 and proc.stdout.startswith("Attrib,Nonmenu,Size\n")
        proc = subprocess.run([sys.executable, "-m", "fisgen", "nope"], capture_output=True, text=True)
        assert proc.returncode == 1
