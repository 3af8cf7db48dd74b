import csv
import json
import subprocess
import sys

import pytest

from coascent.harness.cli import main
from coascent.harness.config import IDENTITIES, ConfigError, ExperimentConfig, load_config
from coascent.harness.identities import CATALOG, lamperti_covariance, resolve
from coascent.harness.runner import CSV_COLUMNS, run

QUICK_INTENSITY = ["run", "--identity", "intensity", "--kind", "deterministic-power",
                   "--ensemble_size", "100", "--steps", "256", "--quiet"]


class TestCatalog:
    def test_ten_identities(self):
        assert list(CATALOG) == list(IDENTITIES)
        assert len(CATALOG) == 10

    def test_entries_are_described(self):
        for name, info in CATALOG.items():
            assert info.name == name and info.anchor and info.claim

    def test_stable(self):
        from coascent.harness import identities
        assert identities.CATALOG is CATALOG
        assert [i.anchor for i in CATALOG.values()] == [i.anchor for i in identities.CATALOG.values()]

    @pytest.mark.parametrize("lag, expected", [(0.25, 0.8824969), (1.0, 0.6065307)])
    def test_brownian_lamperti_covariance(self, lag, expected):
        assert lamperti_covariance(0.5, lag) == pytest.approx(expected, rel=1e-6)


class TestConfig:
    def test_text_round_trip(self):
        cfg = ExperimentConfig("palm-theorem", kind="fbm", hurst=0.7, windows=[[0.0, 1.0]],
                               master_seed=12, levels=[0.5, 2.0])
        assert ExperimentConfig.from_text(cfg.to_text()) == cfg

    def test_file_with_overrides(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("identity = persistence\nlevels = [1, 2]\nensemble_size = 300\n")
        cfg = load_config(path, ensemble_size=400)
        assert cfg.levels == [1.0, 2.0] and cfg.ensemble_size == 400

    def test_bare_strings(self):
        cfg = ExperimentConfig.from_text("identity = intensity\nkind = deterministic-power\n")
        assert cfg.kind == "deterministic-power"

    def test_brownian_forces_half(self):
        assert ExperimentConfig("intensity", hurst=0.7).hurst == 0.5

    @pytest.mark.parametrize("text", [
        "identity = nonsense",
        "identity = intensity\nensemble_size = 50",
        "identity = intensity\nsteps = 63",
        "identity = intensity\ncolour = 3",
        "identity = intensity\nlevels = [1, \"a\"]",
        "identity = intensity\nalpha = 1.5",
        "identity = intensity\nkind = fbm\nhurst = 1.0",
        "identity = intensity\nwindows = [[2, 1]]",
        "levels = [1]",
        "identity = intensity\nworkers = true",
    ])
    def test_invalid(self, text):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_text(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.cfg")

    def test_resolve_fills_defaults(self):
        cfg = resolve(ExperimentConfig("scaling-invariance"))
        assert cfg.levels == [0.5, 2.0] and cfg.windows == [[0.0, 1.0]]
        assert cfg.steps == 4096 and cfg.horizon == 2.0

    def test_resolve_checks_horizon(self):
        with pytest.raises(ConfigError):
            resolve(ExperimentConfig("palm-theorem", horizon=1.0))


class TestCli:
    def test_list(self, capsys):
        assert main(["list"]) == 0
        out = capsys.readouterr().out
        assert all(name in out for name in IDENTITIES)

    @pytest.mark.parametrize("argv", [
        [],
        ["frobnicate"],
        ["run"],
        ["run", "--identity", "intensity", "--ensemble_size", "10"],
        ["run", "--identity", "intensity", "--bogus", "1"],
        ["report", "/nonexistent/report.json"],
    ])
    def test_usage_errors(self, argv, capsys):
        assert main(argv) == 64
        assert "usage error" in capsys.readouterr().err

    def test_pass(self, capsys):
        assert main(QUICK_INTENSITY) == 0
        assert capsys.readouterr().out.strip() == "intensity: PASS"

    def test_fail(self):
        argv = ["run", "--identity", "idempotence", "--ensemble_size", "400", "--steps", "1024",
                "--quiet"]
        assert main(argv) == 1

    @pytest.mark.parametrize("identity", ["level-independence", "persistence"])
    def test_inconclusive(self, identity):
        argv = ["run", "--identity", identity, "--ensemble_size", "100",
                "--steps", "256", "--max_stages", "0", "--quiet"]
        assert main(argv) == 2

    def test_config_file_and_report(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        out = tmp_path / "out.json"
        cfg.write_text("identity = intensity\nkind = deterministic-power\nensemble_size = 100\n"
                       f"steps = 256\noutput_json = {out}\n")
        assert main(["run", "--config", str(cfg), "--quiet"]) == 0
        capsys.readouterr()
        assert main(["report", str(out)]) == 0
        text = capsys.readouterr().out
        assert text.startswith("intensity") and "PASS" in text

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "coascent", "list"],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0 and "persistence" in proc.stdout


class TestOutputs:
    def test_json_document(self, tmp_path):
        result = run(ExperimentConfig("intensity", kind="deterministic-power", ensemble_size=100,
                                      steps=256, output_json=str(tmp_path / "r.json")))
        doc = json.loads((tmp_path / "r.json").read_text())
        assert doc == json.loads(result.text)
        assert doc["status"] == "pass" and doc["exit_code"] == 0
        assert "workers" not in doc["config"] and "output_json" not in doc["config"]
        assert doc["ensembles"] == [{"name": "source", "first_row": 0, "rows": 100}]

    def test_csv_columns(self, tmp_path):
        path = tmp_path / "r.csv"
        run(ExperimentConfig("palm-theorem", ensemble_size=100, steps=256, resamples=200,
                             output_csv=str(path)))
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == CSV_COLUMNS
        assert CSV_COLUMNS == ["sample_index", "seed", "weight",
                               "f_endpoint", "f_sup", "f_avg", "f_alpha"]
        assert len(rows) == 1 + 200

    def test_identical_reruns(self):
        cfg = ExperimentConfig("a-independence", ensemble_size=100, steps=256)
        assert run(cfg).text == run(cfg).text
