import json
import subprocess
import sys

from stablepgf.cli import EXPERIMENTS, main

EXPECTED_NAMES = [
    "quad-death-preserve",
    "double-root-counterexample",
    "birth-monotonicity",
    "hermite-law",
    "kummer-law",
    "kingman-bp",
    "wright-fisher",
    "trotter-split",
    "particles-na",
    "tstable-certify",
]


def run_cli(args):
    return subprocess.run(
        [sys.executable, "-m", "stablepgf.cli", *args],
        capture_output=True,
        text=True,
    )


class TestListDescribe:
    def test_ten_experiments(self):
        res = run_cli(["list"])
        assert res.returncode == 0
        assert res.stdout.split() == EXPECTED_NAMES

    def test_describe_schema(self):
        res = run_cli(["describe", "kingman-bp"])
        assert res.returncode == 0
        schema = json.loads(res.stdout)
        assert schema["params"]["n"] == {"type": "int", "default": 100}
        assert "claim" in schema

    def test_describe_unknown_exits_2(self):
        res = run_cli(["describe", "no-such-thing"])
        assert res.returncode == 2


class TestRun:
    def test_double_root_run(self, tmp_path):
        out = tmp_path / "arts"
        code = main(
            [
                "run",
                "double-root-counterexample",
                "--param",
                "r=0.5",
                "--param",
                "t=0.1",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        data = json.loads((out / "double-root-counterexample.json").read_text())
        assert data["schema_version"] == 1
        assert data["passed"] is True
        assert data["results"]["certificate"]["verdict"] == "Refuted"
        im = data["results"]["witness_im"]
        import math

        t = 0.1
        disc = math.exp(-4 * t) - math.exp(-2 * t)
        assert abs(im - math.sqrt(-disc) / (2 * math.exp(-2 * t))) < 1e-12
        assert "claim" in data

    def test_unknown_param_exits_2(self, tmp_path):
        code = main(
            ["run", "double-root-counterexample", "--param", "bogus=1", "--out", str(tmp_path)]
        )
        assert code == 2

    def test_unknown_name_exits_2(self, tmp_path):
        code = main(["run", "not-an-experiment", "--out", str(tmp_path)])
        assert code == 2

    def test_rerun_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["run", "birth-monotonicity", "--out", str(out)]) == 0
        assert (a / "birth-monotonicity.json").read_bytes() == (
            b / "birth-monotonicity.json"
        ).read_bytes()

    def test_hermite_csv_artifact(self, tmp_path):
        out = tmp_path / "h"
        assert main(["run", "hermite-law", "--param", "n=2", "--out", str(out)]) == 0
        csv = (out / "hermite-law.root_trajectories.csv").read_text().splitlines()
        assert csv[0] == "t,root_index,re,im"
        assert len(csv) > 5

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"r": 0.3, "t": 0.2}))
        out = tmp_path / "c"
        assert (
            main(["run", "double-root-counterexample", "--config", str(cfg), "--out", str(out)])
            == 0
        )
        data = json.loads((out / "double-root-counterexample.json").read_text())
        assert data["params"]["r"] == 0.3


def test_every_registered_experiment_has_claim_and_defaults():
    for name, spec in EXPERIMENTS.items():
        assert spec["claim"]
        for key, (typ, default) in spec["params"].items():
            assert isinstance(default, (int, float, str))
