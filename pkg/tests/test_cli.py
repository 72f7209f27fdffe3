import csv
import json

import pytest

from encdd.cli import ConfigError, main, parse_config
from encdd.recipes import RECIPES, to_ns


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj, indent=2))
    return str(p)


class TestList:
    def test_all_kinds(self, capsys):
        assert main(["list"]) == 0
        out = capsys.readouterr().out
        assert "(9 kinds)" in out
        for kind in RECIPES:
            assert f"\n{kind}\n" in f"\n{out}"
        assert out.count("reproduces:") == 9

    def test_catalog_stable(self, capsys):
        main(["list"])
        a = capsys.readouterr().out
        main(["list"])
        assert capsys.readouterr().out == a
        assert a.startswith("encdd experiment catalog v1")

    def test_single_kind(self, capsys):
        assert main(["list", "feasibility"]) == 0
        assert "gate_time" in capsys.readouterr().out

    def test_unknown_kind_hint(self, capsys):
        assert main(["list", "feasability"]) == 2
        assert "did you mean 'feasibility'" in capsys.readouterr().err


class TestParseConfig:
    def test_defaults_merged(self):
        cfg = parse_config('{"kind": "feasibility"}')
        assert cfg["params"]["gate_time"] == "50 ps" and cfg["seed"] == 0

    def test_unknown_field_line(self):
        text = '{\n  "kind": "feasibility",\n  "colour": 1\n}'
        with pytest.raises(ConfigError) as exc:
            parse_config(text)
        assert exc.value.line == 3

    def test_unknown_param(self):
        with pytest.raises(ConfigError, match="unknown parameter"):
            parse_config('{"kind": "feasibility", "params": {"T3": 1}}')

    def test_type_errors(self):
        with pytest.raises(ConfigError, match="integer"):
            parse_config('{"kind": "verify-theorem2", "params": {"n_samples": 1.5}}')
        with pytest.raises(ConfigError, match="seed"):
            parse_config('{"kind": "feasibility", "seed": "x"}')

    def test_syntax_error_position(self):
        with pytest.raises(ConfigError) as exc:
            parse_config('{\n  "kind": "feasibility",,\n}')
        assert exc.value.line == 2 and exc.value.column is not None

    def test_missing_kind(self):
        with pytest.raises(ConfigError, match="kind"):
            parse_config("{}")


class TestValidate:
    def test_ok(self, tmp_path, capsys):
        assert main(["validate", write(tmp_path, {"kind": "stabilizer-kick"})]) == 0
        assert "ok" in capsys.readouterr().out

    def test_bad(self, tmp_path, capsys):
        path = write(tmp_path, '{\n  "kind": "stabiliser-kick"\n}')
        assert main(["validate", path]) == 2
        err = capsys.readouterr().err
        assert f"{path}:2:" in err and "did you mean 'stabilizer-kick'" in err

    def test_missing_file(self, tmp_path, capsys):
        assert main(["validate", str(tmp_path / "nope.json")]) == 2


class TestRun:
    def test_pass_writes_outputs(self, tmp_path, capsys):
        out = tmp_path / "o"
        path = write(tmp_path, {"kind": "verify-theorem1", "output": str(out)})
        assert main(["run", path]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["schema_version"] == 1 and summary["passed"] is True
        with open(out / "verify-theorem1.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 8 and rows[0]["schema_version"] == "1"

    def test_tolerance_failure(self, tmp_path, capsys):
        code = main(["run", "--kind", "leakage-suppression", "--set", "min_suppression=1e9",
                     "--output", str(tmp_path)])
        assert code == 1
        assert "suppression" in capsys.readouterr().err
        assert json.loads((tmp_path / "summary.json").read_text())["passed"] is False

    def test_uncovered_stabilizer_fails(self, tmp_path):
        path = write(tmp_path, {"kind": "stabilizer-kick",
                                "params": {"generators": ["X1 X2"], "errors": ["Z3"],
                                           "normalizer": ""}})
        assert main(["run", path, "--output", str(tmp_path / "o")]) == 1

    def test_config_error_exit(self, tmp_path, capsys):
        path = write(tmp_path, '{"kind": "feasibility", "params": {"T2": [1]}')
        assert main(["run", path]) == 2
        assert main(["run", "--kind", "nothing"]) == 2
        assert main(["run", "--kind", "feasibility", "--set", "bogus=1"]) == 2

    def test_deterministic(self, tmp_path):
        for d in ("a", "b"):
            main(["run", "--kind", "verify-theorem2", "--set", "seed=7", "--set", "n_samples=10",
                  "--output", str(tmp_path / d)])
        for name in ("summary.json", "verify-theorem2.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_seed_changes_samples(self, tmp_path):
        for s in (1, 2):
            main(["run", "--kind", "verify-theorem2", "--set", f"seed={s}", "--set", "n_samples=3",
                  "--output", str(tmp_path / str(s))])
        a = (tmp_path / "1" / "verify-theorem2.csv").read_text()
        assert a != (tmp_path / "2" / "verify-theorem2.csv").read_text()

    def test_env_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ENCDD_OUTPUT_DIR", str(tmp_path))
        assert main(["run", "--kind", "feasibility"]) == 0
        summary = json.loads((tmp_path / "feasibility" / "summary.json").read_text())
        assert summary["results"]["n_pulses_range"] == [20, 2000]

    def test_flag_beats_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ENCDD_OUTPUT_DIR", str(tmp_path / "env"))
        main(["run", "--kind", "feasibility", "--output", str(tmp_path / "flag")])
        assert (tmp_path / "flag" / "summary.json").exists()
        assert not (tmp_path / "env").exists()

    def test_zero_coupling_scaling_sweep(self, tmp_path):
        assert main(["run", "--kind", "scaling-sweep", "--set", "g_T=0",
                     "--output", str(tmp_path)]) == 0
        res = json.loads((tmp_path / "summary.json").read_text())["results"]
        assert res["slope"] is None and max(res["residuals"]) <= 1e-12

    def test_conflicting_kind(self, tmp_path):
        path = write(tmp_path, {"kind": "feasibility"})
        assert main(["run", path, "--kind", "verify-theorem1"]) == 2


class TestUnits:
    @pytest.mark.parametrize("text,ns", [(100, 100.0), ("100 ns", 100.0), ("50ps", 0.05),
                                         ("1 us", 1000.0)])
    def test_to_ns(self, text, ns):
        assert to_ns(text) == pytest.approx(ns)

    def test_bad_unit(self):
        with pytest.raises(ValueError):
            to_ns("3 parsecs")
