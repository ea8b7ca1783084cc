import hashlib
import json

import pytest

from sma.cli import main


def run(argv):
    return main(argv)


class TestBoundsCommand:
    def test_theorem3_reports_value(self, capsys):
        assert run(["bounds", "theorem3", "--n", "1000", "--r", "100", "--b", "80"]) == 0
        out = capsys.readouterr().out
        assert "log_domain: yes" in out
        assert "value:" in out

    def test_lemma3_identical_inputs_zero(self, capsys):
        assert run(["bounds", "lemma3", "--wx", "1000", "--wy", "1000",
                    "--overlap", "1000"]) == 0
        assert "value: 0.0" in capsys.readouterr().out

    def test_theorem5_infeasible_epsilon_exit2(self, capsys):
        code = run(["bounds", "theorem5", "--n", "100000", "--r", "1500",
                    "--s0", "0.05", "--gamma", "0.92", "--epsilon", "0.001",
                    "--t", "2"])
        assert code == 2
        assert "half-width" in capsys.readouterr().err

    def test_asymptotic_results_not_asserted(self, capsys):
        run(["bounds", "theorem2", "--n", "10000", "--r", "100", "--delta", "0.1",
             "--mu", "2", "--lam", "1"])
        assert "asserted: no" in capsys.readouterr().out

    def test_json_output_parses(self, capsys):
        assert run(["bounds", "lemma1", "--m", "400", "--p", "0.01", "--json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["name"] == "lemma1"
        assert 0 < doc["value"]["p_zero"] < 1

    def test_missing_parameter_exit2(self, capsys):
        assert run(["bounds", "theorem3", "--n", "1000"]) == 2

    def test_unknown_bound_exit2(self):
        assert run(["bounds", "theorem9", "--n", "10"]) == 2


class TestStabilityCommand:
    def test_csv_header_and_manifest(self, tmp_path, capsys):
        code = run(["stability", "--n", "1000", "--p", "0.02", "--trials", "3",
                    "--densities", "0.2,0.4", "--out", str(tmp_path)])
        assert code == 0
        csv_path = tmp_path / "stability.csv"
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "input_density,layer2_mean,layer2_se,output_mean,output_se,trials"
        assert len(lines) == 3
        manifest = json.loads((tmp_path / "stability.manifest.json").read_text())
        digest = hashlib.sha256(csv_path.read_bytes()).hexdigest()
        assert manifest["outputs"]["stability.csv"] == digest
        assert manifest["config"]["n"] == 1000

    def test_single_trial_flagged_degenerate(self, tmp_path, capsys):
        run(["stability", "--n", "500", "--p", "0.02", "--trials", "1",
             "--densities", "0.3", "--out", str(tmp_path)])
        manifest = json.loads((tmp_path / "stability.manifest.json").read_text())
        assert any("degenerate" in note for note in manifest["notes"])
        assert "degenerate" in capsys.readouterr().err

    def test_csv_roundtrip_precision(self, tmp_path, capsys):
        run(["stability", "--n", "1000", "--p", "0.02", "--trials", "3",
             "--densities", "0.3", "--out", str(tmp_path)])
        line = (tmp_path / "stability.csv").read_text().splitlines()[1]
        fields = line.split(",")
        # reparsing and reformatting reproduces the exact text
        assert repr(float(fields[1])) == fields[1]
        assert repr(float(fields[2])) == fields[2]


class TestExpansionCommand:
    def test_csv_header_and_sorting(self, tmp_path, capsys):
        code = run(["expansion", "--n", "1000", "--p", "0.02", "--trials", "3",
                    "--densities", "0.4,0.2", "--distances", "20,1",
                    "--out", str(tmp_path)])
        assert code == 0
        lines = (tmp_path / "expansion.csv").read_text().splitlines()
        assert lines[0] == "input_density,L,expansion_mean,expansion_se,trials"
        keys = [(float(l.split(",")[0]), int(l.split(",")[1])) for l in lines[1:]]
        assert keys == sorted(keys)
        assert len(keys) == 4


class TestDeterminism:
    def test_same_seed_byte_identical(self, tmp_path, capsys):
        args = ["stability", "--n", "800", "--p", "0.02", "--trials", "3",
                "--densities", "0.3,0.5", "--seed", "99"]
        run(args + ["--out", str(tmp_path / "a")])
        run(args + ["--out", str(tmp_path / "b")])
        assert ((tmp_path / "a" / "stability.csv").read_bytes()
                == (tmp_path / "b" / "stability.csv").read_bytes())

    def test_thread_count_does_not_change_output(self, tmp_path, capsys):
        args = ["expansion", "--n", "800", "--p", "0.02", "--trials", "3",
                "--densities", "0.3", "--distances", "1,10"]
        run(args + ["--threads", "1", "--out", str(tmp_path / "t1")])
        run(args + ["--threads", "8", "--out", str(tmp_path / "t8")])
        assert ((tmp_path / "t1" / "expansion.csv").read_bytes()
                == (tmp_path / "t8" / "expansion.csv").read_bytes())

    def test_different_seed_changes_output(self, tmp_path, capsys):
        args = ["stability", "--n", "800", "--p", "0.02", "--trials", "3",
                "--densities", "0.3"]
        run(args + ["--seed", "1", "--out", str(tmp_path / "s1")])
        run(args + ["--seed", "2", "--out", str(tmp_path / "s2")])
        assert ((tmp_path / "s1" / "stability.csv").read_bytes()
                != (tmp_path / "s2" / "stability.csv").read_bytes())


class TestConfigResolution:
    def test_flags_override_config_file_over_preset(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("n = 600\ntrials = 2\n# comment\n")
        run(["stability", "--preset", "smoke-fig1a", "--config", str(cfg),
             "--trials", "4", "--densities", "0.3", "--out", str(tmp_path)])
        manifest = json.loads((tmp_path / "stability.manifest.json").read_text())
        assert manifest["config"]["n"] == 600        # file beats preset (5000)
        assert manifest["config"]["trials"] == 4     # flag beats file
        assert manifest["config"]["p"] == 0.01       # preset beats default

    def test_unknown_config_key_exit2(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("banana = 3\n")
        assert run(["stability", "--config", str(cfg), "--out", str(tmp_path)]) == 2

    def test_unknown_preset_exit2(self, tmp_path, capsys):
        # argparse rejects unknown presets itself, with the usage exit code
        with pytest.raises(SystemExit) as exc:
            run(["stability", "--preset", "nope", "--out", str(tmp_path)])
        assert exc.value.code == 2


class TestVerifyCommand:
    def test_unknown_suite_exit2(self, capsys):
        assert run(["verify", "unicorns"]) == 2

    def test_selectflip_suite_passes(self, capsys):
        assert run(["verify", "selectflip", "--trials", "3000"]) == 0
        out = capsys.readouterr().out
        assert "selectflip-continuity" in out
        assert "FAIL" not in out


class TestDatadepCommand:
    def test_writes_assignments(self, tmp_path, capsys):
        code = run(["datadep", "--n", "200", "--rn", "20", "--b", "10",
                    "--set-size", "8", "--out", str(tmp_path)])
        assert code == 0
        lines = (tmp_path / "datadep.csv").read_text().splitlines()
        assert lines[0] == "item,weight,image_indices"
        assert len(lines) == 9
        for line in lines[1:]:
            _, weight, indices = line.split(",")
            assert int(weight) == 20
            assert len(indices.split()) == 20

    def test_impossible_parameters_exit1(self, tmp_path, capsys):
        # b = 2r makes every pair collide; the search must fail with exit 1
        code = run(["datadep", "--n", "50", "--rn", "5", "--b", "10",
                    "--set-size", "4", "--max-attempts", "30",
                    "--out", str(tmp_path)])
        assert code == 1
