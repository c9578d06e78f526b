import json

import numpy as np
import pytest

from entforge.cli import (
    EXIT_NO_BRACKET,
    EXIT_OK,
    EXIT_USAGE,
    main,
    parse_epsilon_grid,
    parse_qubit_list,
)
from entforge.core import ValidationError


class TestGridSyntax:
    def test_log_grid(self):
        grid = parse_epsilon_grid("1e-4:1e-2:log:9")
        assert len(grid) == 9
        assert grid[0] == pytest.approx(1e-4)
        assert grid[-1] == pytest.approx(1e-2)
        ratios = np.diff(np.log(grid))
        np.testing.assert_allclose(ratios, ratios[0])

    def test_lin_grid(self):
        grid = parse_epsilon_grid("0.0:0.4:lin:5")
        np.testing.assert_allclose(grid, [0.0, 0.1, 0.2, 0.3, 0.4])

    def test_comma_list(self):
        assert parse_epsilon_grid("1e-3,5e-3") == (1e-3, 5e-3)

    def test_bad_spec(self):
        with pytest.raises(ValidationError):
            parse_epsilon_grid("1e-4:1e-2:cubic:9")

    def test_qubit_list(self):
        assert parse_qubit_list("4,6,8") == (4, 6, 8)


class TestConfigFile:
    def test_unknown_key_is_error(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("nq = 4\nwibble = 3\n")
        code = main(["generate", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert code == EXIT_USAGE
        assert "unknown config key" in capsys.readouterr().err

    def test_flags_override_file_with_warning(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("steps = 9\nnq = 4\n")
        out = tmp_path / "o"
        code = main(
            ["generate", "--config", str(cfg), "--steps", "8", "--out", str(out)]
        )
        assert code == EXIT_OK
        assert "flag overrides config file" in capsys.readouterr().err
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["steps"] == 8

    def test_comments_and_blanks_allowed(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# a comment\n\nnq = 4\nsteps = 6\n")
        out = tmp_path / "o"
        assert main(["generate", "--config", str(cfg), "--out", str(out)]) == EXIT_OK

    def test_odd_nq_rejected(self, tmp_path, capsys):
        code = main(["spectrum", "--nq", "5", "--out", str(tmp_path / "o")])
        assert code == EXIT_USAGE
        assert "even" in capsys.readouterr().err

    def test_env_seed_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ENTFORGE_SEED", "123")
        out = tmp_path / "o"
        assert main(["generate", "--nq", "4", "--steps", "6", "--out", str(out)]) == EXIT_OK
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["master_seed"] == 123


@pytest.fixture(scope="module")
def generate_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("gen")
    code = main(["generate", "--nq", "4,6", "--steps", "12", "--out", str(out)])
    return code, out


class TestGenerateCommand:
    def test_exit_code(self, generate_run):
        assert generate_run[0] == EXIT_OK

    def test_files_written(self, generate_run):
        _, out = generate_run
        for name in ("generation.csv", "fits.csv", "summary.json", "manifest.json"):
            assert (out / name).exists()

    def test_generation_schema(self, generate_run):
        _, out = generate_run
        header = (out / "generation.csv").read_text().splitlines()[0]
        assert header == "nq,t,mean_entropy,page_value,gap"

    def test_manifest_digests_cover_data_files(self, generate_run):
        _, out = generate_run
        manifest = json.loads((out / "manifest.json").read_text())
        assert set(manifest["files"]) == {"generation.csv", "fits.csv", "summary.json"}
        assert manifest["version"]
        assert manifest["gate_counts"]["4"]["per_step"] == 40
        assert manifest["gate_counts"]["4"]["reference_3nq2_plus_nq"] == 52

    def test_rerun_is_bit_identical(self, generate_run, tmp_path):
        _, out = generate_run
        out2 = tmp_path / "again"
        assert main(["generate", "--nq", "4,6", "--steps", "12", "--out", str(out2)]) == EXIT_OK
        m1 = json.loads((out / "manifest.json").read_text())["files"]
        m2 = json.loads((out2 / "manifest.json").read_text())["files"]
        assert m1 == m2


class TestSpectrumCommand:
    def test_spectrum_outputs(self, tmp_path):
        out = tmp_path / "spec"
        code = main(
            ["spectrum", "--nq", "4,6,8", "--steps", "8", "--haar-samples", "12",
             "--out", str(out)]
        )
        assert code == EXIT_OK
        stats_lines = (out / "spectrum_stats.csv").read_text().splitlines()
        assert stats_lines[0] == "nq,mean,std,rel_std,family"
        assert len(stats_lines) == 1 + 6  # 3 sizes x 2 families
        samples_header = (out / "spectrum_samples_sawtooth.csv").read_text().splitlines()[0]
        assert samples_header == "nq,bipartition_mask,entropy"


class TestNoiseSweepCommand:
    def test_sweep_outputs(self, tmp_path):
        out = tmp_path / "sweep"
        code = main(
            ["noise-sweep", "--nq", "4", "--steps", "8",
             "--eps-grid", "2e-3:4e-2:log:4", "--realizations", "24",
             "--out", str(out)]
        )
        assert code == EXIT_OK
        lines = (out / "noise_sweep.csv").read_text().splitlines()
        assert lines[0] == "nq,eps,bound_kind,mean,std,stderr,n_realizations"
        assert len(lines) == 1 + 4 * 2
        summary = json.loads((out / "summary.json").read_text())
        assert summary["predictions"]
        assert summary["initial_momentum"] == 1


class TestThresholdCommand:
    def test_no_bracket_exit_code(self, tmp_path, capsys):
        out = tmp_path / "thr"
        code = main(
            ["threshold", "--nq", "4", "--steps", "8",
             "--eps-grid", "1e-5:1e-4:log:3", "--realizations", "16",
             "--out", str(out)]
        )
        assert code == EXIT_NO_BRACKET
        assert "no-bracket" in capsys.readouterr().err

    def test_threshold_outputs(self, tmp_path):
        out = tmp_path / "thr2"
        code = main(
            ["threshold", "--nq", "4", "--steps", "8",
             "--eps-grid", "2e-3:1.5e-1:log:6", "--realizations", "32",
             "--out", str(out)]
        )
        assert code == EXIT_OK
        lines = (out / "threshold.csv").read_text().splitlines()
        assert lines[0] == "nq,t,bound_kind,eps_threshold,method"
        assert len(lines) == 3  # one per bound kind


class TestCalibrateGammaCommand:
    def test_outputs(self, tmp_path):
        out = tmp_path / "gamma"
        code = main(
            ["calibrate-gamma", "--nq", "4", "--steps", "10",
             "--eps-grid", "1e-3:8e-3:log:4", "--realizations", "32",
             "--out", str(out)]
        )
        assert code == EXIT_OK
        summary = json.loads((out / "summary.json").read_text())
        assert 0.0 < summary["gamma_reference_convention"] < 1.0
        header = (out / "fits.csv").read_text().splitlines()[0]
        assert header == "dataset,exponent_or_rate,prefactor,r_squared"


class TestValidateCommand:
    def test_validate_passes(self, capsys):
        assert main(["validate"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "property checks passed" in out
        assert "[FAIL]" not in out
