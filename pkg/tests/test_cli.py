import json

import pytest

from zgkn.cli import _build_parser, _merge_config, _model_params, main


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestParsing:
    def test_solve_flags_map_directly(self):
        parser = _build_parser()
        args = parser.parse_args(["solve", "--a", "0.1", "--gamma", "-0.2",
                                  "--kappa", "0.5"])
        mp = _model_params(args)
        assert mp.a == 0.1
        assert mp.kappa == 0.5
        assert -mp.e * mp.Q == pytest.approx(-0.2)
        # The coupling shorthand keeps the ring separable.
        assert mp.Q == pytest.approx(mp.I * 3.141592653589793 * mp.a)

    def test_flags_override_config_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("a = 0.2\ngamma = -0.25  # comment\n")
        parser = _build_parser()
        args = parser.parse_args(["portrait", "theta", "--config", str(cfg),
                                  "--a", "0.1", "--E", "0.95",
                                  "--lambda", "-0.9"])
        args = _merge_config(args)
        assert args.a == 0.1
        assert args.gamma == -0.25

    def test_unknown_config_key_is_a_usage_error(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("a = 0.1\nwavelength = 7\n")
        code, _, err = _run(capsys, ["portrait", "theta", "--config", str(cfg),
                                     "--E", "0.95", "--lambda", "-0.9"])
        assert code == 2
        assert "wavelength" in err

    def test_gamma_conflicts_with_explicit_charge(self, capsys):
        code, _, err = _run(capsys, ["portrait", "theta", "--a", "0.1",
                                     "--gamma", "-0.2", "--Q", "0.3",
                                     "--E", "0.95", "--lambda", "-0.9"])
        assert code == 2

    def test_non_half_integer_kappa_is_a_usage_error(self, capsys):
        code, _, _ = _run(capsys, ["solve", "--a", "0.1", "--gamma", "-0.2",
                                   "--kappa", "0.4"])
        assert code == 2

    def test_missing_subcommand_is_a_usage_error(self, capsys):
        assert main([]) == 2


class TestCommands:
    def test_solve_emits_one_deterministic_json_line(self, capsys):
        argv = ["solve", "--a", "0.1", "--gamma", "-0.2"]
        code1, out1, _ = _run(capsys, argv)
        code2, out2, _ = _run(capsys, argv)
        assert code1 == code2 == 0
        assert out1 == out2
        lines = out1.strip().splitlines()
        assert len(lines) == 1
        rec = json.loads(lines[0])
        assert list(rec) == ["a", "gamma", "kappa", "E", "lambda", "E_physical",
                             "residual_theta", "residual_omega", "iterations",
                             "converged"]
        assert 0.0 < rec["E"] < 1.0
        assert rec["converged"] is True

    def test_inadmissible_ring_is_a_numerical_error(self, capsys):
        code, out, _ = _run(capsys, ["solve", "--a", "0.6", "--gamma", "-0.2"])
        assert code == 1
        rec = json.loads(out.strip().splitlines()[-1])
        assert rec["error"] == "admissibility"

    def test_portrait_writes_csv_and_figure(self, tmp_path, capsys):
        code, _, _ = _run(capsys, [
            "portrait", "theta", "--a", "0.1", "--E", "0.95",
            "--lambda", "-0.9", "--out", str(tmp_path),
        ])
        assert code == 0
        assert (tmp_path / "nullclines.csv").exists()
        assert (tmp_path / "orbits.csv").exists()
        assert (tmp_path / "portrait.png").stat().st_size > 0
        header = (tmp_path / "orbits.csv").read_text().splitlines()[0]
        assert header == "branch,x,y"

    def test_scan_emits_both_tables(self, capsys):
        code, out, _ = _run(capsys, [
            "scan", "--a", "0.1", "--gamma", "-0.2",
            "--E-grid", "0.5:0.9:2", "--lambda-grid=-0.95:-0.9:2",
        ])
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "E,lambda"
        assert "lambda,E" in lines
        assert len(lines) == 6

    def test_validate_passes_on_reference_parameters(self, capsys):
        code, out, err = _run(capsys, ["validate", "--a", "0.1", "--gamma", "-0.2"])
        assert code == 0
        rec = json.loads(out.strip().splitlines()[-1])
        assert rec["validate"] == "pass"
        assert all(ok for _, ok in rec["checks"])
        assert "PASS" in err
