import json

import numpy as np
import pytest

from dowave import stepper
from dowave.cli import main
from dowave.model import Discretization, example1


def run_cli(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


SOLVE_CFG = {"case": "example1", "M1": 6, "M2": 6, "N": 4, "K": 2}


def test_version(capsys):
    code, out, _ = run_cli(["--version"], capsys)
    assert code == 0
    assert "0.1.0" in out


class TestSolve:
    def test_example1_outputs(self, tmp_path, capsys):
        cfg = write_config(tmp_path, SOLVE_CFG)
        out_dir = tmp_path / "out"
        code, out, err = run_cli(["solve", "--config", cfg, "--out", str(out_dir)], capsys)
        assert code == 0, err

        field_csv = out_dir / "field.csv"
        summary = json.loads((out_dir / "summary.json").read_text())
        assert field_csv.exists()
        assert summary["case"] == "example1"
        assert summary["mu"] > 0 and summary["err_inf"] > 0
        assert summary["tau"] == 0.125

        lines = field_csv.read_text().strip().split("\n")
        assert lines[0] == "x,y,u_numeric,u_exact,abs_err,rel_err"
        assert len(lines) == 1 + 7 * 7

    def test_field_csv_round_trips_exactly(self, tmp_path, capsys):
        cfg = write_config(tmp_path, SOLVE_CFG)
        out_dir = tmp_path / "out"
        code, _, _ = run_cli(["solve", "--config", cfg, "--out", str(out_dir)], capsys)
        assert code == 0

        spec = example1()
        disc = Discretization.of(spec, 6, 6, 4, 2)
        state = stepper.init(spec, disc)
        for _ in range(disc.N):
            stepper.step(state)

        rows = (out_dir / "field.csv").read_text().strip().split("\n")[1:]
        parsed = np.array([float(r.split(",")[2]) for r in rows])
        assert np.array_equal(parsed, state.current.ravel())

    def test_zero_case(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"case": "zero", "M1": 4, "M2": 4, "N": 2, "K": 1})
        code, _, _ = run_cli(["solve", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
        assert code == 0
        summary = json.loads((tmp_path / "o" / "summary.json").read_text())
        assert summary["err_inf"] == 0.0

    def test_missing_key_names_it(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"case": "example1", "M1": 4, "M2": 4, "K": 2})
        code, _, err = run_cli(["solve", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
        assert code == 2
        assert "N" in err

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {**SOLVE_CFG, "M3": 7})
        code, _, err = run_cli(["solve", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
        assert code == 2
        assert "M3" in err

    def test_unknown_output_key_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {**SOLVE_CFG, "output": {"field": "f.csv"}})
        code, _, err = run_cli(["solve", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
        assert code == 2
        assert "output.field" in err

    def test_invalid_json_rejected(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code, _, err = run_cli(["solve", "--config", str(path), "--out", str(tmp_path / "o")], capsys)
        assert code == 2

    def test_inline_case(self, tmp_path, capsys):
        inline = {
            "case": {
                "name": "flat2",
                "weight": "1",
                "psi1": "2",
                "psi2": "0",
                "phi": "2",
                "source": "0*u",
                "analytic": "2",
                "L1": 1, "L2": 1, "T": 1,
            },
            "M1": 5, "M2": 5, "N": 3, "K": 2,
        }
        cfg = write_config(tmp_path, inline)
        code, _, err = run_cli(["solve", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
        assert code == 0, err
        summary = json.loads((tmp_path / "o" / "summary.json").read_text())
        assert summary["err_inf"] <= 1e-12

    def test_inline_trig_case_with_pi_sized_domain(self, tmp_path, capsys):
        # Inline restatement of the built-in trigonometric case (linear
        # source only, so expressions stay simple): checks sympy parsing of
        # functions and constants.
        inline = {
            "case": {
                "weight": "gamma(4 - beta)",
                "psi1": "4*sin(x)*sin(y)",
                "psi2": "2*sin(x)*sin(y)",
                "phi": "0",
                "source": "0*u",
                "L1": "pi", "L2": "pi", "T": 0.5,
            },
            "M1": 4, "M2": 4, "N": 2, "K": 2,
        }
        cfg = write_config(tmp_path, inline)
        code, _, err = run_cli(["solve", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
        assert code == 0, err

    def test_inline_bad_expression(self, tmp_path, capsys):
        inline = {"case": {"weight": "1 +* 2", "psi1": "0", "psi2": "0", "phi": "0",
                           "source": "0", "L1": 1, "L2": 1, "T": 1},
                  "M1": 4, "M2": 4, "N": 2, "K": 1}
        cfg = write_config(tmp_path, inline)
        code, _, err = run_cli(["solve", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
        assert code == 2
        assert "weight" in err

    def test_inline_unknown_variable(self, tmp_path, capsys):
        inline = {"case": {"weight": "1", "psi1": "z + x", "psi2": "0", "phi": "0",
                           "source": "0", "L1": 1, "L2": 1, "T": 1},
                  "M1": 4, "M2": 4, "N": 2, "K": 1}
        cfg = write_config(tmp_path, inline)
        code, _, err = run_cli(["solve", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
        assert code == 2
        assert "psi1" in err

    def test_diverging_source_exits_3(self, tmp_path, capsys):
        inline = {
            "case": {"weight": "1", "psi1": "1", "psi2": "0", "phi": "1",
                     "source": "(u + 10)**9", "L1": 1, "L2": 1, "T": 1},
            "M1": 4, "M2": 4, "N": 8, "K": 1,
        }
        cfg = write_config(tmp_path, inline)
        with np.errstate(over="ignore"):
            code, _, err = run_cli(["solve", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
        assert code == 3
        assert "solver failure" in err


class TestStudy:
    def test_explicit_schedule(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {"case": "example1", "schedule": [[4, 4, 4, 2], [8, 8, 16, 4]]},
        )
        out_dir = tmp_path / "study"
        code, out, err = run_cli(["study", "--config", cfg, "--out", str(out_dir)], capsys)
        assert code == 0, err
        assert (out_dir / "report.json").exists()
        assert (out_dir / "report.csv").exists()
        assert "err_inf" in out and "order" in out
        doc = json.loads((out_dir / "report.json").read_text())
        assert len(doc["rows"]) == 2
        assert doc["rows"][1]["order_inf"] is not None

    def test_empty_schedule_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"case": "example1", "schedule": []})
        code, _, err = run_cli(["study", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
        assert code == 2
        assert "schedule" in err

    def test_unknown_schedule_name_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"case": "example1", "schedule": "table7"})
        code, _, err = run_cli(["study", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
        assert code == 2
        assert "table7" in err

    def test_malformed_row_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"case": "example1", "schedule": [[4, 4, 4]]})
        code, _, err = run_cli(["study", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
        assert code == 2
        assert "schedule[0]" in err

    def test_memory_guard_refuses_oversized_history(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {"case": "example1", "schedule": [[500, 500, 100000, 2]]},
        )
        code, _, err = run_cli(["study", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
        assert code == 2
        assert "GiB" in err and "memory_budget_gib" in err

    def test_memory_budget_can_be_raised(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {
                "case": "example1",
                "schedule": [[4, 4, 4, 2]],
                "memory_budget_gib": 1e-7,
            },
        )
        code, _, err = run_cli(["study", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
        assert code == 2  # tiny budget rejects even a tiny row


class TestVerify:
    def test_small_scale_passes(self, capsys):
        code, out, _ = run_cli(["verify", "--scale", "small"], capsys)
        assert code == 0, out
        assert "PASS thomas-vs-dense" in out
        assert "PASS adi-vs-dense-factored" in out
        assert "PASS splitting-perturbation" in out
        assert "PASS quadrature-order" in out
        assert "FAIL" not in out


def test_threads_flag_accepted(tmp_path, capsys):
    cfg = write_config(tmp_path, {"case": "zero", "M1": 4, "M2": 4, "N": 2, "K": 1})
    code, _, err = run_cli(
        ["--threads", "1", "solve", "--config", cfg, "--out", str(tmp_path / "o")], capsys
    )
    assert code == 0, err
