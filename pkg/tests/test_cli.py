import io
import json
import math
import sys

import pytest
from make_goldens import GOLDEN_COMMANDS, GOLDEN_DIR

from rydrouter.service.app import ENV_DATA_PATH


@pytest.mark.parametrize(
    "filename,argv", GOLDEN_COMMANDS, ids=[name for name, _ in GOLDEN_COMMANDS]
)
def test_golden_outputs(run_cli, filename, argv):
    code, out, _ = run_cli(*argv)
    assert code == 0
    golden = (GOLDEN_DIR / filename).read_text()
    assert out == golden


def test_levels_table_values(run_cli):
    code, out, _ = run_cli("levels")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "kind,name,value"
    cells = {tuple(ln.split(",")[:2]): ln.split(",")[2] for ln in lines[1:]}
    assert cells[("level", "6S1/2")] == "0.00000"
    assert cells[("transition", "6S1/2->6P3/2")] == "852.3473"
    assert cells[("transition", "6P1/2->65S1/2")] == "495.0823"
    assert cells[("series_delta0", "nS1/2")] == "4.0493"


def test_levels_case_row(run_cli):
    code, out, _ = run_cli("levels", "--case", "7")
    assert code == 0
    header, row = out.splitlines()
    cells = dict(zip(header.split(","), row.split(",")))
    assert cells["e_level"] == "6P3/2"
    assert cells["lambda1_nm"] == "852.3473"
    assert cells["lambda4_nm"] == cells["lambda5_nm"] == "508.9335"


def test_transition_row(run_cli):
    code, out, _ = run_cli("levels", "--transition", "6S1/2", "6P1/2")
    assert code == 0
    assert out.splitlines()[1].split(",")[3] == "894.5930"


def test_angles_values_and_compare(run_cli):
    code, out, _ = run_cli("angles", "--compare-published")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith(
        "case_id,ratio,theta1_rad,theta2_rad,feasible,closure_residual_rel,"
        "published_ratio"
    )
    assert len(lines) == 8
    row4 = dict(zip(lines[0].split(","), lines[4].split(",")))
    assert row4["case_id"] == "4"
    assert float(row4["ratio"]) == pytest.approx(1.2150, abs=5e-4)
    assert float(row4["theta1_rad"]) == pytest.approx(2.0415, abs=5e-4)
    assert float(row4["delta_theta1_rad"]) == pytest.approx(0.0, abs=0.01)
    assert row4["feasible"] == "true"


def test_angles_degrees_flag(run_cli):
    code, out, _ = run_cli("angles", "--case", "4", "--degrees")
    assert code == 0
    header, row = (ln.split(",") for ln in out.splitlines())
    cells = dict(zip(header, row))
    assert "theta1_deg" in cells
    assert float(cells["theta1_deg"]) == pytest.approx(
        2.0415 * 180.0 / math.pi, abs=0.03
    )
    code_json, out_json, _ = run_cli(
        "angles", "--case", "4", "--degrees", "--format", "json"
    )
    payload = json.loads(out_json)
    assert "theta1_deg" in payload["rows"][0]
    assert "theta1_rad" not in payload["rows"][0]


def test_angles_infeasible_exit_code(run_cli):
    code, out, err = run_cli("angles", "--case", "1", "--lambda5", "400")
    assert code == 3
    # the row is still printed, with the defect in the residual column
    lines = out.splitlines()
    assert len(lines) == 2
    row = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert row["feasible"] == "false"
    assert row["theta1_rad"] == "nan"
    assert float(row["closure_residual_rel"]) > 1e-4
    assert "infeasible" in err


def test_router_output(run_cli):
    code, out, _ = run_cli("router", "--case", "4", "-N", "6")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == (
        "index,azimuth_rad,retrieval_x,retrieval_y,retrieval_z,"
        "output_x,output_y,output_z,closure_residual_rel"
    )
    assert len(lines) == 7
    first = lines[1].split(",")
    assert first[0] == "0"
    assert float(first[1]) == 0.0
    # polar angle of every retrieval direction matches theta2 for case 4
    for ln in lines[1:]:
        cells = ln.split(",")
        z = float(cells[4])
        assert math.acos(z) == pytest.approx(0.5612, abs=1e-3)
        assert float(cells[8]) < 1e-6


def test_router_single_channel_offset(run_cli):
    code, out, _ = run_cli(
        "router", "--case", "4", "-N", "1", "--phase-offset", "0.6283"
    )
    assert code == 0
    row = out.splitlines()[1].split(",")
    assert float(row[1]) == pytest.approx(0.6283, abs=1e-9)


def test_plan_values(run_cli):
    code, out, err = run_cli("plan", "--case", "7", "--ts", "7")
    assert code == 0
    header, row = (ln.split(",") for ln in out.splitlines())
    cells = dict(zip(header, row))
    assert cells["omega_r_mhz"] == "0.877612"
    assert cells["t_pi_us"] == "0.569728"
    assert cells["t_prime_us"] == "5.305587"
    assert cells["min_storage_us"] == "0.356688"
    assert float(cells["matching_residual"]) < 1e-12
    assert cells["ac_stark_mhz"] == "0.255970"
    assert "light shift" in err


def test_plan_rabi_override(run_cli):
    code, out, err = run_cli("plan", "--ts", "7", "--rabi", "0.88")
    assert code == 0
    cells = dict(zip(*(ln.split(",") for ln in out.splitlines())))
    assert cells["omega_r_mhz"] == "0.880000"
    assert cells["t_prime_us"] == "5.306360"
    assert err == ""


def test_plan_below_minimum_exit_code(run_cli):
    code, out, err = run_cli("plan", "--ts", "0.1")
    assert code == 4
    assert out == ""
    assert "timing violation" in err
    assert "minimum" in err
    assert "3.56688e-07" in err


def test_plan_pulse_overrun_exit_code(run_cli):
    code, _, err = run_cli("plan", "--ts", "1.0")
    assert code == 4
    assert "1.41" in err


def test_simulate_deterministic_bytes(run_cli):
    args = [
        "simulate",
        "--set", "sweep = storage",
        "--set", "protocol = off",
        "--set", "atom_count = 300",
        "--set", "repetitions = 2",
        "--set", "ts_points = 3",
        "--set", "rabi = 0.88 MHz",
        "--seed", "5",
    ]
    code1, out1, _ = run_cli(*args)
    code2, out2, _ = run_cli(*args)
    assert code1 == code2 == 0
    assert out1 == out2
    _, out_threaded, _ = run_cli(*args, "--set", "workers = 4")
    assert out_threaded == out1
    _, out_other_seed, _ = run_cli(*args[:-1], "9")
    assert out_other_seed != out1


def test_simulate_seed_flag_overrides_config(run_cli, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "sweep = storage\nprotocol = off\natom_count = 200\nrepetitions = 2\n"
        "ts_points = 3\nrabi = 0.88 MHz\nseed = 1\n"
    )
    _, from_config, _ = run_cli("simulate", "--config", str(cfg))
    _, overridden, _ = run_cli("simulate", "--config", str(cfg), "--seed", "2")
    _, seed2_direct, _ = run_cli(
        "simulate",
        "--set", "sweep = storage", "--set", "protocol = off",
        "--set", "atom_count = 200", "--set", "repetitions = 2",
        "--set", "ts_points = 3", "--set", "rabi = 0.88 MHz",
        "--set", "seed = 2",
    )
    assert overridden != from_config
    assert overridden == seed2_direct


def test_simulate_storage_columns(run_cli):
    code, out, _ = run_cli(
        "simulate",
        "--set", "protocol = off",
        "--set", "atom_count = 200",
        "--set", "repetitions = 2",
        "--set", "ts_points = 3",
        "--set", "rabi = 0.88 MHz",
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "t_us,efficiency,stderr,note"
    assert len(lines) == 4
    first = lines[1].split(",")
    assert first[0] == "0.500000"
    assert 0.0 < float(first[1]) <= 1.0


def test_simulate_duration_columns(run_cli):
    code, out, _ = run_cli(
        "simulate",
        "--set", "sweep = duration",
        "--set", "atom_count = 200",
        "--set", "repetitions = 2",
        "--set", "tr_points = 3",
        "--set", "tr_max = 1.1 us",
        "--set", "rabi = 0.88 MHz",
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "tr_us,efficiency"
    assert lines[1].split(",")[1] == "0.0"


def test_simulate_flagged_points_have_note(run_cli):
    code, out, _ = run_cli(
        "simulate",
        "--set", "atom_count = 200",
        "--set", "repetitions = 2",
        "--set", "ts_min = 0.1 us",
        "--set", "ts_points = 3",
        "--set", "rabi = 0.88 MHz",
    )
    assert code == 0
    lines = out.splitlines()
    first = lines[1].split(",")
    assert first[1] == "nan"
    assert first[3] == "below_min_storage"


def test_simulate_config_errors_exit_2(run_cli, tmp_path):
    code, _, err = run_cli("simulate", "--set", "bogus = 1")
    assert code == 2
    assert "unknown key" in err
    code, _, err = run_cli("simulate", "--set", "ts = 7")
    assert code == 2
    code, _, err = run_cli("simulate", "--config", str(tmp_path / "missing.cfg"))
    assert code == 2
    assert "missing.cfg" in err


def test_simulate_json_format(run_cli):
    code, out, _ = run_cli(
        "simulate",
        "--set", "atom_count = 200",
        "--set", "repetitions = 2",
        "--set", "ts_min = 2 us",
        "--set", "ts_points = 2",
        "--set", "rabi = 0.88 MHz",
        "--format", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["columns"][0] == "t_us"
    assert len(payload["rows"]) == 2


def test_bad_data_file_exit_2(run_cli, monkeypatch):
    monkeypatch.setenv(ENV_DATA_PATH, "/nonexistent/levels.txt")
    code, _, err = run_cli("levels")
    assert code == 2
    assert "/nonexistent/levels.txt" in err


def test_fit_from_file_and_stdin(run_cli, tmp_path, monkeypatch):
    tau = 3.11
    rows = ["t_us,efficiency,stderr"]
    for i in range(20):
        t = 0.5 + 0.39 * i
        rows.append(f"{t},{0.9 * math.exp(-((t / tau) ** 2)):.9f},0.01")
    text = "\n".join(rows) + "\n"
    path = tmp_path / "sweep.csv"
    path.write_text(text)

    code, out, _ = run_cli("fit", "--model", "gaussian", str(path))
    assert code == 0
    cells = {ln.split(",")[0]: ln.split(",")[1] for ln in out.splitlines()[1:]}
    assert float(cells["tau"]) == pytest.approx(tau, rel=1e-3)
    assert cells["converged"] == "true"

    monkeypatch.setattr(sys, "stdin", io.StringIO(text))
    code2, out2, _ = run_cli("fit", "--model", "gaussian", "-")
    assert code2 == 0
    assert out2 == out


def test_fit_skips_flagged_rows(run_cli, tmp_path):
    path = tmp_path / "sweep.csv"
    path.write_text(
        "t_us,efficiency,stderr,note\n"
        "0.10,nan,nan,below_min_storage\n"
        "2.00,0.81,0.01,\n"
        "4.00,0.66,0.01,\n"
        "6.00,0.54,0.01,\n"
        "8.00,0.44,0.01,\n"
    )
    code, out, _ = run_cli("fit", "--model", "exponential", str(path))
    assert code == 0
    cells = {ln.split(",")[0]: ln.split(",")[1] for ln in out.splitlines()[1:]}
    assert float(cells["tau"]) == pytest.approx(9.85, rel=0.05)


def test_fit_degenerate_exit_5(run_cli, tmp_path):
    path = tmp_path / "flat.csv"
    path.write_text(
        "t_us,efficiency\n" + "".join(f"{i}.0,0.25\n" for i in range(8))
    )
    code, out, err = run_cli("fit", "--model", "gaussian", str(path))
    assert code == 5
    cells = {ln.split(",")[0]: ln.split(",")[1] for ln in out.splitlines()[1:]}
    assert cells["degenerate"] == "true"
    assert cells["offset"] == "0.25"
    assert "did not converge" in err


def test_fit_missing_file_exit_2(run_cli, tmp_path):
    code, _, err = run_cli("fit", "--model", "gaussian", str(tmp_path / "no.csv"))
    assert code == 2
    assert "no.csv" in err


def test_argparse_failures_return_2(run_cli):
    code, _, _ = run_cli()
    assert code == 2
    code, _, _ = run_cli("angles", "--format", "yaml")
    assert code == 2


def test_help_exits_zero(run_cli):
    code, out, _ = run_cli("--help")
    assert code == 0
    assert "levels" in out
