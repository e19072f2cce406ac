import json
import math

import pytest

from rydrouter.client import ServiceClient, ServiceError
from rydrouter.service.app import ENV_DATA_PATH


def test_health(client):
    out = client.get("/health")
    assert out["status"] == "ok"
    assert out["service"] == "rydrouter"


def test_levels_listing(client):
    out = client.get("/levels")
    assert out["levels"]["6S1/2"] == 0.0
    assert out["series"]["nS1/2"]["delta0"] == pytest.approx(4.0493)
    lines = out["excitation_wavelengths_nm"]
    assert lines["6S1/2->6P3/2"] == pytest.approx(852.3472758827951, abs=1e-6)
    assert lines["6P1/2->65S1/2"] == pytest.approx(495.08233525977647, abs=1e-6)


def test_levels_n1_override(client):
    out = client.get("/levels", params={"n1": 70})
    assert out["excitation_wavelengths_nm"]["6P3/2->70S1/2"] == pytest.approx(
        508.93354675125426, abs=1e-6
    )


def test_case_scheme(client):
    out = client.get("/levels/case/7")
    assert out["e_level"] == "6P3/2"
    assert out["f_level"] == "6P3/2"
    assert out["lambda4_nm"] == out["lambda5_nm"]
    out4 = client.get("/levels/case/4")
    assert out4["lambda3_nm"] == pytest.approx(1040.41160085644, abs=1e-6)
    assert out4["lambda4_nm"] == pytest.approx(1039.9453597510962, abs=1e-6)


def test_case_scheme_validation(client):
    with pytest.raises(ServiceError) as err:
        client.get("/levels/case/9")
    assert err.value.status_code == 422


def test_transition(client):
    out = client.get(
        "/levels/transition", params={"lower": "6S1/2", "upper": "6P1/2"}
    )
    assert out["wavelength_nm"] == pytest.approx(894.5929600210065, abs=1e-6)
    assert out["delta_e_cm1"] == pytest.approx(11178.26815870, abs=1e-6)


def test_transition_unknown_level(client):
    with pytest.raises(ServiceError) as err:
        client.get("/levels/transition", params={"lower": "6S1/2", "upper": "9X1/2"})
    assert err.value.kind == "data_error"
    assert err.value.status_code == 400


def test_angles_all_cases(client):
    out = client.get("/angles")
    assert len(out["rows"]) == 7
    assert not out["any_infeasible"]
    by_case = {row["case_id"]: row for row in out["rows"]}
    assert by_case[4]["ratio"] == pytest.approx(1.2150, abs=5e-4)
    assert by_case[4]["theta1_rad"] == pytest.approx(2.0415, abs=5e-4)
    assert by_case[7]["theta1_rad"] == pytest.approx(0.0, abs=1e-7)
    for row in out["rows"]:
        assert row["closure_residual_rel"] < 1e-6


def test_angles_compare_merges_reference(client):
    out = client.get("/angles", params={"compare": True, "case": 5})
    row = out["rows"][0]
    assert row["published_ratio"] == 2.18
    assert row["published_theta1_rad"] == 0.36
    assert abs(row["delta_ratio"]) < 0.01
    assert abs(row["delta_theta1_rad"]) < 0.01


def test_angles_infeasible_flagged_not_error(client):
    out = client.get("/angles", params={"lambda5_nm": 400.0})
    assert out["any_infeasible"]
    by_case = {row["case_id"]: row for row in out["rows"]}
    for case_id in (1, 2, 3, 4):
        assert not by_case[case_id]["feasible"]
        assert by_case[case_id]["theta1_rad"] is None
    for case_id in (5, 6, 7):
        assert by_case[case_id]["feasible"]


def test_router_fanout(client):
    out = client.get("/router", params={"case": 4, "channels": 6})
    assert out["n_channels"] == 6
    assert len(out["channels"]) == 6
    assert out["theta1_rad"] == pytest.approx(2.0415, abs=5e-4)
    for i, ch in enumerate(out["channels"]):
        assert ch["index"] == i
        assert ch["azimuth_rad"] == pytest.approx(i * 2 * math.pi / 6, abs=1e-12)
        assert ch["closure_residual_rel"] < 1e-6
        assert len(ch["retrieval_dir"]) == 3


def test_router_infeasible_is_422(monkeypatch, tmp_path):
    # an f level below the e level leaves the redirected wavevector too long
    # for any retrieval/output pair to close the triangle
    doctored = tmp_path / "levels.txt"
    doctored.write_text(
        "6S1/2 0.0\n6P1/2 11178.26815870\n6P3/2 11732.30710410\n"
        "7P1/2 9000.0\n7P3/2 10000.0\n"
        "ionization_limit 31406.46766\nrydberg_constant 109736.8627\n"
        "nS1/2 4.0493 0.2462\n"
    )
    monkeypatch.setenv(ENV_DATA_PATH, str(doctored))
    with ServiceClient() as client:
        with pytest.raises(ServiceError) as err:
            client.get("/router", params={"case": 1, "channels": 2})
        assert err.value.status_code == 422
        assert err.value.kind == "infeasible_geometry"
        assert err.value.payload["detail"]["defect"] > 0.0


def test_plan_case7(client):
    out = client.get("/plan")
    assert out["case_id"] == 7
    assert out["omega_r_mhz"] == pytest.approx(0.8776119402985075, rel=1e-9)
    assert out["t_pi_us"] == pytest.approx(0.5697278911564625, rel=1e-9)
    assert out["t_prime_us"] == pytest.approx(5.305587, abs=1e-5)
    assert out["min_storage_us"] == pytest.approx(0.356688, abs=1e-5)
    assert out["matching_residual"] < 1e-12
    assert out["ac_stark_mhz"] == pytest.approx(0.255970, abs=1e-5)
    assert any("light shift" in w for w in out["warnings"])


def test_plan_with_direct_rabi(client):
    out = client.get("/plan", params={"rabi_mhz": 0.88, "ts_us": 7.0})
    assert out["omega_r_mhz"] == pytest.approx(0.88, rel=1e-12)
    assert out["t_prime_us"] == pytest.approx(5.306359741363292, rel=1e-9)
    assert out["ac_stark_mhz"] == 0.0
    assert out["warnings"] == []


def test_plan_timing_violation(client):
    with pytest.raises(ServiceError) as err:
        client.get("/plan", params={"ts_us": 0.1})
    assert err.value.kind == "timing_violation"
    assert err.value.status_code == 422
    detail = err.value.payload["detail"]
    assert detail["minimum_us"] == pytest.approx(0.356688, abs=1e-5)


def test_plan_pulse_overrun_violation(client):
    with pytest.raises(ServiceError) as err:
        client.get("/plan", params={"ts_us": 1.0})
    assert err.value.kind == "timing_violation"
    assert err.value.payload["detail"]["minimum_us"] == pytest.approx(1.41, abs=0.01)


def _storage_body(**over):
    body = {
        "sweep": "storage",
        "case": 7,
        "atom_count": 300,
        "repetitions": 2,
        "seed": 1,
        "ts_min_us": 2.0,
        "ts_max_us": 7.0,
        "ts_points": 3,
        "rabi_mhz": 0.88,
    }
    body.update(over)
    return body


def test_simulate_storage_protocol_on(client):
    out = client.post("/simulate", _storage_body())
    assert out["sweep"] == "storage"
    assert out["columns"] == ["t_us", "efficiency", "stderr", "note"]
    assert len(out["rows"]) == 3
    for row in out["rows"]:
        assert row[1] == pytest.approx(1.0, abs=1e-9)
        assert row[3] == ""


def test_simulate_storage_flags_bad_points(client):
    out = client.post("/simulate", _storage_body(ts_min_us=0.1, ts_max_us=7.0))
    first = out["rows"][0]
    assert first[1] is None
    assert first[3] == "below_min_storage"


def test_simulate_protocol_off_decays(client):
    out = client.post(
        "/simulate",
        _storage_body(protocol=False, atom_count=2000, ts_min_us=0.5, ts_points=3),
    )
    effs = [row[1] for row in out["rows"]]
    assert effs[0] > effs[-1]


def test_simulate_duration_sweep(client):
    body = {
        "sweep": "duration",
        "case": 7,
        "atom_count": 300,
        "repetitions": 2,
        "seed": 1,
        "tr_min_us": 0.0,
        "tr_max_us": 1.1,
        "tr_points": 5,
        "ts_us": 7.0,
        "rabi_mhz": 0.88,
    }
    out = client.post("/simulate", body)
    assert out["columns"] == ["tr_us", "efficiency"]
    assert out["rows"][0][1] == 0.0
    effs = [row[1] for row in out["rows"]]
    assert max(effs) > 0.9


def test_simulate_wrong_direction_needs_duration_sweep(client):
    with pytest.raises(ServiceError) as err:
        client.post("/simulate", _storage_body(retrieval="wrong"))
    assert err.value.status_code == 422


def test_simulate_rejects_unknown_fields(client):
    with pytest.raises(ServiceError):
        client.post("/simulate", _storage_body(bogus_knob=1))


def test_simulate_deterministic(client):
    a = client.post("/simulate", _storage_body(protocol=False))
    b = client.post("/simulate", _storage_body(protocol=False))
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    c = client.post("/simulate", _storage_body(protocol=False, seed=2))
    assert json.dumps(a, sort_keys=True) != json.dumps(c, sort_keys=True)


def test_simulate_workers_agree(client):
    a = client.post("/simulate", _storage_body(protocol=False))
    b = client.post("/simulate", _storage_body(protocol=False, workers=4))
    assert a["rows"] == b["rows"]


def test_fit_round_trip(client):
    tau = 3.11
    points = [
        [t, 0.05 + 0.9 * math.exp(-((t / tau) ** 2))]
        for t in [0.5 + 0.4 * i for i in range(19)]
    ]
    out = client.post("/fit", {"model": "gaussian", "points": points})
    assert out["converged"]
    assert out["params"]["tau"] == pytest.approx(tau, rel=1e-6)
    assert out["params"]["offset"] == pytest.approx(0.05, abs=1e-6)


def test_fit_with_sigma_column(client):
    tau = 14.86
    points = [
        [t, 0.7 * math.exp(-t / tau), 0.01] for t in [2.0 + t for t in range(13)]
    ]
    out = client.post("/fit", {"model": "exponential", "points": points})
    assert out["converged"]
    assert out["params"]["tau"] == pytest.approx(tau, rel=1e-6)


def test_fit_degenerate_reports_flags(client):
    points = [[float(i), 0.25] for i in range(8)]
    out = client.post("/fit", {"model": "gaussian", "points": points})
    assert out["degenerate"]
    assert not out["converged"]
    assert out["params"]["tau"] is None
    assert out["params"]["offset"] == 0.25


def test_fit_rejects_ragged_rows(client):
    with pytest.raises(ServiceError) as err:
        client.post(
            "/fit",
            {"model": "gaussian", "points": [[0.0, 1.0], [1.0, 0.5, 0.01], [2.0, 0.2]]},
        )
    assert err.value.status_code == 422


def test_fit_rejects_unknown_model(client):
    with pytest.raises(ServiceError):
        client.post("/fit", {"model": "lorentzian", "points": [[0, 1], [1, 0]]})


def test_env_data_override_missing_file(monkeypatch):
    monkeypatch.setenv(ENV_DATA_PATH, "/nonexistent/levels.txt")
    with ServiceClient() as client:
        with pytest.raises(ServiceError) as err:
            client.get("/levels")
        assert err.value.kind == "data_error"
        assert "/nonexistent/levels.txt" in str(err.value)


def test_env_data_override_alternate_file(monkeypatch, tmp_path):
    alt = tmp_path / "levels.txt"
    alt.write_text(
        "6S1/2 0.0\n6P1/2 11000.0\n6P3/2 11700.0\n7P1/2 21700.0\n7P3/2 21900.0\n"
        "ionization_limit 31400.0\nrydberg_constant 109736.9\nnS1/2 4.05 0.25\n"
    )
    monkeypatch.setenv(ENV_DATA_PATH, str(alt))
    with ServiceClient() as client:
        out = client.get("/levels")
        assert out["source"] == str(alt)
        assert out["levels"]["6P1/2"] == 11000.0


def test_validation_errors_surface_as_service_errors(client):
    with pytest.raises(ServiceError) as err:
        client.post("/simulate", _storage_body(case=9))
    assert err.value.status_code == 422
    with pytest.raises(ServiceError):
        client.get("/plan", params={"ts_us": -1.0})
