import json

import pytest

from particle_paths.cli import ConfigError, dump_config, load_config, run_cli


def base_config(tmp_path, **overrides):
    cfg = {
        "mode": "simulate",
        "flux": {"kind": "burgers", "params": {}},
        "initial_data": {"kind": "paper_example", "params": {}},
        "placement": {"strategy": "uniform", "n": 31},
        "time_horizon": 0.1,
        "integrator": {"dt_max": 0.001, "theta": 0.1, "eps_coll": None},
        "snapshots": 8,
        "seed": 0,
        "out": str(tmp_path / "out"),
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_config_roundtrip(tmp_path):
    path = base_config(tmp_path)
    cfg = load_config(path)
    again = load_config(json.loads(dump_config(cfg)))
    assert cfg.to_dict() == again.to_dict()


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="file not found"):
        load_config(tmp_path / "nope.json")
    with pytest.raises(ConfigError, match="mode"):
        load_config({"mode": "never"})
    with pytest.raises(ConfigError, match="placement"):
        load_config({"placement": {}})
    with pytest.raises(ConfigError, match="unknown key"):
        load_config({"modes": "simulate"})


def test_simulate_writes_outputs(tmp_path):
    path = base_config(tmp_path)
    assert run_cli([str(path)]) == 0
    out = tmp_path / "out"
    assert (out / "trajectory.csv").exists()
    assert (out / "events.json").exists()
    summary = (out / "summary.txt").read_text()
    assert "mass drift: 0.000e+00" in summary
    assert "audit: PASS" in summary


def test_simulate_deterministic_bytes(tmp_path):
    path = base_config(tmp_path)
    assert run_cli([str(path), "--out", str(tmp_path / "a")]) == 0
    assert run_cli([str(path), "--out", str(tmp_path / "b")]) == 0
    for name in ("trajectory.csv", "events.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_audit_roundtrip(tmp_path):
    path = base_config(tmp_path)
    assert run_cli([str(path)]) == 0
    assert run_cli([str(path), "--mode", "audit", "--set", f"input={tmp_path / 'out'}"]) == 0


def test_audit_flags_tampered_file(tmp_path):
    path = base_config(tmp_path)
    assert run_cli([str(path)]) == 0
    csv_path = tmp_path / "out" / "trajectory.csv"
    lines = csv_path.read_text().splitlines()
    cols = lines[40].split(",")
    cols[-1] = repr(float(cols[-1]) * 10)  # density punched above the maximum
    lines[40] = ",".join(cols)
    csv_path.write_text("\n".join(lines) + "\n")
    assert run_cli([str(path), "--mode", "audit", "--set", f"input={tmp_path / 'out'}"]) == 3


def test_convergence_mode(tmp_path):
    path = base_config(
        tmp_path,
        mode="convergence",
        placement={"strategy": "uniform", "n_list": [9, 17, 33]},
        time_horizon=0.1,
    )
    assert run_cli([str(path)]) == 0
    payload = json.loads((tmp_path / "out" / "rate.json").read_text())
    assert payload["fit"]["slope"] > 0.3
    assert (tmp_path / "out" / "rate.csv").read_text().startswith("dx,error,slope_so_far")


def test_ftl_check_mode(tmp_path):
    path = base_config(
        tmp_path,
        mode="ftl-check",
        flux={"kind": "lwr", "params": {}},
        initial_data={"kind": "riemann", "params": {"u_l": 0.2, "u_r": 0.8, "x0": 0.0, "window": [-1, 1]}},
        ftl={"pairs": 500, "tol": 1e-8},
    )
    assert run_cli([str(path)]) == 0
    payload = json.loads((tmp_path / "out" / "ftl_check.json").read_text())
    assert payload["max_deviation"] <= 1e-8


def test_ftl_check_rejects_rising_velocity_field(tmp_path):
    path = base_config(tmp_path, mode="ftl-check")  # burgers: a increases
    assert run_cli([str(path)]) == 3


def test_unknown_config_key_is_exit_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"mode": "simulate", "bogus": 1}))
    assert run_cli([str(path)]) == 2


def test_csv_inputs_for_flux_and_data(tmp_path):
    import numpy as np

    us = np.linspace(0.0, 2.0, 401)
    flux_csv = tmp_path / "flux.csv"
    flux_csv.write_text("u,f\n" + "\n".join(f"{float(u)!r},{float(0.5 * u * u)!r}" for u in us))
    xs = np.linspace(-1.0, 2.0, 301)
    prof = np.where((xs > 0) & (xs < 1), 1.5, 0.0)
    data_csv = tmp_path / "profile.csv"
    data_csv.write_text("x,u\n" + "\n".join(f"{float(x)!r},{float(u)!r}" for x, u in zip(xs, prof)))
    path = base_config(
        tmp_path,
        flux={"kind": "tabulated", "params": {"path": str(flux_csv)}},
        initial_data={"kind": "sampled", "params": {"path": str(data_csv)}},
        placement={"strategy": "uniform", "n": 21},
    )
    assert run_cli([str(path)]) == 0
    assert "audit: PASS" in (tmp_path / "out" / "summary.txt").read_text()


def test_function_csv_export(tmp_path):
    import numpy as np

    import particle_paths as pp

    fn = pp.PiecewiseConstantFn(np.array([0.0, 1.0]), np.array([2.0]))
    out = tmp_path / "fn.csv"
    pp.exports.write_function_csv(fn, out, -1.0, 2.0, 7)
    rows = out.read_text().splitlines()
    assert rows[0] == "x,value"
    assert len(rows) == 8
    x, v = rows[3].split(",")
    assert fn(float(x)) == float(v)


def test_set_overrides(tmp_path):
    path = base_config(tmp_path)
    out = tmp_path / "o2"
    assert run_cli([str(path), "--set", "placement.n=11", "--set", f"out={out}"]) == 0
    rows = (out / "trajectory.csv").read_text().splitlines()
    # 8 snapshots of 10 cells plus header
    assert len(rows) == 1 + 8 * 10
