import json
import subprocess
import sys

import numpy as np
import pytest

from spinwire import cli
from spinwire.csvio import column, read_csv


@pytest.fixture
def chain_file(tmp_path):
    path = tmp_path / "chain.json"
    path.write_text(json.dumps({"kind": "xy", "n_sites": 10, "n_alice": 2, "n_bob": 2}))
    return str(path)


@pytest.fixture
def random_file(tmp_path):
    path = tmp_path / "random.json"
    desc = {"kind": "xy", "n_alice": 2, "n_bob": 2,
            "random_couplings": {"n_sites": 12, "low": 0.95, "high": 1.05, "seed": 4}}
    path.write_text(json.dumps(desc))
    return str(path)


def body(path):
    return [line for line in open(path) if not line.startswith("#")]


def test_sweep_writes_singular_values(tmp_path, chain_file):
    out = tmp_path / "sw"
    assert cli.main(["sweep", "--network", chain_file, "--t-grid", "0:6:0.5", "--k", "2", "--out", str(out)]) == 0
    header, cols, table = read_csv(f"{out}.csv")
    assert cols == ["T", "s1", "s2"]
    assert table.shape == (13, 3)
    assert np.all(table[:, 1] >= table[:, 2])
    assert header["command"] == "sweep"
    assert header["network"]["n_sites"] == 10
    assert header["config"]["k"] == 2
    assert "tolerances" in header and "seed" in header


def test_outputs_are_deterministic(tmp_path, random_file):
    for tag in ("a", "b"):
        assert cli.main(["sweep", "--network", random_file, "--t-grid", "0:5:0.25",
                         "--out", str(tmp_path / tag)]) == 0
    assert (tmp_path / "a.csv").read_text().replace(str(tmp_path / "a"), "") == (
        tmp_path / "b.csv"
    ).read_text().replace(str(tmp_path / "b"), "")
    assert body(tmp_path / "a.csv") == body(tmp_path / "b.csv")


def test_seed_flag_changes_the_instance(tmp_path, random_file):
    cli.main(["sweep", "--network", random_file, "--t-grid", "0:5:0.25", "--out", str(tmp_path / "a")])
    cli.main(["sweep", "--network", random_file, "--t-grid", "0:5:0.25", "--seed", "9",
              "--out", str(tmp_path / "b")])
    header, _, _ = read_csv(tmp_path / "b.csv")
    assert header["seed"] == 9
    assert body(tmp_path / "a.csv") != body(tmp_path / "b.csv")


def test_encode_writes_unit_vector(tmp_path, chain_file):
    out = tmp_path / "enc"
    assert cli.main(["encode", "--network", chain_file, "--t-grid", "0:8:0.25", "--refine",
                     "--out", str(out)]) == 0
    header, cols, table = read_csv(f"{out}.csv")
    assert cols == ["site", "re", "im"]
    w = column(cols, table, "re") + 1j * column(cols, table, "im")
    assert np.linalg.norm(w) == pytest.approx(1.0, abs=1e-12)
    assert np.all(w[2:] == 0)
    assert 0 < header["T"] <= 8


def test_encode_needs_a_time(tmp_path, chain_file):
    assert cli.main(["encode", "--network", chain_file, "--out", str(tmp_path / "x")]) == 1


def test_evolve_writes_trajectory(tmp_path, chain_file):
    out = tmp_path / "ev"
    assert cli.main(["evolve", "--network", chain_file, "--t", "4", "--t-grid", "0:4:0.5",
                     "--amplitudes", "--out", str(out)]) == 0
    _, cols, table = read_csv(f"{out}.csv")
    assert cols[:2] == ["t", "site_0_abs2"] and "site_9_im" in cols
    probs = table[:, 1:11]
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)
    re = table[:, [cols.index(f"site_{j}_re") for j in range(10)]]
    im = table[:, [cols.index(f"site_{j}_im") for j in range(10)]]
    assert np.allclose(re**2 + im**2, probs, atol=1e-14)


def test_derive_and_simulate_controls(tmp_path, chain_file):
    out = tmp_path / "ctl"
    assert cli.main(["derive-controls", "--network", chain_file, "--t-grid", "4:9:0.25",
                     "--steps", "300", "--phantom", "5", "--out", str(out)]) == 0
    header, cols, table = read_csv(f"{out}.csv")
    assert cols == ["t", "J_A", "J_B"]
    assert table.shape == (300, 3)
    assert np.abs(table[:, 1:]).max() <= 1.0
    summary = json.loads((tmp_path / "ctl.summary.json").read_text())
    assert summary == header["summary"]
    assert {"T", "n_steps", "achieved_c_b", "shadow_residual", "clamp_count"} <= set(summary)

    replay = tmp_path / "rep"
    assert cli.main(["simulate-controls", "--network", chain_file, "--schedule", f"{out}.csv",
                     "--out", str(replay)]) == 0
    result = json.loads((tmp_path / "rep.summary.json").read_text())
    assert result["c_b"] == pytest.approx(summary["achieved_c_b"], abs=1e-12)
    assert result["T"] == pytest.approx(summary["T"], abs=1e-12)


def test_concurrence_check_from_values_and_sweep(tmp_path, chain_file):
    out = tmp_path / "cc"
    assert cli.main(["concurrence-check", "--cb", "0.99625", "--cb", "0.25", "--out", str(out)]) == 0
    _, cols, table = read_csv(f"{out}.csv")
    assert cols == ["T", "c_b", "E", "F_bar_lower", "F_bar_upper"]
    assert np.allclose(table[:, 2], np.sqrt(table[:, 1]), atol=1e-12)
    assert np.all(table[:, 3] <= table[:, 4])

    sw = tmp_path / "sw"
    cli.main(["sweep", "--network", chain_file, "--t-grid", "0:3:0.5", "--k", "1", "--out", str(sw)])
    assert cli.main(["concurrence-check", "--sweep", f"{sw}.csv", "--out", str(out)]) == 0
    _, cols, table = read_csv(f"{out}.csv")
    assert np.array_equal(table[:, 0], np.arange(0, 3.01, 0.5))


def test_baseline(tmp_path, chain_file):
    out = tmp_path / "bl"
    assert cli.main(["baseline", "--network", chain_file, "--t-max", "50", "--out", str(out)]) == 0
    record = json.loads((tmp_path / "bl.json").read_text())
    assert 0 < record["max_c_b"] <= 1
    assert record["header"]["command"] == "baseline"


@pytest.mark.parametrize(
    "argv",
    [
        ["sweep", "--network", "missing.json", "--t-grid", "0:1:0.5", "--out", "x"],
        ["sweep", "--t-grid", "0:1:0.5", "--out", "x"],
        ["frobnicate"],
        ["concurrence-check", "--out", "x"],
        ["concurrence-check", "--cb", "1.5", "--out", "x"],
    ],
)
def test_config_errors_exit_1(tmp_path, monkeypatch, argv):
    monkeypatch.chdir(tmp_path)
    assert cli.main(argv) == 1


def test_bad_grid_exits_1(tmp_path, chain_file):
    assert cli.main(["sweep", "--network", chain_file, "--t-grid", "0:1", "--out", str(tmp_path / "x")]) == 1
    assert cli.main(["sweep", "--network", chain_file, "--t-grid", "2:1:0.5", "--out", str(tmp_path / "x")]) == 1


def test_non_xy_control_request_exits_1(tmp_path):
    path = tmp_path / "h.json"
    path.write_text(json.dumps({"kind": "heisenberg", "n_sites": 8, "n_alice": 2, "n_bob": 2}))
    assert cli.main(["derive-controls", "--network", str(path), "--t", "3", "--out", str(tmp_path / "x")]) == 1


def test_bad_tolerance_override_exits_1(tmp_path, chain_file, monkeypatch):
    monkeypatch.setenv("SPINWIRE_TOLERANCES", "nonsense=1")
    assert cli.main(["sweep", "--network", chain_file, "--t-grid", "0:1:0.5", "--out", str(tmp_path / "x")]) == 1


def test_numerical_violation_exits_2(tmp_path, chain_file, monkeypatch):
    # a negative contraction tolerance turns any nonzero singular value into a violation
    monkeypatch.setenv("SPINWIRE_TOLERANCES", "contraction=-1")
    assert cli.main(["encode", "--network", chain_file, "--t", "3", "--out", str(tmp_path / "x")]) == 2


def test_unwritable_output_exits_3(tmp_path, chain_file):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.main(["sweep", "--network", chain_file, "--t-grid", "0:1:0.5",
                     "--out", str(blocker / "sub" / "x")]) == 3


def test_failed_write_leaves_no_partial_file(tmp_path, chain_file):
    out = tmp_path / "sw"
    cli.main(["sweep", "--network", chain_file, "--t-grid", "0:1:0.5", "--out", str(out)])
    assert [p.name for p in tmp_path.iterdir() if p.name.startswith(".")] == []


def test_console_entry_point_exit_code(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "spinwire.cli", "sweep", "--network", str(tmp_path / "nope.json"),
         "--t-grid", "0:1:0.5", "--out", str(tmp_path / "x")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 1
    assert "configuration error" in proc.stderr


def test_parse_grid():
    assert np.allclose(cli.parse_grid("0:1:0.25"), [0, 0.25, 0.5, 0.75, 1.0])
    assert np.allclose(cli.parse_grid("18.5:20.5:0.25")[-1], 20.5)
