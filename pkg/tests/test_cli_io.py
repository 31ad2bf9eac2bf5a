import json
from pathlib import Path

import numpy as np
import pytest

from kdvbbm.cli import main
from kdvbbm.config import ConfigError, config_from_dict, dump_config, parse_config, resolved_dict
from kdvbbm.io import (
    RunManifest,
    SnapshotError,
    read_series,
    read_snapshot,
    sha256_file,
    write_series,
    write_snapshot,
)
from kdvbbm.model import EnergyReport, ModelParams, random_ensemble
from kdvbbm.spectral import SpectralField, SymmetryError, make_grid

SMOKE = Path(__file__).parents[1] / "configs" / "smoke.json"


def _write(tmp_path, data, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def test_minimal_config_defaults(tmp_path):
    cfg = parse_config(_write(tmp_path, {"grid": {"n": 256, "L": 64}, "params": {"gamma1": 1, "delta1": 1}}))
    assert cfg.params.gamma == 7 / 48
    assert cfg.params.gamma2 == 0 and cfg.params.delta2 == 0
    assert cfg.solver.method == "ifrk4"
    assert cfg.grid.n == 256


def test_invariant_violation_names_key_path(tmp_path):
    with pytest.raises(ConfigError, match=r"params\.delta1"):
        parse_config(_write(tmp_path, {"params": {"gamma1": 1, "delta1": -1}}))
    with pytest.raises(ConfigError, match=r"grid\.n"):
        config_from_dict({"grid": {"n": 255}, "params": {"gamma1": 1, "delta1": 1}})


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match=r"solver\.dtt"):
        config_from_dict({"params": {"gamma1": 1, "delta1": 1}, "solver": {"dtt": 0.1}})


def test_overflow_guard_checked_eagerly():
    with pytest.raises(ConfigError, match="observe.sigmas"):
        config_from_dict({"params": {"gamma1": 1, "delta1": 1}, "observe": {"sigmas": [30.0]}})


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        parse_config(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        parse_config(bad)


def test_config_round_trip(tmp_path):
    cfg = parse_config(SMOKE)
    out = tmp_path / "resolved.json"
    dump_config(cfg, out)
    assert resolved_dict(parse_config(out)) == resolved_dict(cfg)


def test_snapshot_round_trip_bit_exact(tmp_path):
    g = make_grid(64, 16.0)
    f = random_ensemble(g, 1, 5)[0] * np.pi
    p = tmp_path / "s.json"
    write_snapshot(f, {"time": 1.25, "params": ModelParams(1.0, 2.0), "sigma_observed": [0.1]}, p)
    snap = read_snapshot(p)
    assert np.array_equal(snap.coefficients, f.coefficients)
    assert snap.time == 1.25 and snap.model_params() == ModelParams(1.0, 2.0)
    assert snap.field().grid == g


def test_zero_snapshot_round_trip(tmp_path):
    p = tmp_path / "z.json"
    write_snapshot(SpectralField.zeros(make_grid(16, 2.0)), {}, p)
    assert not np.any(read_snapshot(p).coefficients)


def test_snapshot_errors(tmp_path):
    g = make_grid(16, 2.0)
    p = tmp_path / "s.json"
    write_snapshot(SpectralField.from_samples(np.cos(g.x * np.pi), g), {}, p)
    text = p.read_text()
    (tmp_path / "trunc.json").write_text(text[: len(text) // 2])
    with pytest.raises(SnapshotError):
        read_snapshot(tmp_path / "trunc.json")
    doc = json.loads(text)
    doc["schema_version"] = 99
    (tmp_path / "v.json").write_text(json.dumps(doc))
    with pytest.raises(SnapshotError, match="schema_version"):
        read_snapshot(tmp_path / "v.json")
    doc["schema_version"] = 1
    doc["coefficients"][9] = [1.0, 0.5]
    (tmp_path / "sym.json").write_text(json.dumps(doc))
    with pytest.raises(SymmetryError):
        read_snapshot(tmp_path / "sym.json")


def test_series_columns_and_format(tmp_path):
    p = tmp_path / "e.csv"
    write_series([EnergyReport(0.0, 1.0, 1.0 / 3.0, 0.1, 2.0)], p)
    rows = read_series(p)
    assert list(rows[0]) == ["time", "energy", "modified_energy", "sigma", "h2_norm_vsigma"]
    assert float(rows[0]["modified_energy"]) == 1.0 / 3.0
    assert rows[0]["modified_energy"] == "%.17g" % (1.0 / 3.0)


def test_empty_series_header_only(tmp_path):
    p = tmp_path / "e.csv"
    write_series([], p, header=["t", "x"])
    assert p.read_text() == "t,x\n"
    with pytest.raises(ValueError):
        write_series([], tmp_path / "f.csv")
    with pytest.raises(ValueError):
        write_series([{"a": 1}, {"b": 2}], tmp_path / "g.csv")


def test_series_deterministic(tmp_path):
    rows = [{"t": i * 0.1, "v": np.sin(i)} for i in range(20)]
    write_series(rows, tmp_path / "a.csv")
    write_series(rows, tmp_path / "b.csv")
    assert sha256_file(tmp_path / "a.csv") == sha256_file(tmp_path / "b.csv")


def test_cli_unknown_subcommand():
    assert main(["frobnicate"]) == 2


def test_cli_bad_config_exit_code(tmp_path):
    p = _write(tmp_path, {"params": {"gamma1": 1, "delta1": -1}})
    assert main(["simulate", "--config", str(p), "--out", str(tmp_path / "o"), "--quiet"]) == 2


def test_cli_verify_lemmas_and_reproduce(tmp_path):
    out = tmp_path / "lem"
    assert main(["verify-lemmas", "--config", str(SMOKE), "--out", str(out), "--quiet"]) == 0
    rows = read_series(out / "lemmas.csv")
    assert all(float(r["max_ratio"]) <= 1 for r in rows)
    man = RunManifest.read(out / "manifest.json")
    assert man.passed and man.outputs[0]["path"] == "lemmas.csv"
    assert main(["reproduce", str(out / "manifest.json"), "--quiet"]) == 0
    # tampering with the record makes reproduction fail
    doc = json.loads((out / "manifest.json").read_text())
    doc["outputs"][0]["sha256"] = "0" * 64
    (out / "manifest.json").write_text(json.dumps(doc))
    assert main(["reproduce", str(out / "manifest.json"), "--quiet"]) == 1


def test_cli_simulate_zero_end_time(tmp_path):
    cfg = json.loads(SMOKE.read_text())
    cfg["solver"]["t_end"] = 0.0
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(_write(tmp_path, cfg)), "--out", str(out), "--quiet"]) == 0
    assert len(read_series(out / "trajectory.csv")) == 1
    assert len(list((out / "snapshots").iterdir())) == 1


def test_cli_simulate_columns_and_seed_flag(tmp_path):
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(SMOKE), "--out", str(out), "--seed", "7", "--quiet"]) == 0
    header = (out / "trajectory.csv").read_text().splitlines()[0].split(",")
    assert header == ["time", "E", "E_sigma@0", "E_sigma@0.1", "h2_vsigma@0", "h2_vsigma@0.1", "sigma_est"]
    man = RunManifest.read(out / "manifest.json")
    assert man.config_echo["seed"] == 7
    snap = read_snapshot(out / "snapshots" / "snap_000000.json")
    assert snap.grid == {"n_modes": 128, "length": 32.0}


@pytest.mark.parametrize(
    "cmd",
    [["verify-estimates"], ["almost-conservation"], ["radius-track"], ["continuation", "--t-star", "2"],
     ["picard"], ["energy-identity"], ["calibrate"]],
)
def test_cli_smoke_subcommands(tmp_path, cmd):
    out = tmp_path / "o"
    code = main(cmd + ["--config", str(SMOKE), "--out", str(out), "--quiet"])
    assert code in (0, 1)
    man = RunManifest.read(out / "manifest.json")
    assert man.outputs and all(len(o["sha256"]) == 64 for o in man.outputs)
    assert main(["reproduce", str(out / "manifest.json"), "--quiet"]) == 0


def test_calibration_file_flag(tmp_path):
    cal = _write(tmp_path, {"calibration": {"contraction_c": 0.07}}, "cal.json")
    out = tmp_path / "pic"
    main(["picard", "--config", str(SMOKE), "--calibration", str(cal), "--out", str(out), "--quiet"])
    man = RunManifest.read(out / "manifest.json")
    assert man.calibration["contraction_c"]["value"] == 0.07
