import csv
import io
import json
import math

import numpy as np
import pytest

from gibbs import models as M
from gibbs.cli import main
from gibbs.lie import GalileanAlgebraElement
from gibbs.oracle.integrate import gof_statistic


@pytest.fixture
def config(tmp_path):
    def write(obj, name="cfg.json"):
        path = tmp_path / name
        path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
        return str(path)

    return write


def _table(text):
    return list(csv.DictReader(io.StringIO(text)))


IDEAL = {"model": "ideal_gas", "volume": 1.0, "masses": [1.0, 2.0]}


def test_thermo_ideal_gas_energy(config, capsys):
    assert main(["thermo", "--config", config(IDEAL), "--b-min", "0.5", "--b-max", "5", "--steps", "10"]) == 0
    rows = _table(capsys.readouterr().out)
    assert len(rows) == 10
    assert list(rows[0]) == ["b", "T", "log_p", "energy", "entropy", "var_h", "status"]
    for row in rows:
        b = float(row["b"])
        assert float(row["energy"]) == pytest.approx(3 * 2 / (2 * b), rel=1e-12)
        assert float(row["T"]) == pytest.approx(1 / b, rel=1e-15)
        assert float(row["var_h"]) == pytest.approx(3 * 2 / (2 * b * b), rel=1e-6)
        assert row["status"] == "ok"


def test_thermo_boltzmann_constant(config, capsys):
    cfg = dict(IDEAL, boltzmann_constant=2.0)
    assert main(["thermo", "--config", config(cfg), "--b", "0.25"]) == 0
    assert float(_table(capsys.readouterr().out)[0]["T"]) == pytest.approx(2.0)


def test_thermo_solid_dulong_petit(config, capsys):
    # one frequency per one-dimensional oscillator: 2 atoms, 3N = 6 entries
    cfg = {"model": "solid", "frequencies": [0.3, 1.0, 2.0, 5.0, 5.0, 7.5]}
    assert main(["thermo", "--config", config(cfg), "--b-min", "0.2", "--b-max", "4", "--steps", "7"]) == 0
    for row in _table(capsys.readouterr().out):
        assert float(row["energy"]) * float(row["b"]) == pytest.approx(3 * 2, rel=1e-12)


def test_thermo_marks_inadmissible_rows(config, capsys):
    assert main(["thermo", "--config", config(IDEAL), "--b-min", "-1", "--b-max", "1", "--steps", "3"]) == 0
    rows = _table(capsys.readouterr().out)
    assert [r["status"] for r in rows] == ["inadmissible", "inadmissible", "ok"]
    assert math.isnan(float(rows[0]["log_p"]))


def test_thermo_sphere_ray(config, capsys):
    cfg = {"model": "sphere", "radius": 1.5, "omega": [0, 0, 2.0]}
    assert main(["thermo", "--config", config(cfg), "--b", "0.7"]) == 0
    row = _table(capsys.readouterr().out)[0]
    b = 0.7 * np.array([0, 0, 2.0])
    assert float(row["log_p"]) == pytest.approx(M.sphere_log_partition(M.SphereSpec(1.5), b), rel=1e-14)
    assert math.isnan(float(row["T"]))


def test_thermo_writes_file(config, tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["thermo", "--config", config(IDEAL), "--b", "1", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert len(out.read_text().splitlines()) == 2


@pytest.mark.parametrize("argv", [
    ["--b-min", "1", "--b-max", "2", "--steps", "0"],
    ["--b-min", "2", "--b-max", "1"],
    ["--b-min", "1"],
])
def test_thermo_bad_grid(config, capsys, argv):
    assert main(["thermo", "--config", config(IDEAL)] + argv) == 2
    assert "gibbs thermo:" in capsys.readouterr().err


@pytest.mark.parametrize("bad", [
    "{not json",
    {"model": "plasma"},
    {"model": "ideal_gas", "volume": 1.0},
    {"model": "ideal_gas", "volume": -1.0, "masses": [1.0]},
    {"model": "sphere", "radius": 1.0, "omega": [1, 2]},
    [1, 2, 3],
])
def test_malformed_config_exits_2(config, capsys, bad):
    assert main(["thermo", "--config", config(bad), "--b", "1"]) == 2


def test_missing_config_file_exits_2(tmp_path):
    assert main(["thermo", "--config", str(tmp_path / "nope.json"), "--b", "1"]) == 2


def test_bad_flags_exit_2(config):
    with pytest.raises(SystemExit) as exc:
        main(["thermo", "--config", config(IDEAL), "--n", "-5"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_verify_ideal_gas_passes(config, capsys):
    assert main(["verify", "--config", config(IDEAL)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) >= 5 and all(line.startswith("PASS") for line in lines)


def test_verify_detects_injected_bias(config, capsys):
    assert main(["verify", "--config", config(IDEAL), "--inject-bias", "0.01"]) == 1
    out = capsys.readouterr().out
    assert "FAIL b=1 closed form vs quadrature" in out


def test_verify_photon_gas(config, capsys):
    cfg = {"model": "photon_gas", "volume": 2.0, "light_speed": 1.0}
    assert main(["verify", "--config", config(cfg), "--b", "0.8"]) == 0
    out = capsys.readouterr().out
    assert "PASS b=0.80000000000000004 energy vs finite difference" in out
    assert "photon number variance" in out


@pytest.mark.parametrize("cfg", [
    {"model": "gravity_gas", "section_area": 1.0, "height": 2.0, "gravity": 1.0, "masses": [1.0]},
    {"model": "relativistic_gas", "volume": 1.0, "masses": [1.0]},
    {"model": "solid", "frequencies": [1.0, 2.0]},
    {"model": "sphere", "radius": 1.0, "omega": [0.3, 0.4, 1.0]},
])
def test_verify_other_models(config, capsys, cfg):
    assert main(["verify", "--config", config(cfg), "--n", "50000"]) == 0, capsys.readouterr().out


def test_verify_inadmissible_exits_2(config):
    assert main(["verify", "--config", config(IDEAL), "--b", "-1"]) == 2


def test_sample_deterministic(config, tmp_path):
    cfg = config({"model": "relativistic_gas", "volume": 1.0, "masses": [1.0, 2.0]})
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sample", "--config", cfg, "--b", "1", "--seed", "42", "--n", "500", "--out", str(a)]) == 0
    assert main(["sample", "--config", cfg, "--b", "1", "--seed", "42", "--n", "500", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    main(["sample", "--config", cfg, "--b", "1", "--seed", "43", "--n", "500", "--out", str(c)])
    assert a.read_bytes() != c.read_bytes()


def test_sample_juttner_row_count(config, tmp_path):
    cfg = config({"model": "relativistic_gas", "volume": 1.0, "masses": [1.0]})
    out = tmp_path / "j.csv"
    assert main(["sample", "--config", cfg, "--b", "1", "--n", "10000", "--out", str(out)]) == 0
    rows = _table(out.read_text())
    assert len(rows) == 10_000
    assert {r["particle_id"] for r in rows} == {"0"}


def test_sample_centrifuge_passes_gof(config, tmp_path):
    cfg = {"model": "vessel", "height": 1.0, "cylinder_radius": 1.0, "masses": [1.0],
           "omega": [0, 0, 2.0], "epsilon": -1.0}
    out = tmp_path / "v.csv"
    assert main(["sample", "--config", config(cfg), "--b", "1", "--n", "100000", "--out", str(out)]) == 0
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    radius = np.hypot(data[:, 2], data[:, 3])
    spec = M.VesselSpec(M.VesselGeometry("cylinder", 1.0, radius=1.0), (1.0,))
    b = GalileanAlgebraElement([0, 0, 2.0], np.zeros(3), np.zeros(3), -1.0)
    res = gof_statistic(radius, lambda d: M.centrifuge_radial_density(spec, b, 0, d), 20, support=(0, 1))
    assert res.p_value > 0.01
    # and the uniform-radius alternative is rejected
    area = gof_statistic(radius, lambda d: 2 * d, 20, support=(0, 1))
    assert area.p_value < 1e-3


def test_sample_photon_unsupported(config, capsys):
    assert main(["sample", "--config", config({"model": "photon_gas", "volume": 1.0}), "--b", "1"]) == 2


def test_sample_needs_single_b(config):
    assert main(["sample", "--config", config(IDEAL), "--b-min", "1", "--b-max", "2"]) == 2


def _equilibrate(config, capsys, cfg):
    assert main(["equilibrate", "--config", config(cfg)]) == 0
    return {k: float(v) for k, v in _table(capsys.readouterr().out)[0].items()}


def test_equilibrate_identical_gases(config, capsys):
    gas = {"model": "ideal_gas", "volume": 1.0, "masses": [1.0]}
    row = _equilibrate(config, capsys, {"model_a": gas, "model_b": gas, "b_a": 1.0, "b_b": 3.0})
    assert row["b_prime"] == pytest.approx(1.5, rel=1e-10)
    assert row["T_prime"] == pytest.approx(1 / 1.5, rel=1e-10)
    assert row["energy_transferred"] == pytest.approx(1.5 - 1.0, rel=1e-9)


def test_equilibrate_equal_b_zero_transfer(config, capsys):
    gas = {"model": "ideal_gas", "volume": 1.0, "masses": [1.0]}
    row = _equilibrate(config, capsys, {"model_a": gas, "model_b": gas, "b_a": 2.0, "b_b": 2.0})
    assert row["b_prime"] == pytest.approx(2.0, rel=1e-12)
    assert row["energy_transferred"] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("b_a,b_b", [(0.5, 4.0), (4.0, 0.5)])
def test_equilibrate_transfer_sign(config, capsys, b_a, b_b):
    a = {"model": "solid", "frequencies": [1.0, 2.0, 3.0]}
    b = {"model": "ideal_gas", "volume": 1.0, "masses": [1.0, 1.0]}
    row = _equilibrate(config, capsys, {"model_a": a, "model_b": b, "b_a": b_a, "b_b": b_b})
    assert min(b_a, b_b) < row["b_prime"] < max(b_a, b_b)
    assert row["energy_transferred"] > 0


def test_equilibrate_rejects_bad_input(config):
    gas = {"model": "ideal_gas", "volume": 1.0, "masses": [1.0]}
    assert main(["equilibrate", "--config", config({"model_a": gas, "b_a": 1.0, "b_b": 2.0})]) == 2
    assert main(["equilibrate", "--config", config({"model_a": gas, "model_b": gas, "b_a": -1.0, "b_b": 2.0})]) == 2
    sphere = {"model": "sphere", "radius": 1.0}
    assert main(["equilibrate", "--config", config({"model_a": sphere, "model_b": gas, "b_a": 1.0, "b_b": 2.0})]) == 2


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "gibbs", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "equilibrate" in res.stdout
