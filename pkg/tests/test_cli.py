import json

import numpy as np
import pytest

from qmeta.cli import main, run_sweep
from qmeta.config import Config, ConfigError, load_config, parse_config
from qmeta.scenarios import load_state, read_csv

SMALL_PRIME = """
[lattice]
n_total = 600
n_active = 160

[pulses]
A = 0
l = 30
offset = 100

[run]
dt = 0.05
order = 2
stride = 400
"""


@pytest.fixture
def small_cfg(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(SMALL_PRIME)
    return path


def test_defaults_when_no_config():
    cfg = load_config(None)
    assert cfg == Config()
    assert cfg.lattice.layout().n_active == 512
    assert cfg.pulses.k == pytest.approx(2 * np.pi / 25)


def test_parse_overrides():
    cfg = parse_config("[pulses]\nA = 0.1  # weak\nphi0 = 3.14\n[probe]\nomegas = 0.4, 0.7\nstate = reg.csv\n")
    assert cfg.pulses.A == 0.1 and cfg.pulses.phi0 == 3.14
    assert cfg.probe.omegas == (0.4, 0.7)
    assert cfg.probe.state == "reg.csv"
    assert cfg.run == Config().run


@pytest.mark.parametrize(
    "text",
    [
        "[nonsense]\nx = 1\n",
        "[pulses]\nbogus = 1\n",
        "[pulses]\nA = abc\n",
        "[run]\nmode = sideways\n",
        "[run]\norder = 3\n",
        "[medium]\nr = -1\n",
        "[lattice]\nn_active = 5000\n",
        "not an ini file",
    ],
)
def test_bad_config(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")


def test_exit_code_config_error(tmp_path, capsys):
    path = tmp_path / "bad.ini"
    path.write_text("[pulses]\nbogus = 1\n")
    assert main(["bands", "--config", str(path)]) == 2
    assert "bogus" in capsys.readouterr().err


def test_qubit_spectrum_command(tmp_path, capsys):
    assert main(["qubit-spectrum", "--ratio", "4", "--out", str(tmp_path)]) == 0
    line = json.loads(capsys.readouterr().out)
    assert line["epsilon_over_omegaJ"] == pytest.approx(1.9354, abs=1e-3)
    assert (tmp_path / "qubit_spectrum.json").exists()


def test_qubit_spectrum_truncation_exit(capsys):
    assert main(["qubit-spectrum", "--ratio", "200", "--M", "10"]) == 3


def test_bands_command_outputs(tmp_path, capsys):
    assert main(["bands", "--out", str(tmp_path)]) == 0
    meta, header, rows = read_csv(tmp_path / "bands.csv")
    assert header[0] == "k" and "pert_minus" in header
    assert meta["bands.L_m"] == 12.5 and meta["pulses.A"] == 0.18
    assert len(rows) == Config().bands.n_k
    gaps = json.loads((tmp_path / "gaps.json").read_text())
    assert gaps["gaps"][0]["n"] == 1


def test_prime_without_drive_exits_with_numeric_error(small_cfg, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["prime", "--config", str(small_cfg), "--out", str(out)]) == 3
    assert "periodic" in capsys.readouterr().err.lower()
    meta, header, rows = read_csv(out / "populations.csv")
    assert header == ["n", "p1", "abs_c1"]
    assert meta["pulses.A"] == 0.0 and meta["lattice.n_total"] == 600
    assert len(rows) == 160
    assert max(r[1] for r in rows) < 1e-12
    summary = json.loads((out / "summary.json").read_text())
    assert summary["period"] is None and summary["period_error"]


def test_state_roundtrip(small_cfg, tmp_path):
    out = tmp_path / "out"
    main(["prime", "--config", str(small_cfg), "--out", str(out)])
    c0, c1, meta = load_state(out / "state.csv")
    assert len(c0) == 160
    np.testing.assert_array_equal(c0, np.ones(160))
    assert meta["active_start"] == 220


def test_state_file_rejects_other_csv(small_cfg, tmp_path):
    out = tmp_path / "out"
    main(["prime", "--config", str(small_cfg), "--out", str(out)])
    with pytest.raises(ConfigError):
        load_state(out / "populations.csv")
    with pytest.raises(ConfigError):
        load_state(tmp_path / "missing.csv")


def test_reruns_are_bit_identical(small_cfg, tmp_path):
    cfg = load_config(small_cfg).with_section("pulses", A=0.15)
    for name in ("a", "b"):
        path = tmp_path / f"{name}.ini"
        path.write_text(SMALL_PRIME.replace("A = 0", "A = 0.15"))
        main(["prime", "--config", str(path), "--out", str(tmp_path / name)])
    a = (tmp_path / "a" / "fields.csv").read_bytes()
    b = (tmp_path / "b" / "fields.csv").read_bytes()
    assert a == b
    assert cfg.pulses.A == 0.15


def test_sweep_parallel_matches_serial(small_cfg):
    cfg = load_config(small_cfg)
    values = [0.05, 0.1, 0.15]
    serial = run_sweep(cfg, "prime", "pulses.A", values, 1)
    parallel = run_sweep(cfg, "prime", "pulses.A", values, 2)
    assert [r["value"] for r in parallel] == values
    for s, p in zip(serial, parallel):
        assert s["summary"]["max_population"] == p["summary"]["max_population"]
    assert serial[0]["summary"]["max_population"] < serial[2]["summary"]["max_population"]


def test_sweep_rejects_bad_parameters(small_cfg):
    cfg = load_config(small_cfg)
    with pytest.raises(ConfigError):
        run_sweep(cfg, "prime", "pulsesA", [0.1], 1)
    with pytest.raises(ConfigError):
        run_sweep(cfg, "prime", "pulses.nope", [0.1], 1)
    with pytest.raises(ConfigError):
        run_sweep(cfg, "prime", "medium.r", [-1.0], 1)


def test_sweep_command(small_cfg, tmp_path, capsys):
    code = main(["sweep", "--config", str(small_cfg), "--param", "bands.L_m", "--values", "12", "14",
                 "--scenario", "bands", "--out", str(tmp_path)])
    assert code == 0
    data = json.loads((tmp_path / "sweep.json").read_text())
    assert [r["value"] for r in data["results"]] == [12.0, 14.0]
