import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gpesolve.cli import EXIT_BLOWUP, EXIT_INVALID, EXIT_IO, EXIT_NONCONVERGENCE, EXIT_OK, main, run_experiment
from gpesolve.config import ConfigError, load_config, parse_config
from gpesolve.grid import read_field, write_field

MINIMAL = """
mode: groundstate
grid: {a: -16, b: 16, M: 256}
model: {dimension: 1, beta: 0}
"""

EVOLVE = """
mode: evolve
grid: {a: -16, b: 16, M: 256}
model: {dimension: 1, beta: 10}
initial: {type: groundstate, x0: 0.5}
groundstate: {tol: 1.0e-10}
evolve: {tau: 1.0e-3, T: 1.0, stride: 10}
"""


def write(tmp_path, text, name="run.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


class TestParse:
    def test_minimal_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.mode == "groundstate"
        assert cfg.grid.M == (256,)
        assert cfg.model.beta == 0 and cfg.model.epsilon == 1
        r = cfg.resolved
        assert r["groundstate"]["tau"] > 0 and r["groundstate"]["tol"] == 1e-6
        assert r["groundstate"]["backend"] == "spectral"
        assert r["output"]["dtype"] == "complex128"
        assert r["model"]["gamma_y"] == 1.0 and r["model"]["dimension"] == 1

    def test_default_grid(self):
        cfg = parse_config("mode: groundstate\nmodel: {dimension: 2, beta: 50}\n")
        assert cfg.grid.dim == 2
        assert cfg.resolved["grid"]["M"][0] == cfg.grid.M[0]

    def test_three_dimensional_focusing_rejected(self):
        with pytest.raises(ConfigError) as info:
            parse_config("mode: groundstate\nmodel: {dimension: 3, beta: -1}\n")
        assert any("d=3" in e and "beta < 0" in e for e in info.value.errors)

    def test_fast_rotation_rejected(self):
        with pytest.raises(ConfigError) as info:
            parse_config("mode: groundstate-rotating\nmodel: {dimension: 2, beta: 10, omega: 1.2}\n")
        assert any("omega" in e for e in info.value.errors)

    def test_all_errors_collected(self):
        text = """
mode: evolve-dipolar
colour: blue
grid: {a: -4, b: 4, M: 32, spacing: 1}
model: {dimension: 3, beta: 1, flavour: up}
"""
        with pytest.raises(ConfigError) as info:
            parse_config(text)
        errs = info.value.errors
        assert any("'colour'" in e for e in errs)
        assert any("'grid.spacing'" in e for e in errs)
        assert any("'model.flavour'" in e for e in errs)
        assert any("model.dipole" in e for e in errs)
        assert any("'evolve'" in e for e in errs)

    def test_mode_conflict(self):
        with pytest.raises(ConfigError):
            parse_config(MINIMAL, mode="evolve")

    def test_missing_file_reference(self, tmp_path):
        text = MINIMAL.replace("mode: groundstate", "mode: evolve") + \
            "evolve: {tau: 0.01, T: 0.1}\ninitial: {type: file, path: nowhere.field}\n"
        with pytest.raises(ConfigError) as info:
            parse_config(text, base_dir=tmp_path)
        assert any("does not exist" in e for e in info.value.errors)

    def test_beta_and_kappa_exclusive(self):
        with pytest.raises(ConfigError):
            parse_config("mode: groundstate\nmodel: {dimension: 1, beta: 1, kappa: 1}\n")

    def test_not_yaml(self):
        with pytest.raises(ConfigError):
            parse_config("mode: [unclosed")

    @given(st.text(alphabet="abcdefghijklmnopqrstuvwxyz_", min_size=1, max_size=12))
    def test_unknown_top_level_key_named(self, key):
        if key in ("mode", "grid", "model", "groundstate", "evolve", "initial", "bdg", "convergence", "output"):
            return
        with pytest.raises(ConfigError) as info:
            parse_config(MINIMAL + f"{key}: 1\n")
        assert any(f"'{key}'" in e for e in info.value.errors)


@pytest.mark.parametrize("path", sorted((Path(__file__).parents[1] / "configs").glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_configs_parse(path):
    cfg = load_config(path)
    assert cfg.resolved["mode"] == cfg.mode


class TestRun:
    def test_groundstate_energy(self, tmp_path):
        code, summary = run_experiment(parse_config(MINIMAL), tmp_path)
        assert code == EXIT_OK
        assert summary["results"]["E_g"] == pytest.approx(0.5, abs=1e-6)
        saved = json.loads((tmp_path / "summary.json").read_text())
        assert saved["config"] == json.loads(json.dumps(parse_config(MINIMAL).resolved))
        g, phi = read_field(tmp_path / "ground_state.field")
        assert phi.shape == (257,)

    def test_evolve_rows(self, tmp_path):
        code, _ = run_experiment(parse_config(EVOLVE), tmp_path)
        assert code == EXIT_OK
        rows = read_csv(tmp_path / "observables.csv")
        assert len(rows) - 1 == 101
        assert float(rows[-1][0]) == pytest.approx(1.0)

    def test_convergence_order(self, tmp_path):
        text = EVOLVE.replace("mode: evolve", "mode: convergence-study")
        code, summary = run_experiment(parse_config(text), tmp_path)
        assert code == EXIT_OK
        assert summary["results"]["order"] == pytest.approx(2.0, abs=0.1)
        assert summary["results"]["spatial_below_temporal"]
        assert len(read_csv(tmp_path / "convergence.csv")) == 3

    def test_bdg(self, tmp_path):
        text = MINIMAL.replace("mode: groundstate", "mode: bdg").replace("M: 256", "M: 128") + \
            "groundstate: {tol: 1.0e-12}\n"
        code, summary = run_experiment(parse_config(text), tmp_path)
        assert code == EXIT_OK
        np.testing.assert_allclose(summary["results"]["frequencies"][:3], [1, 2, 3], atol=1e-8)
        assert (tmp_path / "modes.csv").exists()

    def test_cgpe_fields(self, tmp_path):
        text = """
mode: evolve-cgpe
grid: {a: -8, b: 8, M: 64}
model: {dimension: 1, spin_orbit: {k0: 1.0, rabi: 0.5, beta11: 5, beta12: 4, beta22: 5}}
initial: {type: linear, fractions: [0.7, 0.3]}
evolve: {tau: 1.0e-3, T: 0.1, stride: 50}
"""
        code, summary = run_experiment(parse_config(text), tmp_path)
        assert code == EXIT_OK
        assert summary["results"]["mass_drift"] <= 1e-12
        assert (tmp_path / "final_2.field").exists()

    def test_non_convergence_code(self, tmp_path):
        text = MINIMAL + "groundstate: {max_iter: 3, tol: 1.0e-14}\n"
        code, summary = run_experiment(parse_config(text), tmp_path)
        assert code == EXIT_NONCONVERGENCE
        assert summary["status"] == "non-convergence"

    def test_blow_up_code(self, tmp_path):
        text = """
mode: evolve
grid: {a: -8, b: 8, M: 64}
model: {dimension: 1, beta: 10}
initial: {type: plane-wave, A: .nan}
evolve: {tau: 1.0e-3, T: 0.01, stride: 1}
"""
        code, summary = run_experiment(parse_config(text), tmp_path)
        assert code == EXIT_BLOWUP
        assert summary["status"] == "blow-up"

    def test_file_initial_grid_mismatch(self, tmp_path):
        other = parse_config(MINIMAL.replace("M: 256", "M: 128"))
        write_field(tmp_path / "psi.field", other.grid, np.zeros(other.grid.shape, complex))
        text = EVOLVE.replace("{type: groundstate, x0: 0.5}", "{type: file, path: psi.field}")
        cfg = parse_config(text, base_dir=tmp_path)
        code, summary = run_experiment(cfg, tmp_path / "out")
        assert code == EXIT_INVALID

    def test_io_failure(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code, _ = run_experiment(parse_config(MINIMAL), blocker / "sub")
        assert code == EXIT_IO


class TestMain:
    def test_bad_config_exit(self, tmp_path, capsys):
        p = write(tmp_path, "mode: groundstate\nmodel: {dimension: 3, beta: -2}\n")
        assert main(["groundstate", "--config", str(p), "--out", str(tmp_path / "o")]) == EXIT_INVALID
        assert "beta < 0" in capsys.readouterr().err

    def test_missing_config_exit(self, tmp_path):
        assert main(["groundstate", "--config", str(tmp_path / "absent.yaml")]) == EXIT_IO

    def test_deterministic_reruns_identical(self, tmp_path):
        p = write(tmp_path, EVOLVE)
        for name in ("a", "b"):
            assert main(["evolve", "--config", str(p), "--out", str(tmp_path / name), "--deterministic"]) == 0
        for art in ("summary.json", "observables.csv", "final.field"):
            assert (tmp_path / "a" / art).read_bytes() == (tmp_path / "b" / art).read_bytes()
        assert "wall_time_s" not in json.loads((tmp_path / "a" / "summary.json").read_text())

    def test_module_entry_point(self, tmp_path):
        p = write(tmp_path, MINIMAL)
        proc = subprocess.run([sys.executable, "-m", "gpesolve", "groundstate", "--config", str(p),
                               "--out", str(tmp_path / "o"), "--deterministic"], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert json.loads((tmp_path / "o" / "summary.json").read_text())["status"] == "ok"
