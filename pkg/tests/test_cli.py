import os
import stat

import numpy as np
import pytest

from levicool.cli import main
from levicool.config import parse_config
from levicool.errors import ConfigurationError, DomainError


class TestParseConfig:
    def test_empty_document_gives_defaults(self):
        cfg = parse_config("")
        assert cfg.geometry.r_a == 50e-9
        assert cfg.geometry.r_b == 25e-9
        assert cfg.geometry.density == 2200.0
        assert cfg.beam.power == 0.1
        assert cfg.environment.pressure == 1e-3
        assert cfg.units_mode == "normalized"

    def test_none_document_gives_defaults(self):
        assert parse_config(None).beam.waist == 0.6e-6

    def test_unknown_key_named_in_error(self):
        with pytest.raises(ConfigurationError, match="wavelenght"):
            parse_config("beam:\n  wavelenght: 1.5e-6\n")

    def test_oblate_particle_rejected(self):
        with pytest.raises(DomainError):
            parse_config("particle:\n  r_a_m: 20.0e-9\n  r_b_m: 40.0e-9\n")

    def test_override_keys_mapped(self):
        cfg = parse_config("overrides:\n  omega_theta_rad_s: 1.0e6\n  nbar_y: 12.0\n")
        assert cfg.overrides == {"omega_theta": 1.0e6, "nbar_y": 12.0}

    def test_bad_override_key(self):
        with pytest.raises(ConfigurationError, match="overrides.omega_tehta_rad_s"):
            parse_config("overrides:\n  omega_tehta_rad_s: 1.0e6\n")

    def test_type_errors_have_paths(self):
        with pytest.raises(ConfigurationError, match="beam.power_w"):
            parse_config("beam:\n  power_w: strong\n")

    def test_hash_stable_and_sensitive(self):
        a = parse_config("")
        b = parse_config("beam:\n  power_w: 0.1\n")
        c = parse_config("beam:\n  power_w: 0.2\n")
        assert a.config_hash() == b.config_hash()
        assert a.config_hash() != c.config_hash()


class TestCliExitCodes:
    def test_schema_violation_exits_2(self, tmp_path):
        cfg = tmp_path / "bad.yaml"
        cfg.write_text("beam:\n  wavelenght: 1.5e-6\n")
        assert main(["--config", str(cfg), "--out", str(tmp_path / "o"), "derive"]) == 2

    def test_invariant_violation_exits_3(self, tmp_path):
        cfg = tmp_path / "bad.yaml"
        cfg.write_text("particle:\n  r_a_m: 20.0e-9\n  r_b_m: 40.0e-9\n")
        assert main(["--config", str(cfg), "--out", str(tmp_path / "o"), "derive"]) == 3

    def test_unwritable_output_exits_5(self, tmp_path):
        blocked = tmp_path / "blocked"
        blocked.mkdir()
        blocked.chmod(stat.S_IRUSR | stat.S_IXUSR)
        try:
            (blocked / "probe").write_text("")
        except OSError:
            pass
        else:
            (blocked / "probe").unlink()
            blocked.chmod(0o755)
            pytest.skip("running with privileges that ignore file modes")
        try:
            assert main(["--out", str(blocked / "sub"), "derive"]) == 5
        finally:
            blocked.chmod(0o755)


@pytest.fixture(scope="module")
def fast_config(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "fast.yaml"
    path.write_text(
        "sweep:\n"
        "  axis_1: {name: omega_1, start: 0.02, stop: 0.1, count: 4}\n"
        "  axis_2: {name: omega_2, start: 0.02, stop: 0.1, count: 4}\n"
        "drive: {omega_1: 0.05, omega_2: 0.025, delta_1: -0.1, delta_2: -0.1}\n"
        "dynamics: {t_final: 2.0e4, samples: 64}\n"
        "coefficients: {count: 10}\n"
        "cooling:\n"
        "  pressures_pa: [1.0e-3]\n"
        "  axis: {name: delta, start: -7.0e-4, stop: 7.0e-4, count: 11, log: false}\n"
    )
    return str(path)


class TestCliArtifacts:
    def test_derive_outputs(self, tmp_path, fast_config):
        out = tmp_path / "derive"
        assert main(["--config", fast_config, "--out", str(out), "derive"]) == 0
        report = (out / "mode_params.txt").read_text()
        assert "omega_theta" in report and "reference-value comparison" in report
        csv = (out / "coefficients.csv").read_text().splitlines()
        assert csv[0].startswith("# config_sha256=")
        assert csv[1] == "r_b_m,eta_theta,eta_y,eta_thetay,eta_1,eta_2,eta_3"
        assert len(csv) == 2 + 10

    def test_steady_report(self, tmp_path, fast_config):
        out = tmp_path / "steady"
        assert main(["--config", fast_config, "--out", str(out), "steady"]) == 0
        report = (out / "branches.txt").read_text()
        assert "branches found: 1" in report
        assert "stability = stable" in report

    def test_sweep_blue_blue_all_single(self, tmp_path, fast_config):
        out = tmp_path / "sweep"
        assert main(["--config", fast_config, "--out", str(out), "sweep"]) == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        assert lines[1] == "axis1,axis2,branch_count,branch_idx,n_theta,n_y,stability"
        rows = [ln.split(",") for ln in lines[2:]]
        assert len(rows) == 16
        assert all(r[2] == "1" for r in rows)
        assert all(r[6] == "stable" for r in rows)

    def test_dynamics_trajectory(self, tmp_path, fast_config):
        out = tmp_path / "dynamics"
        assert main(["--config", fast_config, "--out", str(out), "dynamics"]) == 0
        lines = (out / "trajectory.csv").read_text().splitlines()
        assert lines[1] == "t,re_beta_theta,im_beta_theta,re_beta_y,im_beta_y"
        assert len(lines) == 2 + 64

    def test_cooling_csv(self, tmp_path, fast_config):
        out = tmp_path / "cooling"
        assert main(["--config", fast_config, "--out", str(out), "cooling"]) == 0
        lines = (out / "cooling.csv").read_text().splitlines()
        assert (
            lines[1]
            == "axis_value,pressure_pa,delta,gamma_fb,eta_tilde,n_theta_out,n_y_out,xi"
        )
        xis = np.array([float(ln.split(",")[-1]) for ln in lines[2:]])
        assert len(xis) == 11
        assert np.all(xis > 0) and np.all(xis <= 1.0)

    def test_cooling_without_coupling_gives_unity_ratio(self, tmp_path):
        cfg = tmp_path / "nc.yaml"
        cfg.write_text(
            "overrides: {eta_thetay_rad_s: 0.0}\n"
            "drive: {omega_1: 0.05, omega_2: 0.025, delta_1: -0.1, delta_2: -0.1}\n"
            "cooling:\n"
            "  axis: {name: delta, start: -1.0e-4, stop: 1.0e-4, count: 5, log: false}\n"
        )
        out = tmp_path / "out"
        assert main(["--config", str(cfg), "--out", str(out), "cooling"]) == 0
        lines = (out / "cooling.csv").read_text().splitlines()
        assert all(ln.split(",")[-1] == "1" for ln in lines[2:])

    def test_oracle_report(self, tmp_path):
        cfg = tmp_path / "oracle.yaml"
        cfg.write_text("oracle:\n  truncation: [8, 8]\n")
        out = tmp_path / "oracle"
        assert main(["--config", str(cfg), "--out", str(out), "--seed", "3", "oracle"]) == 0
        report = (out / "oracle_report.txt").read_text()
        assert "overall: pass" in report


class TestDeterminism:
    def test_sweep_csv_identical_across_worker_counts(self, tmp_path, fast_config):
        out1 = tmp_path / "w1"
        out8 = tmp_path / "w8"
        assert main(["--config", fast_config, "--out", str(out1), "--workers", "1", "sweep"]) == 0
        assert main(["--config", fast_config, "--out", str(out8), "--workers", "8", "sweep"]) == 0
        assert (out1 / "sweep.csv").read_bytes() == (out8 / "sweep.csv").read_bytes()
