import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from plasmon_oam.cli import EXIT_CONFIG, EXIT_DOMAIN, run
from plasmon_oam.config import Config, ScanSection, config_from_dict, load_config
from plasmon_oam.errors import ConfigError
from plasmon_oam.pipeline import SCAN_HEADER, reproduce_paper


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def read_csv(text):
    return list(csv.reader(io.StringIO(text)))


class TestConfig:
    def test_defaults_are_measured_values(self):
        cfg = load_config(None)
        assert cfg.eta == {-1: 0.0151, 0: 0.0325, 1: 0.0182}
        assert cfg.signal_projector.displacement == 0.5

    def test_round_trip(self):
        cfg = load_config(None, ["scan.n_points=51", "eta.0=0.5", "run.rng_seed=9"])
        assert config_from_dict(json.loads(cfg.dumps())) == cfg

    @given(
        st.floats(1e-3, 1), st.floats(1e-3, 1), st.floats(1e-3, 1), st.floats(0, 1),
        st.integers(3, 500), st.integers(0, 2**63), st.sampled_from([-1, 1]), st.floats(-3, 3),
    )
    def test_round_trip_property(self, e1, e2, e3, eps, n, seed, fork, disp):
        data = {
            "eta": {"-1": e1, "0": e2, "1": e3},
            "epsilon_noise": eps,
            "scan": {"d_min": -2.5, "d_max": 1.5, "n_points": n},
            "run": {"pair_rate": 1500.0, "integration_time": 2.0, "rng_seed": seed},
            "signal_projector": {"fork": fork, "displacement": disp},
        }
        cfg = config_from_dict(data)
        assert config_from_dict(json.loads(cfg.dumps())) == cfg
        assert cfg.digest() == config_from_dict(json.loads(cfg.dumps())).digest()

    @pytest.mark.parametrize(
        "data",
        [
            {"colour": 1},
            {"scan": {"n_points": 3, "width": 2}},
            {"eta": {"0": 0.0, "-1": 0.1, "1": 0.1}},
            {"eta": {"zero": 0.1}},
            {"epsilon_noise": 1.5},
            {"scan": {"n_points": 2}},
            {"scan": {"d_min": 1.0, "d_max": -1.0}},
            {"run": {"pair_rate": -5}},
            {"signal_projector": {"fork": 2}},
            {"l_max": 2},
            {"scan": {"n_points": "many"}},
        ],
    )
    def test_rejects(self, data):
        with pytest.raises(ConfigError):
            config_from_dict(data)

    def test_missing_file_names_path(self, tmp_path):
        missing = tmp_path / "nope.json"
        with pytest.raises(ConfigError, match="nope.json"):
            load_config(missing)

    def test_bad_override(self):
        with pytest.raises(ConfigError):
            load_config(None, ["scan.n_points"])

    def test_digest_tracks_content(self):
        assert Config().digest() != Config(scan=ScanSection(n_points=11)).digest()


class TestScanCommand:
    def test_three_points(self, capsys):
        assert run(["scan", "--set", "scan.n_points=3", "--set", "scan.d_min=-1", "--set", "scan.d_max=1"]) == 0
        rows = read_csv(capsys.readouterr().out)
        assert rows[0] == SCAN_HEADER
        assert [float(r[0]) for r in rows[1:]] == [-1.0, 0.0, 1.0]

    def test_missing_config(self, tmp_path, capsys):
        assert run(["scan", "--config", str(tmp_path / "absent.json")]) == EXIT_CONFIG
        assert "absent.json" in capsys.readouterr().err

    def test_full_noise_is_flat(self, capsys):
        assert run(["scan", "--set", "epsilon_noise=1", "--set", "scan.n_points=21"]) == 0
        probs = np.array([float(r[1]) for r in read_csv(capsys.readouterr().out)[1:]])
        assert np.ptp(probs) < 1e-9

    def test_rate_column(self, capsys):
        run(["scan", "--set", "scan.n_points=5", "--set", "run.pair_rate=100"])
        for row in read_csv(capsys.readouterr().out)[1:]:
            assert float(row[2]) == pytest.approx(100 * float(row[1]))
            assert int(row[3]) >= 0

    def test_seed_flag(self, capsys):
        run(["scan", "--seed", "1", "--set", "scan.n_points=9"])
        a = capsys.readouterr().out
        run(["scan", "--seed", "2", "--set", "scan.n_points=9"])
        b = capsys.readouterr().out
        assert a != b

    def test_lf_line_endings(self, tmp_path):
        assert run(["scan", "--set", "scan.n_points=5", "--out", str(tmp_path)]) == 0
        raw = (tmp_path / "scan.csv").read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")


class TestDesignFilterCommand:
    def test_paper_state_with_plate_cap(self, capsys):
        assert run(["design-filter", "--cap", "0.0325"]) == 0
        out = json.loads(capsys.readouterr().out)["filter"]
        assert max(out["eta"].values()) == pytest.approx(0.0325)
        assert out["output_state"]["entropy_nats"] == pytest.approx(np.log(3), abs=1e-9)

    def test_cap_zero_rejected(self):
        assert run(["design-filter", "--cap", "0"]) == EXIT_CONFIG

    def test_domain_error_exit_code(self, tmp_path):
        # the l_max=2 embedding has no |+-2> terms, so no filter can equalize it
        cfg = write_config(tmp_path, {"l_max": 2, "eta": {str(l): 0.5 for l in range(-2, 3)}})
        assert run(["design-filter", "--config", str(cfg)]) == EXIT_DOMAIN


class TestModeMatrixCommand:
    def test_pattern(self, capsys):
        assert run(["mode-matrix", "--state", "after"]) == 0
        rows = read_csv(capsys.readouterr().out)[1:]
        for l1, l2, p, _ in rows:
            if int(l1) + int(l2) != 0:
                assert float(p) < 1e-12


class TestReproduceCommand:
    def test_bundle(self):
        data = reproduce_paper(Config()).data
        amps = data["states"]["after"]["pair_amplitudes"]
        assert amps["0,0"] == pytest.approx(0.8897, abs=0.01)
        assert amps["-1,1"] == pytest.approx(0.3488, abs=0.01)
        assert amps["1,-1"] == pytest.approx(0.2954, abs=0.01)
        assert data["scans"]["before"]["visibility_expected"] == pytest.approx(0.977, abs=1e-3)
        assert data["scans"]["after"]["visibility_expected"] == pytest.approx(0.976, abs=1e-3)
        assert data["dip_shift"] != 0
        assert data["metadata"]["config_hash"] == Config().digest()

    def test_unit_transmission_leaves_state_alone(self):
        cfg = config_from_dict({"eta": {"-1": 1, "0": 1, "1": 1}})
        data = reproduce_paper(cfg).data
        np.testing.assert_allclose(
            data["states"]["after"]["amplitudes_real"], data["states"]["before"]["amplitudes_real"], atol=1e-12
        )

    def test_byte_identical_outputs(self, tmp_path):
        cfg = write_config(tmp_path, {"scan": {"n_points": 41}})
        for out in ("a", "b"):
            assert run(["reproduce-paper", "--config", str(cfg), "--out", str(tmp_path / out)]) == 0
        names = sorted(p.name for p in (tmp_path / "a").iterdir())
        assert names == [
            "bundle.json", "fig3_mode_matrix_before.csv", "fig4_scan_before.csv",
            "fig5_mode_matrix_after.csv", "fig6_scan_after.csv",
        ]
        for name in names:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_floats_round_trip(self, tmp_path):
        bundle = reproduce_paper(config_from_dict({"scan": {"n_points": 21}}))
        table = bundle.tables["fig4_scan_before"]
        parsed = read_csv(table.to_csv())[1:]
        for row, text in zip(table.rows, parsed):
            assert float(text[1]) == row[1]
