import json

import numpy as np
import pytest

from glauberfock import InvalidArgumentError, dfs_amplitude
from glauberfock import io as gio
from glauberfock.cli import main, resolve_config


def run(*args):
    return main([str(a) for a in args])


class TestDesign:
    def test_paper_lattice(self, tmp_path, capsys):
        assert run("design", "--sites", 59, "--coupling", 0.37, "--out-dir", tmp_path) == 0
        lines = (tmp_path / "geometry.csv").read_text().splitlines()
        assert lines[0] == "n,d_n,position,C_n"
        n, d, pos, c = lines[2].split(",")
        assert n == "1" and float(d) == 23.0 and float(c) == 0.37
        doc = json.loads((tmp_path / "geometry.json").read_text())
        assert doc["feasible"] and doc["max_site"] == 221
        assert len(doc["separations"]) == 58
        assert "feasible" in capsys.readouterr().out

    def test_single_guide(self, tmp_path):
        assert run("design", "--sites", 1, "--out-dir", tmp_path) == 0
        assert json.loads((tmp_path / "geometry.json").read_text())["separations"] == []

    def test_fabrication_limit(self, tmp_path, capsys):
        assert run("design", "--sites", 300, "--coupling", 0.37, "--max-coupling", 5.5, "--out-dir", tmp_path) == 3
        assert "fabrication limit" in capsys.readouterr().err

    def test_infeasible_geometry(self, tmp_path, capsys):
        assert run("design", "--sites", 50, "--d1", 2, "--kappa", 5, "--out-dir", tmp_path) == 3
        assert "separation" in capsys.readouterr().err

    def test_800nm_preset(self, tmp_path):
        assert run("design", "--calibration", "800", "--out-dir", tmp_path) == 0
        doc = json.loads((tmp_path / "geometry.json").read_text())
        assert doc["d1"] == 34.0 and doc["kappa"] == 10.7 and doc["base_coupling"] == 0.36
        assert doc["separations"][1] == pytest.approx(30.292, abs=5e-4)

    def test_geometry_feeds_propagation(self, tmp_path):
        assert run("design", "--sites", 59, "--out-dir", tmp_path / "g") == 0
        assert run("propagate", "--geometry", tmp_path / "g" / "geometry.json", "--input", 0,
                   "--out-dir", tmp_path / "p", "--format", "csv") == 0
        prof = gio.read_csv(tmp_path / "p" / "output_profile.csv", header=True)[:, 1]
        expected = [abs(dfs_amplitude(n, 0, 3.7j)) ** 2 for n in range(50)]
        assert np.abs(prof[:50] - expected).max() < 1e-8


class TestPropagate:
    @pytest.mark.parametrize("k, maxima", [(0, 1), (4, 5)])
    def test_maxima(self, tmp_path, capsys, k, maxima):
        assert run("propagate", "--input", k, "--out-dir", tmp_path) == 0
        doc = json.loads((tmp_path / "intensity_map.json").read_text())
        assert doc["maxima"] == maxima
        assert doc["tail_leakage"] < 1e-6 and not doc["truncation_warning"]
        assert f"{maxima} maxima" in capsys.readouterr().out
        img = gio.read_pgm(tmp_path / "intensity_map.pgm")
        assert img.shape == (201, 59)

    def test_zero_length(self, tmp_path):
        assert run("propagate", "--input", 3, "--length-cm", 0, "--out-dir", tmp_path) == 0
        data = gio.read_csv(tmp_path / "intensity_map.csv", header=True)
        assert data.shape == (1, 60)
        np.testing.assert_allclose(data[0, 1:], np.eye(59)[3], atol=1e-14)

    def test_truncation_warning(self, tmp_path, caplog):
        assert run("propagate", "--sites", 15, "--out-dir", tmp_path) == 0
        assert json.loads((tmp_path / "intensity_map.json").read_text())["truncation_warning"]
        assert "tail leakage" in caplog.text

    def test_out_of_range(self, tmp_path):
        assert run("propagate", "--input", 59, "--out-dir", tmp_path) == 2

    def test_pair_rejected(self, tmp_path):
        assert run("propagate", "--input", "0,1", "--out-dir", tmp_path) == 2

    def test_peak_normalised_csv(self, tmp_path):
        assert run("propagate", "--normalize", "peak", "--out-dir", tmp_path, "--format", "csv") == 0
        assert gio.read_csv(tmp_path / "intensity_map.csv", header=True)[:, 1:].max() == 1.0


class TestCorrelate:
    def test_boson(self, tmp_path):
        assert run("correlate", "--input", "0,1", "--coupling", 0.36, "--out-dir", tmp_path) == 0
        raw = gio.read_csv(tmp_path / "correlation_raw.csv")
        peak = gio.read_csv(tmp_path / "correlation_peak.csv")
        assert raw.shape == (59, 59)
        assert raw.sum() == pytest.approx(2, abs=1e-7)
        assert peak.max() == 1.0
        side = json.loads((tmp_path / "correlation.json").read_text())
        assert side["provenance"] == "ExactBoson"
        assert (side["k"], side["l"], side["z"], side["C1"], side["N"]) == (0, 1, 10.0, 0.36, 59)
        q, r = side["argmax"]
        assert q == r

    def test_fermion(self, tmp_path):
        assert run("correlate", "--state", "fermion", "--input", "0,2", "--out-dir", tmp_path) == 0
        raw = gio.read_csv(tmp_path / "correlation_raw.csv")
        assert np.abs(np.diag(raw)).max() < 1e-20

    def test_noon_minus(self, tmp_path):
        assert run("correlate", "--state", "noon-", "--input", "0,1", "--out-dir", tmp_path) == 0
        side = json.loads((tmp_path / "correlation.json").read_text())
        assert side["provenance"] == "ExactNoonMinus" and side["sign"] == -1

    @pytest.mark.parametrize("state", ["noon+", "fermion"])
    def test_same_site_rejected(self, tmp_path, state):
        assert run("correlate", "--state", state, "--input", "2,2", "--out-dir", tmp_path) == 2

    def test_single_input_rejected(self, tmp_path):
        assert run("correlate", "--input", "0", "--out-dir", tmp_path) == 2


class TestEstimate:
    def test_random(self, tmp_path, capsys):
        assert run("estimate", "--input", "0,1", "--coupling", 0.36, "--phases", 60, "--seed", 1,
                   "--out-dir", tmp_path) == 0
        rep = json.loads((tmp_path / "estimate_report.json").read_text())
        assert rep["plan"]["num_samples"] == 60 and rep["plan"]["seed"] == 1
        assert rep["max_abs_error"] == pytest.approx(0.0019972761342638735, rel=1e-9)
        assert "rms error" in capsys.readouterr().out
        assert (tmp_path / "estimate.pgm").exists() and (tmp_path / "exact.pgm").exists()

    def test_grid_exact(self, tmp_path):
        assert run("estimate", "--input", "0,1", "--phases", "grid:8", "--out-dir", tmp_path) == 0
        rep = json.loads((tmp_path / "estimate_report.json").read_text())
        assert rep["max_abs_error"] < 1e-12

    def test_noon_grid(self, tmp_path):
        assert run("estimate", "--state", "noon-", "--input", "0,1", "--phases", "grid:6", "--out-dir", tmp_path) == 0
        rep = json.loads((tmp_path / "estimate_report.json").read_text())
        assert rep["max_abs_error"] < 1e-12 and rep["reference"]["provenance"] == "ExactNoonMinus"

    def test_noon_aliasing(self, tmp_path, capsys):
        assert run("estimate", "--state", "noon+", "--input", "0,1", "--phases", "grid:4", "--out-dir", tmp_path) == 2
        assert "alias" in capsys.readouterr().err

    def test_jitter_flags(self, tmp_path):
        assert run("estimate", "--input", "0,1", "--phase-jitter", 0.3, "--amplitude-jitter", 0.1,
                   "--out-dir", tmp_path, "--format", "json") == 0
        rep = json.loads((tmp_path / "estimate_report.json").read_text())
        assert rep["plan"]["phase_jitter_std"] == 0.3


class TestConfig:
    def test_precedence(self, tmp_path):
        cfg_file = tmp_path / "run.json"
        cfg_file.write_text(json.dumps({"sites": 30, "coupling": 0.5, "length_cm": 2.0}))
        out = tmp_path / "o"
        assert run("propagate", "--config", cfg_file, "--length-cm", 3.0, "--out-dir", out) == 0
        doc = json.loads((out / "intensity_map.json").read_text())
        assert (doc["N"], doc["C1"], doc["length_cm"]) == (30, 0.5, 3.0)

    def test_unknown_key(self, tmp_path):
        cfg_file = tmp_path / "run.json"
        cfg_file.write_text(json.dumps({"bogus": 1}))
        assert run("propagate", "--config", cfg_file, "--out-dir", tmp_path) == 2

    def test_coupling_and_geometry_exclusive(self):
        with pytest.raises(InvalidArgumentError):
            resolve_config("propagate", {"coupling": 0.4, "geometry": "g.json"})

    def test_bad_format(self, tmp_path):
        assert run("propagate", "--format", "csv,tiff", "--out-dir", tmp_path) == 2

    def test_bad_z_samples(self, tmp_path):
        assert run("propagate", "--z-samples", 0, "--out-dir", tmp_path) == 2

    def test_byte_identical_reruns(self, tmp_path):
        for sub in ("a", "b"):
            assert run("estimate", "--input", "0,2", "--seed", 7, "--out-dir", tmp_path / sub,
                       "--format", "csv,json,pgm,png") == 0
        for name in ("estimate.csv", "exact.csv", "estimate_report.json", "estimate.pgm", "estimate.png"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_reproduce_paper(tmp_path, capsys):
    assert run("reproduce-paper", "--out-dir", tmp_path) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert len(list(tmp_path.iterdir())) == 9


def test_reproduce_paper_detects_drift(tmp_path, capsys):
    fixtures = tmp_path / "fx.json"
    fixtures.write_text(json.dumps({"fig2a": {"intensity_map.csv": "0" * 64}}))
    assert run("reproduce-paper", "--out-dir", tmp_path / "out", "--fixtures", fixtures) == 4
    assert "FAIL" in capsys.readouterr().out
