import json
import os

import numpy as np
import pytest

from glauberfock import FieldState, InvalidArgumentError, build_glauber_fock_profile, coupling_matrix, intensity_map
from glauberfock import io as gio
from glauberfock.figures import png_bytes


@pytest.fixture
def imap():
    m = coupling_matrix(build_glauber_fock_profile(6, 0.5))
    return intensity_map(m, FieldState.single_site(6, 1), np.linspace(0, 4, 5))


def test_intensity_csv_layout(tmp_path, imap):
    path = gio.write_intensity_csv(tmp_path / "map.csv", imap)
    lines = path.read_text().splitlines()
    assert lines[0] == "z,site_0,site_1,site_2,site_3,site_4,site_5"
    assert len(lines) == 6
    first = lines[1].split(",")
    assert first[0] == "0.00000000e+00"
    # 9 significant digits in scientific notation
    assert all(len(v.split("e")[0].replace("-", "").replace(".", "")) == 9 for v in first)
    back = gio.read_csv(path, header=True)
    np.testing.assert_allclose(back[:, 1:], imap.intensities, rtol=1e-8, atol=1e-300)


def test_matrix_csv_round_trip(tmp_path):
    m = np.random.default_rng(0).random((4, 4))
    back = gio.read_csv(gio.write_matrix_csv(tmp_path / "m.csv", m))
    np.testing.assert_allclose(back, m, rtol=5e-9)


def test_signed_zero_is_normalised():
    assert gio._fmt(-0.0) == gio._fmt(0.0)


@pytest.mark.parametrize("bits", [8, 16])
def test_pgm_round_trip(tmp_path, bits):
    x = np.array([[0.0, 0.5, 1.0], [2.0, 1.0, 0.0]])
    path = gio.write_pgm(tmp_path / "x.pgm", x, bits=bits)
    raw = path.read_bytes()
    maxval = (1 << bits) - 1
    assert raw.startswith(f"P5\n3 2\n{maxval}\n".encode())
    img = gio.read_pgm(path)
    assert img.shape == (2, 3)
    assert img.max() == maxval and img[1, 0] == maxval
    assert img[0, 2] == round(maxval / 2)


def test_pgm_row_scaling():
    x = np.array([[1.0, 2.0], [10.0, 5.0]])
    gray = gio.to_gray(x, scale="row")
    np.testing.assert_array_equal(gray, [[128, 255], [255, 128]])


def test_pgm_clips_negative_and_gamma():
    gray = gio.to_gray([[-1.0, 0.25, 1.0]], gamma=2.0)
    np.testing.assert_array_equal(gray, [[0, 128, 255]])


@pytest.mark.parametrize("kwargs", [dict(bits=12), dict(scale="log"), dict(gamma=0)])
def test_pgm_rejects(kwargs):
    with pytest.raises(InvalidArgumentError):
        gio.to_gray([[1.0]], **kwargs)


def test_json_is_sorted_and_stable(tmp_path):
    doc = {"b": np.float64(1.5), "a": np.arange(3)}
    path = gio.write_json(tmp_path / "d.json", doc)
    assert json.loads(path.read_text()) == {"a": [0, 1, 2], "b": 1.5}
    assert path.read_bytes() == gio.json_bytes(doc)


def test_atomic_write_leaves_no_temp(tmp_path):
    gio.atomic_write(tmp_path / "sub" / "f.bin", b"abc")
    assert os.listdir(tmp_path / "sub") == ["f.bin"]
    assert oct(os.stat(tmp_path / "sub" / "f.bin").st_mode & 0o777) == "0o644"


def test_png_deterministic():
    x = np.outer(np.arange(5.0), np.arange(5.0))
    a = png_bytes(x)
    assert a[:8] == b"\x89PNG\r\n\x1a\n"
    assert a == png_bytes(x)
