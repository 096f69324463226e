import json

import numpy as np
import pytest

from gipulse.errors import InvalidInputError
from gipulse.fileio import read_gifr, read_timeseries, write_gifr, write_timeseries
from gipulse.signal_core import TimeSeries


def test_timeseries_roundtrip(tmp_path):
    x = TimeSeries(np.sin(np.arange(100) * 0.3) + 1e-4, 30.0)
    p = write_timeseries(tmp_path / "x.csv", x)
    lines = p.read_text().splitlines()
    assert lines[0] == "t,value"
    assert lines[2].split(",")[0] == "0.0333333333"
    assert json.loads((tmp_path / "x.json").read_text()) == {"fs_hz": 30.0, "n": 100}
    y = read_timeseries(p)
    assert y.fs == 30.0
    np.testing.assert_allclose(y.samples, x.samples, rtol=1e-8, atol=1e-12)


def test_fs_inferred_without_sidecar(tmp_path):
    x = TimeSeries(np.arange(50.0), 24.0)
    p = write_timeseries(tmp_path / "x.csv", x, sidecar=False)
    assert read_timeseries(p).fs == pytest.approx(24.0, rel=1e-8)


def test_bad_header(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("time,v\n0,1\n")
    with pytest.raises(InvalidInputError):
        read_timeseries(p)


def test_gifr_roundtrip(tmp_path):
    stack = np.random.default_rng(0).random((3, 4, 5)).astype(np.float32)
    p = write_gifr(tmp_path / "s.gifr", stack, 30.0)
    raw = p.read_bytes()
    header = json.loads(raw[: raw.index(b"\n")])
    assert header == {"magic": "GIFR", "version": 1, "width": 5, "height": 4,
                      "frames": 3, "fs_hz": 30.0, "dtype": "f32le"}
    assert len(raw) - raw.index(b"\n") - 1 == 4 * 60
    back, fs = read_gifr(p)
    assert fs == 30.0
    np.testing.assert_array_equal(back, stack)
    # frame-major, row-major little-endian float32
    assert np.frombuffer(raw[raw.index(b"\n") + 1:][:4], "<f4")[0] == stack[0, 0, 0]
    assert np.frombuffer(raw[-4:], "<f4")[0] == stack[2, 3, 4]


def test_gifr_single_image(tmp_path):
    back, fs = read_gifr(write_gifr(tmp_path / "i.gifr", np.eye(3), 0))
    assert back.shape == (1, 3, 3) and fs == 0


def test_gifr_truncated(tmp_path):
    p = write_gifr(tmp_path / "s.gifr", np.ones((2, 2, 2)), 1.0)
    p.write_bytes(p.read_bytes()[:-4])
    with pytest.raises(InvalidInputError):
        read_gifr(p)
