import struct

import numpy as np
import pytest

from specsynth.io import (read_mask_png, read_pfm, read_png, read_tensor,
                          write_mask_png, write_pfm, write_png, write_tensor)


class TestTensorFormat:
    @pytest.mark.parametrize("shape", [(7,), (3, 5), (4, 6, 3), (2, 3, 4, 5)])
    def test_roundtrip(self, tmp_path, rng, shape):
        arr = rng.standard_normal(shape).astype(np.float32)
        path = tmp_path / "t.urtd"
        write_tensor(path, arr)
        back = read_tensor(path)
        assert back.shape == arr.shape
        assert np.array_equal(back, arr)

    def test_header_layout(self, tmp_path):
        arr = np.arange(6, dtype=np.float32).reshape(2, 3)
        path = tmp_path / "t.urtd"
        write_tensor(path, arr)
        blob = path.read_bytes()
        assert blob[:4] == b"URTD"
        assert blob[4] == 2           # rank
        assert blob[5] == 0           # dtype code f32
        assert len(blob) == 16 + 2 * 4 + 6 * 4
        dims = struct.unpack("<2I", blob[16:24])
        assert dims == (2, 3)
        payload = np.frombuffer(blob[24:], dtype="<f4")
        assert np.array_equal(payload.reshape(2, 3), arr)

    def test_rejects_bad_magic(self, tmp_path):
        path = tmp_path / "bad.urtd"
        path.write_bytes(b"NOPE" + b"\x00" * 20)
        with pytest.raises(ValueError):
            read_tensor(path)


class TestPfm:
    def test_roundtrip_orientation(self, tmp_path):
        depth = np.arange(12, dtype=np.float32).reshape(3, 4) + 0.5
        path = tmp_path / "d.pfm"
        write_pfm(path, depth)
        back = read_pfm(path)
        assert np.array_equal(back, depth)

    def test_header(self, tmp_path):
        depth = np.ones((2, 3), dtype=np.float32)
        path = tmp_path / "d.pfm"
        write_pfm(path, depth)
        blob = path.read_bytes()
        assert blob.startswith(b"Pf\n3 2\n-1.0\n")

    def test_rejects_color_pfm(self, tmp_path):
        path = tmp_path / "c.pfm"
        path.write_bytes(b"PF\n2 2\n-1.0\n" + b"\x00" * 48)
        with pytest.raises(ValueError):
            read_pfm(path)


class TestPng:
    def test_rgb8_roundtrip(self, tmp_path, rng):
        img = rng.integers(0, 256, size=(9, 7, 3)).astype(np.uint8)
        path = tmp_path / "a.png"
        write_png(path, img)
        assert np.array_equal(read_png(path), img)

    def test_rgb16_roundtrip(self, tmp_path, rng):
        img = rng.integers(0, 65536, size=(5, 6, 3)).astype(np.uint16)
        path = tmp_path / "a16.png"
        write_png(path, img)
        assert np.array_equal(read_png(path), img)

    def test_mask_roundtrip(self, tmp_path, rng):
        mask = rng.uniform(size=(11, 13)) < 0.4
        path = tmp_path / "m.png"
        write_mask_png(path, mask)
        assert np.array_equal(read_mask_png(path), mask)

    def test_deterministic_bytes(self, tmp_path, rng):
        img = rng.integers(0, 256, size=(16, 16, 3)).astype(np.uint8)
        p1, p2 = tmp_path / "x.png", tmp_path / "y.png"
        write_png(p1, img)
        write_png(p2, img)
        assert p1.read_bytes() == p2.read_bytes()

    def test_missing_file(self, tmp_path):
        with pytest.raises(IOError):
            read_png(tmp_path / "nope.png")
