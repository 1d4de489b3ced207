"""PNG / PFM / JSON round trips."""
import numpy as np
import pytest

from chromacode import (
    DataError,
    read_json,
    read_pfm,
    read_png,
    write_json,
    write_pfm,
    write_png,
)


class TestPng:
    def test_rgb_8bit_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        img = np.round(rng.uniform(size=(12, 17, 3)) * 255) / 255.0
        path = tmp_path / "a.png"
        write_png(path, img)
        back = read_png(path)
        assert back.shape == (12, 17, 3)
        np.testing.assert_allclose(back, img, atol=1e-12)

    def test_gray_8bit_roundtrip(self, tmp_path):
        img = np.linspace(0, 1, 64).reshape(8, 8)
        img = np.round(img * 255) / 255.0
        path = tmp_path / "g.png"
        write_png(path, img)
        np.testing.assert_allclose(read_png(path), img, atol=1e-12)

    def test_gray_16bit_roundtrip(self, tmp_path):
        img = np.round(np.linspace(0, 1, 64).reshape(8, 8) * 65535) / 65535.0
        path = tmp_path / "g16.png"
        write_png(path, img, bits=16)
        np.testing.assert_allclose(read_png(path), img, atol=1e-12)

    def test_rgb_16bit_rejected(self, tmp_path):
        with pytest.raises(DataError):
            write_png(tmp_path / "x.png", np.zeros((4, 4, 3)), bits=16)

    def test_values_clipped(self, tmp_path):
        img = np.array([[-0.5, 0.5], [1.5, 1.0]])
        path = tmp_path / "c.png"
        write_png(path, img)
        back = read_png(path)
        assert back[0, 0] == 0.0
        assert back[1, 0] == 1.0

    def test_quantization_is_round_not_floor(self, tmp_path):
        img = np.full((2, 2), 254.6 / 255.0)
        path = tmp_path / "q.png"
        write_png(path, img)
        assert read_png(path)[0, 0] == pytest.approx(1.0)


class TestPfm:
    def test_rgb_roundtrip_exact_float32(self, tmp_path):
        rng = np.random.default_rng(1)
        img = rng.normal(size=(9, 13, 3)).astype(np.float32).astype(np.float64)
        path = tmp_path / "a.pfm"
        write_pfm(path, img)
        back = read_pfm(path)
        assert back.shape == (9, 13, 3)
        np.testing.assert_array_equal(back.astype(np.float32), img.astype(np.float32))

    def test_gray_roundtrip(self, tmp_path):
        img = np.arange(20.0).reshape(4, 5)
        path = tmp_path / "g.pfm"
        write_pfm(path, img)
        back = read_pfm(path)
        assert back.shape == (4, 5)
        np.testing.assert_array_equal(back, img)

    def test_preserves_out_of_range_values(self, tmp_path):
        # unlike PNG, PFM must hold raw radiometric values
        img = np.array([[-3.0, 12.5], [0.0, 1e6]])
        path = tmp_path / "r.pfm"
        write_pfm(path, img)
        np.testing.assert_array_equal(read_pfm(path), img)

    def test_header_little_endian(self, tmp_path):
        path = tmp_path / "h.pfm"
        write_pfm(path, np.zeros((2, 3, 3)))
        raw = path.read_bytes()
        assert raw.startswith(b"PF\n3 2\n")

    def test_missing_file_raises_data_error(self, tmp_path):
        with pytest.raises(DataError):
            read_pfm(tmp_path / "absent.pfm")


class TestJson:
    def test_roundtrip(self, tmp_path):
        payload = {"b": [1, 2, 3], "a": {"nested": 0.5}}
        path = tmp_path / "p.json"
        write_json(path, payload)
        assert read_json(path) == payload

    def test_keys_sorted_on_disk(self, tmp_path):
        path = tmp_path / "s.json"
        write_json(path, {"zebra": 1, "aardvark": 2})
        text = path.read_text()
        assert text.index("aardvark") < text.index("zebra")
