"""Manifest parsing, pair loading, and patch sampling determinism."""

import json

import numpy as np
import pytest
import torch

from deblurnet import (DataFileError, PatchDataset, load_pair, read_manifest,
                       split_records, write_pfm, write_png)
from deblurnet.data import to_tensor

from conftest import build_toy_dataset


class TestManifest:
    def test_round_trip(self, tiny_manifest):
        records = read_manifest(tiny_manifest)
        assert len(records) == 8
        assert {r.split for r in records} == {"train", "val", "test"}
        assert all(r.blurred_path.endswith(".png") for r in records)
        assert sorted({r.sequence_length for r in records}) == [9, 13]

    def test_split_filter(self, tiny_manifest):
        records = read_manifest(tiny_manifest)
        train = split_records(records, "train")
        assert len(train) == 6
        assert all(r.split == "train" for r in train)
        assert split_records(records, "holdout") == []

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataFileError):
            read_manifest(tmp_path / "absent.jsonl")

    def test_empty_manifest(self, tmp_path):
        p = tmp_path / "m.jsonl"
        p.write_text("\n\n")
        with pytest.raises(DataFileError):
            read_manifest(p)

    def test_garbage_line(self, tmp_path):
        p = tmp_path / "m.jsonl"
        p.write_text("{not json}\n")
        with pytest.raises(DataFileError):
            read_manifest(p)

    def test_missing_field(self, tmp_path):
        p = tmp_path / "m.jsonl"
        p.write_text(json.dumps({"pair_id": "x"}) + "\n")
        with pytest.raises(DataFileError):
            read_manifest(p)


class TestLoadPair:
    def test_prefers_linear_twins(self, tmp_path):
        root = build_toy_dataset(tmp_path, 2, splits=(1.0, 1.0)).parent
        rec = read_manifest(root / "manifest.jsonl")[0]
        # PFM twins hold the authoritative values: corrupt the PNG and the
        # loaded pair must not change
        blur, sharp = load_pair(root, rec)
        write_png(root / rec.blurred_path, np.zeros_like(blur))
        blur2, _ = load_pair(root, rec)
        assert np.array_equal(blur, blur2)

    def test_falls_back_to_png_pair(self, tmp_path):
        root = build_toy_dataset(tmp_path, 2, splits=(1.0, 1.0),
                                 write_pfm_twins=False).parent
        rec = read_manifest(root / "manifest.jsonl")[0]
        blur, sharp = load_pair(root, rec)
        assert blur.shape == sharp.shape
        assert blur.shape[2] == 3
        # 8-bit quantization grid
        assert np.allclose(blur * 255, np.round(blur * 255), atol=1e-9)

    def test_half_missing_twin_uses_png_for_both(self, tmp_path):
        root = build_toy_dataset(tmp_path, 2, splits=(1.0, 1.0)).parent
        rec = read_manifest(root / "manifest.jsonl")[0]
        (root / rec.sharp_path).with_suffix(".pfm").unlink()
        blur, _ = load_pair(root, rec)
        assert np.allclose(blur * 255, np.round(blur * 255), atol=1e-9)

    def test_shape_mismatch_rejected(self, tmp_path):
        root = build_toy_dataset(tmp_path, 2, splits=(1.0, 1.0)).parent
        rec = read_manifest(root / "manifest.jsonl")[0]
        write_pfm((root / rec.sharp_path).with_suffix(".pfm"),
                  np.zeros((8, 8, 3), dtype=np.float32))
        with pytest.raises(DataFileError):
            load_pair(root, rec)

    def test_grayscale_pfm_promoted(self, tmp_path):
        root = build_toy_dataset(tmp_path, 2, splits=(1.0, 1.0)).parent
        rec = read_manifest(root / "manifest.jsonl")[0]
        gray = np.random.default_rng(0).uniform(0, 1, size=(32, 32)).astype(np.float32)
        write_pfm((root / rec.blurred_path).with_suffix(".pfm"), gray)
        blur, _ = load_pair(root, rec)
        assert blur.shape == (32, 32, 3)
        assert np.array_equal(blur[:, :, 0], blur[:, :, 2])


class TestToTensor:
    def test_layout_and_dtype(self):
        img = np.random.default_rng(1).uniform(0, 1, size=(5, 7, 3))
        t = to_tensor(img)
        assert t.shape == (3, 5, 7)
        assert t.dtype == torch.float32
        assert float(t[2, 4, 6]) == pytest.approx(img[4, 6, 2], abs=1e-7)


class TestPatchDataset:
    def make(self, root, **kw):
        records = split_records(read_manifest(root / "manifest.jsonl"), "train")
        defaults = dict(patch_size=16, samples_per_epoch=8, noise_sigma_max=0.0, seed=3)
        defaults.update(kw)
        return PatchDataset(root, records, **defaults)

    def test_deterministic_per_index(self, tmp_path):
        root = build_toy_dataset(tmp_path, 3, splits=(1.0, 1.0)).parent
        a, b = self.make(root), self.make(root)
        for i in range(4):
            xa, ya = a[i]
            xb, yb = b[i]
            assert torch.equal(xa, xb) and torch.equal(ya, yb)

    def test_epoch_changes_samples(self, tmp_path):
        root = build_toy_dataset(tmp_path, 3, splits=(1.0, 1.0)).parent
        ds = self.make(root)
        x0, _ = ds[0]
        ds.set_epoch(1)
        x1, _ = ds[0]
        assert not torch.equal(x0, x1)

    def test_patch_shape_and_alignment(self, tmp_path):
        root = build_toy_dataset(tmp_path, 3, splits=(1.0, 1.0)).parent
        ds = self.make(root, noise_sigma_max=0.0)
        noisy, sharp = ds[2]
        assert noisy.shape == sharp.shape == (3, 16, 16)
        # with zero noise the input patch must be a verbatim crop: the pair
        # stays aligned because blur and sharp use the same window
        assert float(noisy.min()) >= 0.0 and float(noisy.max()) <= 1.0

    def test_fixed_noise_level(self, tmp_path):
        root = build_toy_dataset(tmp_path, 2, size=64, splits=(1.0, 1.0)).parent
        ds = self.make(root, patch_size=48, noise_sigma_max=6.0, noise_fixed=True)
        clean = self.make(root, patch_size=48, noise_sigma_max=0.0)
        sigmas = []
        for i in range(6):
            noisy, _ = ds[i]
            ref, _ = clean[i]
            diff = (noisy - ref).numpy().ravel()
            sigmas.append(diff.std() * 255)
        # clipping at [0,1] shaves a little off the nominal level
        assert np.mean(sigmas) == pytest.approx(6.0, rel=0.2)

    def test_uniform_noise_varies_per_sample(self, tmp_path):
        root = build_toy_dataset(tmp_path, 2, size=64, splits=(1.0, 1.0)).parent
        ds = self.make(root, patch_size=48, noise_sigma_max=9.0)
        clean = self.make(root, patch_size=48, noise_sigma_max=0.0)
        sigmas = []
        for i in range(12):
            noisy, _ = ds[i]
            ref, _ = clean[i]
            sigmas.append(float((noisy - ref).numpy().std() * 255))
        assert max(sigmas) - min(sigmas) > 2.0
        assert min(sigmas) < 4.0 and max(sigmas) > 5.0

    def test_patch_larger_than_image_rejected(self, tmp_path):
        root = build_toy_dataset(tmp_path, 2, splits=(1.0, 1.0)).parent
        with pytest.raises(DataFileError):
            self.make(root, patch_size=64)

    def test_empty_records_rejected(self, tmp_path):
        root = build_toy_dataset(tmp_path, 2, splits=(1.0, 1.0)).parent
        with pytest.raises(DataFileError):
            PatchDataset(root, [], patch_size=8, samples_per_epoch=4)

    def test_length_is_samples_per_epoch(self, tmp_path):
        root = build_toy_dataset(tmp_path, 2, splits=(1.0, 1.0)).parent
        assert len(self.make(root, samples_per_epoch=13)) == 13
