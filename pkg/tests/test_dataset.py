"""Dataset synthesis: windows, splits, manifests, determinism."""
import numpy as np
import pytest

from chromacode import (
    CameraCoding,
    CodingKind,
    DataError,
    DatasetConfig,
    GridSpec,
    Manifest,
    ValidationError,
    assign_splits,
    build_dataset,
    coding_fingerprint,
    expected_pair_count,
    pair_seed,
    read_png,
    verify_manifest,
    write_png,
)

FAST_GRID = GridSpec(pupil_samples=64, pad_factor=2, psf_crop=33)


def fast_config(**kw):
    base = dict(sequence_lengths=(9,), noise_sigmas=(0.0, 3.0), seed=0,
                grid=FAST_GRID)
    base.update(kw)
    return DatasetConfig(**base)


@pytest.fixture(scope="module")
def frame_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("frames")
    rng = np.random.default_rng(42)
    for video, n_frames in (("alpha", 12), ("bravo", 9), ("charlie", 10), ("delta", 7)):
        vdir = root / video
        vdir.mkdir()
        base = rng.uniform(0.2, 0.8, size=(40, 56, 3))
        for k in range(n_frames):
            frame = np.clip(base + 0.02 * k, 0.0, 1.0)
            frame[5 + k: 9 + k, 10:20] = 0.9  # a feature that moves frame to frame
            write_png(vdir / f"f{k:04d}.png", frame)
    return root


class TestConfig:
    def test_unsupported_length_rejected(self):
        with pytest.raises(ValidationError):
            DatasetConfig(sequence_lengths=(8,))

    def test_split_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            DatasetConfig(split=(0.5, 0.2, 0.2))

    def test_default_stride_is_length(self):
        cfg = DatasetConfig(sequence_lengths=(7, 13))
        assert cfg.stride_for(7) == 7
        assert cfg.stride_for(13) == 13
        assert DatasetConfig(stride=2).stride_for(9) == 2


class TestCounting:
    def test_single_window(self):
        cfg = fast_config(noise_sigmas=(0.0,))
        assert expected_pair_count(cfg, [9]) == 1

    def test_sliding_windows(self):
        cfg = fast_config(noise_sigmas=(0.0,), stride=1)
        assert expected_pair_count(cfg, [100]) == 92

    def test_short_video_contributes_nothing(self):
        cfg = fast_config(noise_sigmas=(0.0,))
        assert expected_pair_count(cfg, [8]) == 0

    def test_full_grid_of_cells(self):
        cfg = fast_config(sequence_lengths=(7, 9, 11, 13), noise_sigmas=(0.0, 1.0, 2.0, 3.0),
                          stride=1)
        per_len = sum((20 - L) // 1 + 1 for L in (7, 9, 11, 13))
        assert expected_pair_count(cfg, [20]) == per_len * 4


class TestSeedsAndFingerprints:
    def test_pair_seed_deterministic_and_distinct(self):
        a = pair_seed(0, "vid", 3, 9, 0.0)
        assert a == pair_seed(0, "vid", 3, 9, 0.0)
        others = [pair_seed(0, "vid", 3, 9, 1.0), pair_seed(0, "vid", 4, 9, 0.0),
                  pair_seed(1, "vid", 3, 9, 0.0), pair_seed(0, "div", 3, 9, 0.0)]
        assert a not in others
        assert 0 <= a < 2 ** 63

    def test_fingerprint_tracks_pixel_shaping_config(self):
        base = fast_config()
        assert coding_fingerprint(base) == coding_fingerprint(fast_config())
        assert coding_fingerprint(base) != coding_fingerprint(fast_config(gamma=1.8))
        flutter = fast_config(coding=CameraCoding(kind=CodingKind.FLUTTER))
        assert coding_fingerprint(base) != coding_fingerprint(flutter)
        assert coding_fingerprint(base) != coding_fingerprint(
            fast_config(grid=GridSpec(32, 2, 17)))


class TestAssignSplits:
    def test_every_video_assigned_once(self):
        names = [f"v{i}" for i in range(10)]
        out = assign_splits(names, (0.8, 0.1, 0.1), seed=0)
        assert sorted(out) == sorted(names)
        counts = {s: list(out.values()).count(s) for s in ("train", "val", "test")}
        assert counts == {"train": 8, "val": 1, "test": 1}

    def test_largest_remainder_ties_go_to_earlier_split(self):
        out = assign_splits(["a", "b", "c", "d"], (0.8, 0.1, 0.1), seed=0)
        counts = [list(out.values()).count(s) for s in ("train", "val", "test")]
        assert counts == [3, 1, 0]

    def test_deterministic_in_seed(self):
        names = [f"v{i}" for i in range(6)]
        assert assign_splits(names, (0.5, 0.25, 0.25), 3) == \
            assign_splits(names, (0.5, 0.25, 0.25), 3)
        assert assign_splits(names, (0.5, 0.25, 0.25), 3) != \
            assign_splits(names, (0.5, 0.25, 0.25), 4)


class TestBuildDataset:
    def test_build_matches_count_formula(self, frame_root, tmp_path):
        cfg = fast_config()
        manifest = build_dataset(frame_root, cfg, tmp_path / "out")
        # delta (7 frames) is too short for L=9 and is skipped
        assert len(manifest.records) == expected_pair_count(cfg, [12, 9, 10, 7]) == 6
        assert manifest.skipped_windows == 2
        assert manifest.errors == []

    def test_sharp_is_middle_frame(self, frame_root, tmp_path):
        cfg = fast_config(noise_sigmas=(0.0,))
        out = tmp_path / "out"
        manifest = build_dataset(frame_root, cfg, out)
        rec = next(r for r in manifest.records if r["source_video"] == "bravo")
        sharp = read_png(out / rec["sharp_path"])
        middle = read_png(frame_root / "bravo" / "f0004.png")
        np.testing.assert_array_equal(sharp, middle)

    def test_pair_id_format_and_manifest_fields(self, frame_root, tmp_path):
        cfg = fast_config()
        manifest = build_dataset(frame_root, cfg, tmp_path / "out")
        rec = sorted(manifest.records, key=lambda r: r["pair_id"])[0]
        assert rec["pair_id"] == "alpha_f00000_L9_s0"
        assert set(rec) == {"pair_id", "source_video", "first_frame_index",
                            "sequence_length", "sigma", "split", "blurred_path",
                            "sharp_path", "coding_fingerprint", "seed"}
        assert rec["blurred_path"].endswith(f"blur/{rec['pair_id']}.png")

    def test_rebuild_is_bit_identical(self, frame_root, tmp_path):
        cfg = fast_config()
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        man_a = build_dataset(frame_root, cfg, out_a)
        man_b = build_dataset(frame_root, cfg, out_b)
        assert man_a.records == man_b.records
        for rec in man_a.records:
            for key in ("blurred_path", "sharp_path"):
                assert (out_a / rec[key]).read_bytes() == (out_b / rec[key]).read_bytes()

    def test_pfm_linear_copies_written(self, frame_root, tmp_path):
        cfg = fast_config(noise_sigmas=(0.0,))
        out = tmp_path / "out"
        manifest = build_dataset(frame_root, cfg, out)
        rec = manifest.records[0]
        assert (out / rec["blurred_path"].replace(".png", ".pfm")).is_file()
        assert (out / rec["sharp_path"].replace(".png", ".pfm")).is_file()

    def test_grayscale_video_promoted_to_rgb(self, tmp_path):
        root = tmp_path / "frames"
        (root / "mono").mkdir(parents=True)
        rng = np.random.default_rng(0)
        for k in range(9):
            write_png(root / "mono" / f"f{k}.png", rng.uniform(0.3, 0.7, size=(32, 32)))
        out = tmp_path / "out"
        manifest = build_dataset(root, fast_config(noise_sigmas=(0.0,)), out)
        assert len(manifest.records) == 1
        assert read_png(out / manifest.records[0]["blurred_path"]).shape == (32, 32, 3)

    def test_missing_root_raises(self, tmp_path):
        with pytest.raises(DataError):
            build_dataset(tmp_path / "nowhere", fast_config(), tmp_path / "out")


class TestVerifyManifest:
    def test_fresh_build_passes(self, frame_root, tmp_path):
        cfg = fast_config()
        out = tmp_path / "out"
        build_dataset(frame_root, cfg, out)
        report = verify_manifest(out / "manifest.jsonl", out,
                                 frame_root=frame_root, config=cfg)
        assert report["ok"]
        assert report["violations"] == []
        assert report["n_records"] == 6
        assert report["n_regenerated"] >= 1

    def test_deleted_file_is_one_violation(self, frame_root, tmp_path):
        cfg = fast_config()
        out = tmp_path / "out"
        manifest = build_dataset(frame_root, cfg, out)
        victim = out / manifest.records[0]["blurred_path"]
        victim.unlink()
        report = verify_manifest(out / "manifest.jsonl", out)
        assert not report["ok"]
        missing = [v for v in report["violations"] if "missing file" in v]
        assert len(missing) == 1

    def test_split_leak_detected(self, frame_root, tmp_path):
        cfg = fast_config(noise_sigmas=(0.0, 3.0))
        out = tmp_path / "out"
        manifest = build_dataset(frame_root, cfg, out)
        # claim one of alpha's pairs belongs to val while its sibling stays put
        doctored = [dict(r) for r in manifest.records]
        alpha = [r for r in doctored if r["source_video"] == "alpha"]
        alpha[0]["split"] = "val"
        Manifest(records=doctored).write(out / "manifest.jsonl")
        report = verify_manifest(out / "manifest.jsonl", out)
        leaks = [v for v in report["violations"] if "leak" in v]
        assert len(leaks) == 1

    def test_duplicate_pair_id_detected(self, frame_root, tmp_path):
        cfg = fast_config(noise_sigmas=(0.0,))
        out = tmp_path / "out"
        manifest = build_dataset(frame_root, cfg, out)
        doctored = manifest.records + [dict(manifest.records[0])]
        Manifest(records=doctored).write(out / "manifest.jsonl")
        report = verify_manifest(out / "manifest.jsonl", out)
        assert any("duplicate" in v for v in report["violations"])

    def test_fingerprint_mismatch_detected(self, frame_root, tmp_path):
        cfg = fast_config()
        out = tmp_path / "out"
        build_dataset(frame_root, cfg, out)
        other = fast_config(gamma=1.8)
        report = verify_manifest(out / "manifest.jsonl", out,
                                 frame_root=frame_root, config=other)
        assert any("fingerprint" in v for v in report["violations"])

    def test_missing_manifest_raises(self, tmp_path):
        with pytest.raises(DataError):
            verify_manifest(tmp_path / "none.jsonl", tmp_path)
