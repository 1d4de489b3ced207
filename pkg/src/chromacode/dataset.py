"""Coded-blur dataset synthesis from directories of sharp video frames.

Layout: frame_root/<video>/<frame>.png in lexicographic frame order. Each
configured window length slides over every video; each window is collapsed
by code_exposure once per noise level. Outputs land in
out_root/{train,val,test}/{blur,sharp}/{pair_id}.png with linear-light PFM
copies next to the PNGs, plus a JSON-Lines manifest at out_root/manifest.jsonl.

Determinism: the per-pair noise seed is derived by hashing
(global seed, video, first frame, length, sigma), so rebuilds are
bit-identical regardless of traversal or worker order, and any single pair
can be regenerated from its manifest record alone.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coding import CameraCoding, CodingKind
from .errors import DataError, DomainError, ValidationError
from .fileio import read_png, write_pfm, write_png
from .optics import GridSpec
from .simulate import DEFAULT_GAMMA, FrameSequence, code_exposure, decode_display

ALLOWED_LENGTHS = (7, 9, 11, 13)
SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class DatasetConfig:
    sequence_lengths: tuple[int, ...] = (9,)
    noise_sigmas: tuple[float, ...] = (0.0,)
    stride: int | None = None  # None: per-length stride = length (no overlap)
    split: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0
    gamma: float = DEFAULT_GAMMA
    coding: CameraCoding = field(default_factory=lambda: CameraCoding(kind=CodingKind.SWEEP))
    grid: GridSpec = GridSpec()

    def __post_init__(self):
        for n in self.sequence_lengths:
            if n not in ALLOWED_LENGTHS:
                raise ValidationError(
                    f"sequence length {n} not in the supported set {ALLOWED_LENGTHS}"
                )
        if any(s < 0 for s in self.noise_sigmas):
            raise DomainError("noise sigmas must be non-negative")
        if self.stride is not None and self.stride < 1:
            raise ValidationError("stride must be >= 1")
        if abs(sum(self.split) - 1.0) > 1e-9 or any(f < 0 for f in self.split):
            raise ValidationError("split fractions must be non-negative and sum to 1")
        if self.gamma <= 0:
            raise DomainError("gamma must be positive")

    def stride_for(self, length: int) -> int:
        return self.stride if self.stride is not None else length


@dataclass
class Manifest:
    """One record per pair; written as JSON Lines in pair_id order."""

    records: list[dict] = field(default_factory=list)
    skipped_windows: int = 0
    errors: list[str] = field(default_factory=list)

    def write(self, path: str | os.PathLike) -> None:
        import json
        with open(path, "w") as f:
            for rec in sorted(self.records, key=lambda r: r["pair_id"]):
                f.write(json.dumps(rec, sort_keys=True) + "\n")

    @classmethod
    def read(cls, path: str | os.PathLike) -> "Manifest":
        import json
        try:
            with open(path) as f:
                records = [json.loads(line) for line in f if line.strip()]
        except FileNotFoundError as exc:
            raise DataError(f"manifest not found: {path}") from exc
        return cls(records=records)


def coding_fingerprint(config: DatasetConfig) -> str:
    """Stable hash of everything that shapes pixel values, so a manifest can
    detect being verified against the wrong configuration."""
    c = config.coding
    text = "|".join([
        c.kind.value, c.flutter_code, f"{c.v_max_px_per_exposure:g}",
        f"{c.psi_range[0]:g}:{c.psi_range[1]:g}",
        repr(c.mask.rings), f"{c.mask.reference_wavelength_nm:g}",
        f"{config.gamma:g}",
        f"{config.grid.pupil_samples}:{config.grid.pad_factor}:{config.grid.psf_crop}",
    ])
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def pair_seed(global_seed: int, video: str, first: int, length: int, sigma: float) -> int:
    text = f"{global_seed}|{video}|{first}|{length}|{sigma:g}"
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def list_videos(frame_root: str | os.PathLike) -> list[tuple[str, list[Path]]]:
    root = Path(frame_root)
    if not root.is_dir():
        raise DataError(f"frame root {root} is not a directory")
    videos = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        frames = sorted(p for p in sub.iterdir()
                        if p.suffix.lower() in (".png", ".jpg", ".jpeg"))
        if frames:
            videos.append((sub.name, frames))
    if not videos:
        raise DataError(f"no video subdirectories with frames under {root}")
    return videos


def assign_splits(video_names: list[str], split: tuple[float, float, float],
                  seed: int) -> dict[str, str]:
    """Split by source video. Counts use largest-remainder rounding with ties
    going to the earlier split (train first), so one video lands in train."""
    rng = np.random.default_rng(seed)
    order = list(rng.permutation(sorted(video_names)))
    n = len(order)
    raw = [f * n for f in split]
    counts = [int(np.floor(r)) for r in raw]
    remainders = sorted(range(3), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in remainders[: n - sum(counts)]:
        counts[i] += 1
    out = {}
    cursor = 0
    for split_name, count in zip(SPLITS, counts):
        for name in order[cursor:cursor + count]:
            out[name] = split_name
        cursor += count
    return out


def expected_pair_count(config: DatasetConfig, frames_per_video: list[int]) -> int:
    """Closed-form count: sum over videos and lengths of
    max(0, floor((n - L)/stride) + 1) times the number of noise levels."""
    total = 0
    for n in frames_per_video:
        for length in config.sequence_lengths:
            stride = config.stride_for(length)
            if n >= length:
                total += (n - length) // stride + 1
    return total * len(config.noise_sigmas)


def build_dataset(frame_root: str | os.PathLike, config: DatasetConfig,
                  out_root: str | os.PathLike) -> Manifest:
    """Synthesize every (window, sigma) pair and write images + manifest."""
    out = Path(out_root)
    videos = list_videos(frame_root)
    membership = assign_splits([name for name, _ in videos], config.split, config.seed)
    fingerprint = coding_fingerprint(config)
    manifest = Manifest()

    for split_name in SPLITS:
        for kind in ("blur", "sharp"):
            (out / split_name / kind).mkdir(parents=True, exist_ok=True)

    for video, frames in videos:
        split_name = membership[video]
        for length in config.sequence_lengths:
            stride = config.stride_for(length)
            if len(frames) < length:
                manifest.skipped_windows += len(config.noise_sigmas)
                continue
            for first in range(0, len(frames) - length + 1, stride):
                window_paths = frames[first:first + length]
                try:
                    window = np.stack([read_png(p) for p in window_paths])
                except DataError as exc:
                    manifest.errors.append(f"{video}[{first}]: {exc}")
                    continue
                if window.ndim == 3:  # grayscale video
                    window = np.repeat(window[:, :, :, None], 3, axis=3)
                for sigma in config.noise_sigmas:
                    pair_id = f"{video}_f{first:05d}_L{length}_s{sigma:g}"
                    seed = pair_seed(config.seed, video, first, length, sigma)
                    coded, sharp = code_exposure(
                        FrameSequence(frames=window), config.coding,
                        grid=config.grid, gamma=config.gamma,
                        noise_sigma=sigma, seed=seed)
                    rel_blur = f"{split_name}/blur/{pair_id}.png"
                    rel_sharp = f"{split_name}/sharp/{pair_id}.png"
                    write_png(out / rel_blur, coded.pixels)
                    write_png(out / rel_sharp, sharp)
                    write_pfm(out / f"{split_name}/blur/{pair_id}.pfm",
                              decode_display(coded.pixels, config.gamma))
                    write_pfm(out / f"{split_name}/sharp/{pair_id}.pfm",
                              decode_display(sharp, config.gamma))
                    manifest.records.append({
                        "pair_id": pair_id,
                        "source_video": video,
                        "first_frame_index": first,
                        "sequence_length": length,
                        "sigma": sigma,
                        "split": split_name,
                        "blurred_path": rel_blur,
                        "sharp_path": rel_sharp,
                        "coding_fingerprint": fingerprint,
                        "seed": seed,
                    })

    manifest.write(out / "manifest.jsonl")
    return manifest


def verify_manifest(manifest_path: str | os.PathLike, out_root: str | os.PathLike,
                    frame_root: str | os.PathLike | None = None,
                    config: DatasetConfig | None = None,
                    regen_fraction: float = 0.01) -> dict:
    """Check a built dataset: files exist, dimensions agree, split-by-video
    holds, pair ids are unique, and (when frame_root + config are given) a
    sample of pairs regenerates bit-identically under the stored seeds."""
    out = Path(out_root)
    manifest = Manifest.read(manifest_path)
    violations: list[str] = []
    video_splits: dict[str, set] = {}
    seen_ids: set[str] = set()

    for rec in manifest.records:
        pid = rec["pair_id"]
        if pid in seen_ids:
            violations.append(f"duplicate pair_id {pid}")
        seen_ids.add(pid)
        video_splits.setdefault(rec["source_video"], set()).add(rec["split"])
        shapes = []
        for key in ("blurred_path", "sharp_path"):
            path = out / rec[key]
            if not path.is_file():
                violations.append(f"missing file {rec[key]}")
            else:
                shapes.append(read_png(path).shape)
        if len(shapes) == 2 and shapes[0] != shapes[1]:
            violations.append(f"dimension mismatch for {pid}: {shapes[0]} vs {shapes[1]}")

    for video, splits in video_splits.items():
        if len(splits) > 1:
            violations.append(f"video {video} leaks across splits {sorted(splits)}")

    regenerated = 0
    if frame_root is not None and config is not None and manifest.records:
        fingerprint = coding_fingerprint(config)
        for rec in manifest.records:
            if rec.get("coding_fingerprint") != fingerprint:
                violations.append(f"fingerprint mismatch for {rec['pair_id']}")
        videos = dict(list_videos(frame_root))
        n_regen = max(1, round(regen_fraction * len(manifest.records)))
        rng = np.random.default_rng(config.seed)
        picks = rng.choice(len(manifest.records), size=min(n_regen, len(manifest.records)),
                           replace=False)
        for i in picks:
            rec = manifest.records[int(i)]
            frames = videos.get(rec["source_video"])
            if frames is None:
                violations.append(f"source video {rec['source_video']} missing")
                continue
            first, length = rec["first_frame_index"], rec["sequence_length"]
            window = np.stack([read_png(p) for p in frames[first:first + length]])
            if window.ndim == 3:
                window = np.repeat(window[:, :, :, None], 3, axis=3)
            coded, _sharp = code_exposure(
                FrameSequence(frames=window), config.coding, grid=config.grid,
                gamma=config.gamma, noise_sigma=rec["sigma"], seed=rec["seed"])
            with tempfile.TemporaryDirectory() as tmp:
                regen_path = Path(tmp) / "regen.png"
                write_png(regen_path, coded.pixels)
                if regen_path.read_bytes() != (out / rec["blurred_path"]).read_bytes():
                    violations.append(f"regeneration differs for {rec['pair_id']}")
            regenerated += 1

    return {
        "n_records": len(manifest.records),
        "n_regenerated": regenerated,
        "violations": violations,
        "ok": not violations,
    }
