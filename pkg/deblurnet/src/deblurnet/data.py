"""Manifest-driven pair loading and patch sampling.

A dataset build directory contains a JSON-Lines manifest whose records point
at blurred/sharp image pairs, tagged with split, sequence length, and noise
sigma. Records are the unit of truth: nothing is inferred from file names.

Patches are sampled only from the requested split, and the additive noise
augmentation is applied to the blurred input at sample time: sigma is drawn
uniformly from [0, sigma_max] (on the 0..255 scale) per sample, or held
fixed when a constant level is requested.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch.utils.data import Dataset

from .fileio import DataFileError, read_png, read_pfm


@dataclass(frozen=True)
class PairRecord:
    pair_id: str
    blurred_path: str
    sharp_path: str
    split: str
    sequence_length: int
    sigma: float
    source_video: str

    @classmethod
    def from_json(cls, obj: dict) -> "PairRecord":
        try:
            return cls(
                pair_id=str(obj["pair_id"]),
                blurred_path=str(obj["blurred_path"]),
                sharp_path=str(obj["sharp_path"]),
                split=str(obj["split"]),
                sequence_length=int(obj["sequence_length"]),
                sigma=float(obj["sigma"]),
                source_video=str(obj["source_video"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFileError(f"malformed manifest record: {exc}") from exc


def read_manifest(path: str | Path) -> list[PairRecord]:
    p = Path(path)
    try:
        lines = p.read_text().splitlines()
    except FileNotFoundError as exc:
        raise DataFileError(f"cannot read manifest {p}: {exc}") from exc
    records = []
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataFileError(f"manifest line {i + 1} is not JSON: {exc}") from exc
        records.append(PairRecord.from_json(obj))
    if not records:
        raise DataFileError(f"manifest {p} holds no records")
    return records


def split_records(records: list[PairRecord], split: str) -> list[PairRecord]:
    return [r for r in records if r.split == split]


def load_pair(root: str | Path, record: PairRecord) -> tuple[np.ndarray, np.ndarray]:
    """Load (blurred, sharp) in [0,1], float64, (H,W,3).

    Linear PFM twins are used when both sides have one, so the values match
    what the simulation computed rather than the display encoding; otherwise
    both sides fall back to PNG so the pair stays self-consistent.
    """
    root = Path(root)
    blur_p = root / record.blurred_path
    sharp_p = root / record.sharp_path
    blur_twin = blur_p.with_suffix(".pfm")
    sharp_twin = sharp_p.with_suffix(".pfm")
    if blur_twin.is_file() and sharp_twin.is_file():
        blur, sharp = read_pfm(blur_twin), read_pfm(sharp_twin)
        if blur.ndim == 2:
            blur = np.stack([blur] * 3, axis=2)
        if sharp.ndim == 2:
            sharp = np.stack([sharp] * 3, axis=2)
    else:
        blur, sharp = read_png(blur_p), read_png(sharp_p)
    if blur.shape != sharp.shape:
        raise DataFileError(
            f"pair {record.pair_id}: blurred {blur.shape} vs sharp {sharp.shape}")
    return np.clip(blur, 0.0, 1.0), np.clip(sharp, 0.0, 1.0)


def to_tensor(img: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(np.ascontiguousarray(img.transpose(2, 0, 1))).float()


class PatchDataset(Dataset):
    """Random aligned patches from one split, with input noise augmentation.

    Images are cached in memory; pair files at training scale are small.
    Sampling is driven by a per-epoch seed so a fixed (seed, epoch) pair
    always yields the same patches regardless of loader workers.
    """

    def __init__(self, root, records: list[PairRecord], patch_size: int,
                 samples_per_epoch: int, noise_sigma_max: float = 9.0,
                 noise_fixed: bool = False, seed: int = 0):
        if not records:
            raise DataFileError("no records in the requested split")
        self.patch = int(patch_size)
        self.n = int(samples_per_epoch)
        self.sigma_max = float(noise_sigma_max)
        self.fixed = bool(noise_fixed)
        self.seed = int(seed)
        self.epoch = 0
        self.pairs = [load_pair(root, r) for r in records]
        for blur, _ in self.pairs:
            if min(blur.shape[0], blur.shape[1]) < self.patch:
                raise DataFileError(
                    f"patch size {self.patch} exceeds image size {blur.shape[:2]}")

    def set_epoch(self, epoch: int) -> None:
        self.epoch = int(epoch)

    def __len__(self):
        return self.n

    def __getitem__(self, idx):
        rng = np.random.default_rng((self.seed, self.epoch, idx))
        blur, sharp = self.pairs[rng.integers(len(self.pairs))]
        h, w = blur.shape[:2]
        y = rng.integers(h - self.patch + 1)
        x = rng.integers(w - self.patch + 1)
        bp = blur[y:y + self.patch, x:x + self.patch]
        sp = sharp[y:y + self.patch, x:x + self.patch]
        sigma = self.sigma_max if self.fixed else rng.uniform(0.0, self.sigma_max)
        noisy = bp + rng.normal(0.0, sigma / 255.0, size=bp.shape)
        return to_tensor(np.clip(noisy, 0.0, 1.0)), to_tensor(sp)
