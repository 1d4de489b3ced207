"""Shared fixtures: synthetic blur/sharp datasets in the on-disk layout the
dataset builder produces (JSON-Lines manifest, PNG plus linear PFM twins).

Two blur families drive the comparison tests: "coded" staggers short blur
windows across the color channels so each channel keeps a different sharp
phase of the motion, while "uncoded" applies one long box blur identically
to all channels, destroying the same frequencies everywhere.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from deblurnet import write_pfm, write_png

MOTION_LEN = 9


def make_sharp(rng: np.random.Generator, h: int = 32, w: int = 32) -> np.ndarray:
    """Textured scene with hard edges so long blurs genuinely lose detail."""
    base = gaussian_filter(rng.uniform(0, 1, size=(h, w)), 0.6)
    base = (base - base.min()) / (base.max() - base.min() + 1e-9)
    img = np.repeat(base[..., None], 3, axis=2) * 0.6 + 0.2
    for _ in range(3):
        y, x = rng.integers(2, h - 8), rng.integers(2, w - 8)
        hh, ww = rng.integers(3, 8), rng.integers(3, 8)
        img[y:y + hh, x:x + ww] = rng.uniform(0.05, 0.95, size=3)
    tint = gaussian_filter(rng.uniform(-0.1, 0.1, size=(h, w, 3)), (1.5, 1.5, 0))
    return np.clip(img + tint, 0, 1)


def blur_coded(img: np.ndarray) -> np.ndarray:
    """Each channel integrates a different third of a 9-step motion."""
    out = np.zeros_like(img)
    for c, taps in enumerate([(0, 1, 2), (3, 4, 5), (6, 7, 8)]):
        acc = np.zeros(img.shape[:2])
        for t in taps:
            acc += np.roll(img[:, :, c], t - MOTION_LEN // 2, axis=1)
        out[:, :, c] = acc / len(taps)
    return out


def blur_uncoded(img: np.ndarray) -> np.ndarray:
    """All channels integrate the full 9-step motion identically."""
    out = np.zeros_like(img)
    for c in range(3):
        acc = np.zeros(img.shape[:2])
        for t in range(MOTION_LEN):
            acc += np.roll(img[:, :, c], t - MOTION_LEN // 2, axis=1)
        out[:, :, c] = acc / MOTION_LEN
    return out


def build_toy_dataset(root: Path, n_pairs: int, mode: str = "coded",
                      seed: int = 7, size: int = 32,
                      splits: tuple[float, float] = (0.8, 0.9),
                      lengths: tuple[int, ...] = (MOTION_LEN,),
                      sigmas: tuple[float, ...] = (0.0,),
                      write_pfm_twins: bool = True) -> Path:
    """Write pairs + manifest under root; returns the manifest path.

    Pair records carry (length, sigma) tags cycling through the given
    values; the blur itself is always the 9-step kernel so tags exercise
    the grouping logic without extra rendering cost.
    """
    rng = np.random.default_rng(seed)
    blur_fn = blur_coded if mode == "coded" else blur_uncoded
    lines = []
    for i in range(n_pairs):
        frac = i / n_pairs
        split = "train" if frac < splits[0] else ("val" if frac < splits[1] else "test")
        img = make_sharp(rng, size, size)
        blur = blur_fn(img)
        length = lengths[i % len(lengths)]
        sigma = sigmas[(i // len(lengths)) % len(sigmas)]
        pid = f"toy_{i:04d}_L{length}_s{sigma:g}"
        for sub, arr in [("blur", blur), ("sharp", img)]:
            d = root / split / sub
            d.mkdir(parents=True, exist_ok=True)
            write_png(d / f"{pid}.png", arr)
            if write_pfm_twins:
                write_pfm(d / f"{pid}.pfm", arr.astype(np.float32))
        lines.append(json.dumps({
            "blurred_path": f"{split}/blur/{pid}.png",
            "coding_fingerprint": "toy", "first_frame_index": i,
            "pair_id": pid, "seed": seed, "sequence_length": int(length),
            "sharp_path": f"{split}/sharp/{pid}.png", "sigma": float(sigma),
            "source_video": "toy", "split": split}, sort_keys=True))
    manifest = root / "manifest.jsonl"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


@pytest.fixture(scope="session")
def tiny_manifest(tmp_path_factory) -> Path:
    """8 coded pairs, 32x32: 6 train / 1 val / 1 test, two (L, sigma) tags."""
    root = tmp_path_factory.mktemp("tiny")
    return build_toy_dataset(root, 8, lengths=(9, 13), sigmas=(0.0, 3.0),
                             splits=(0.75, 0.875))


@pytest.fixture(scope="session")
def trained_toy(tmp_path_factory, tiny_manifest):
    """A one-epoch shallow checkpoint shared by inference and CLI tests."""
    from deblurnet import TrainConfig, train
    out = tmp_path_factory.mktemp("toy_run")
    cfg = TrainConfig(manifest=str(tiny_manifest), out_dir=str(out),
                      model="shallow", patch_size=16, batch_size=2, epochs=1,
                      samples_per_epoch=4, learning_rate=1e-3, seed=0)
    ckpt, log = train(cfg)
    return ckpt, log
