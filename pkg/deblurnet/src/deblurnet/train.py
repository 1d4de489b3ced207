"""Training loop: Huber objective, noise augmentation, best-by-validation.

Reproducibility contract: with a fixed seed and worker count, weight init,
patch sampling, and augmentation noise are all derived from the seed, so two
runs produce identical losses. Patch indices map to (seed, epoch, index)
RNG streams, which keeps the stream independent of loader worker layout.

Validation restores full frames from the validation split as stored on disk
(their files already carry the noise level in their manifest record; no
extra noise is added) and tracks PSNR/SSIM; the checkpoint with the best
validation PSNR is kept.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
import torch
from torch.utils.data import DataLoader

from .data import PatchDataset, load_pair, read_manifest, split_records
from .fileio import DataFileError, write_json
from .infer import restore, save_checkpoint
from .models import build_model
from .report import psnr, ssim


@dataclass(frozen=True)
class TrainConfig:
    manifest: str
    out_dir: str
    model: str = "unet"
    patch_size: int = 128
    batch_size: int = 8
    epochs: int = 40
    samples_per_epoch: int = 256
    learning_rate: float = 1e-4
    huber_delta: float = 0.01
    noise_sigma: float = 9.0
    noise_fixed: bool = False
    seed: int = 0
    train_split: str = "train"
    val_split: str = "val"
    workers: int = 0

    def __post_init__(self):
        if self.patch_size < 1 or self.patch_size % 2:
            raise ValueError("patch_size must be a positive even number")
        if self.epochs < 1 or self.batch_size < 1 or self.samples_per_epoch < 1:
            raise ValueError("epochs, batch_size, samples_per_epoch must be >= 1")
        if self.huber_delta <= 0 or self.learning_rate <= 0:
            raise ValueError("huber_delta and learning_rate must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")


def train(cfg: TrainConfig) -> tuple[Path, dict]:
    """Run the full loop; returns (checkpoint path, training log dict)."""
    t0 = time.time()
    manifest_path = Path(cfg.manifest)
    records = read_manifest(manifest_path)
    root = manifest_path.parent
    train_recs = split_records(records, cfg.train_split)
    if not train_recs:
        raise DataFileError(f"split {cfg.train_split!r} holds no pairs")
    val_recs = split_records(records, cfg.val_split)
    if not val_recs:
        warnings.warn(f"split {cfg.val_split!r} is empty; validating on the training pairs")
        val_recs = train_recs

    torch.manual_seed(cfg.seed)
    model = build_model(cfg.model)
    dataset = PatchDataset(root, train_recs, patch_size=cfg.patch_size,
                           samples_per_epoch=cfg.samples_per_epoch,
                           noise_sigma_max=cfg.noise_sigma,
                           noise_fixed=cfg.noise_fixed, seed=cfg.seed)
    loader = DataLoader(dataset, batch_size=cfg.batch_size, shuffle=False,
                        num_workers=cfg.workers)
    val_pairs = [load_pair(root, r) for r in val_recs]

    criterion = torch.nn.HuberLoss(delta=cfg.huber_delta)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    scheduler = torch.optim.lr_scheduler.ReduceLROnPlateau(
        optimizer, mode="max", factor=0.5, patience=5)

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt_path = out_dir / "best.pt"
    epochs_log: list[dict] = []
    best = {"epoch": 0, "val_psnr": -np.inf, "val_ssim": 0.0}

    for epoch in range(1, cfg.epochs + 1):
        dataset.set_epoch(epoch)
        model.train()
        losses = []
        for noisy, sharp in loader:
            optimizer.zero_grad()
            loss = criterion(model(noisy), sharp)
            loss.backward()
            optimizer.step()
            losses.append(float(loss.detach()))
        val_psnr, val_ssim = _validate(model, val_pairs)
        scheduler.step(val_psnr)
        entry = {"epoch": epoch, "train_loss": float(np.mean(losses)),
                 "val_psnr": val_psnr, "val_ssim": val_ssim,
                 "lr": optimizer.param_groups[0]["lr"]}
        epochs_log.append(entry)
        if val_psnr > best["val_psnr"]:
            best = {"epoch": epoch, "val_psnr": val_psnr, "val_ssim": val_ssim}
            save_checkpoint(ckpt_path, model, cfg.model,
                            extra={"epoch": epoch, "val_psnr": val_psnr})

    config_log = {**asdict(cfg), "manifest": str(cfg.manifest), "out_dir": str(cfg.out_dir)}
    log = {"config": config_log, "epochs": epochs_log, "best": best,
           "n_train_pairs": len(train_recs), "n_val_pairs": len(val_recs),
           "wall_seconds": round(time.time() - t0, 3)}
    write_json(out_dir / "train_log.json", log)
    return ckpt_path, log


def _validate(model, pairs) -> tuple[float, float]:
    ps, ss = [], []
    for blur, sharp in pairs:
        out = restore(model, blur)
        ps.append(psnr(out, sharp))
        ss.append(ssim(out, sharp))
    return float(np.mean(ps)), float(np.mean(ss))
