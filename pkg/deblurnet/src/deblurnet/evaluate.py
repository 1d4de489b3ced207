"""Split evaluation grouped by sequence length and noise level.

Restores every pair in the requested split and aggregates PSNR/SSIM into
the shared report schema: one CSV row per (length, sigma) cell, plus
sigma-averaged per-length entries in the JSON companion. Cells that exist
elsewhere in the manifest but have no pairs in this split are reported as
warnings so a thin split does not silently shrink the table.
"""

from __future__ import annotations

import warnings
from pathlib import Path

import torch

from .data import load_pair, read_manifest, split_records
from .fileio import DataFileError, write_pfm, write_png
from .infer import restore
from .report import EvalReport, psnr, ssim


def evaluate(model: torch.nn.Module, manifest: str | Path, split: str,
             save_dir: str | Path | None = None) -> EvalReport:
    manifest_path = Path(manifest)
    records = read_manifest(manifest_path)
    root = manifest_path.parent
    chosen = split_records(records, split)
    if not chosen:
        raise DataFileError(f"split {split!r} holds no pairs")

    out_dir = None
    if save_dir is not None:
        out_dir = Path(save_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

    report = EvalReport()
    for rec in chosen:
        blur, sharp = load_pair(root, rec)
        restored = restore(model, blur)
        report.add(rec.sequence_length, rec.sigma,
                   psnr(restored, sharp), ssim(restored, sharp))
        if out_dir is not None:
            write_png(out_dir / f"{rec.pair_id}.png", restored)
            write_pfm(out_dir / f"{rec.pair_id}.pfm", restored)

    all_cells = {(r.sequence_length, r.sigma) for r in records}
    have = {(r.sequence_length, r.sigma) for r in chosen}
    for length, sigma in sorted(all_cells - have):
        warnings.warn(f"no pairs for length {length} sigma {sigma:g} "
                      f"in split {split!r}; cell omitted")
    return report
