"""Image quality metrics and the grouped evaluation report.

The report schema mirrors the classical-baseline evaluation exactly, down to
column names and number formatting, so CSVs from either pipeline can be
diffed or concatenated: per-(sequence length, sigma) mean rows in the CSV,
plus sigma-averaged per-length rows in the JSON companion.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .fileio import write_json


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """10 log10(1 / MSE) over all samples; +inf for identical images."""
    a, b = _check_pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(1.0 / mse)


def _luma(img: np.ndarray) -> np.ndarray:
    if img.ndim == 2:
        return img
    if img.ndim == 3 and img.shape[2] == 3:
        return 0.299 * img[:, :, 0] + 0.587 * img[:, :, 1] + 0.114 * img[:, :, 2]
    raise ValueError(f"cannot take luma of shape {img.shape}")


def ssim(a: np.ndarray, b: np.ndarray, window: int = 11, sigma: float = 1.5,
         k1: float = 0.01, k2: float = 0.03) -> float:
    """Mean structural similarity on luma, Gaussian 11x11 window, L = 1."""
    a, b = _check_pair(a, b)
    x = _luma(a)
    y = _luma(b)
    if min(x.shape) < window:
        raise ValueError(f"images smaller than the {window}x{window} SSIM window")
    g = np.exp(-0.5 * ((np.arange(window) - window // 2) / sigma) ** 2)
    g /= g.sum()
    kern = np.outer(g, g)

    def filt(img):
        return fftconvolve(img, kern, mode="valid")

    c1 = k1 ** 2
    c2 = k2 ** 2
    mu_x = filt(x)
    mu_y = filt(y)
    xx = filt(x * x) - mu_x ** 2
    yy = filt(y * y) - mu_y ** 2
    xy = filt(x * y) - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * xy + c2)
    den = (mu_x ** 2 + mu_y ** 2 + c1) * (xx + yy + c2)
    return float(np.mean(num / den))


def _check_pair(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return a, b


@dataclass
class EvalReport:
    """Per-pair quality rows plus the two-level grouping used for reporting."""

    rows: list[dict] = field(default_factory=list)

    def add(self, sequence_length: int, noise_sigma: float, psnr_db: float, ssim_val: float) -> None:
        self.rows.append({"seq_len": int(sequence_length), "sigma": float(noise_sigma),
                          "psnr": float(psnr_db), "ssim": float(ssim_val)})

    def grouped(self) -> list[dict]:
        cells: dict[tuple[int, float], list[dict]] = {}
        for r in self.rows:
            cells.setdefault((r["seq_len"], r["sigma"]), []).append(r)
        out = []
        for (length, sigma) in sorted(cells):
            group = cells[(length, sigma)]
            out.append({
                "seq_len": length, "sigma": sigma,
                "psnr": float(np.mean([g["psnr"] for g in group])),
                "ssim": float(np.mean([g["ssim"] for g in group])),
                "count": len(group),
            })
        return out

    def by_length(self) -> list[dict]:
        """Sigma-averaged means per length: the mean of per-sigma means."""
        out = []
        cells = self.grouped()
        for length in sorted({c["seq_len"] for c in cells}):
            mine = [c for c in cells if c["seq_len"] == length]
            out.append({
                "seq_len": length,
                "psnr": float(np.mean([c["psnr"] for c in mine])),
                "ssim": float(np.mean([c["ssim"] for c in mine])),
                "sigmas": [c["sigma"] for c in mine],
            })
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["seq_len", "sigma", "psnr", "ssim"])
            for c in self.grouped():
                writer.writerow([c["seq_len"], f"{c['sigma']:g}",
                                 f"{c['psnr']:.6g}", f"{c['ssim']:.6g}"])

    def write_json(self, path) -> None:
        write_json(path, {"cells": self.grouped(), "by_length": self.by_length(),
                          "n_pairs": len(self.rows)})
