"""Classical deconvolution baselines and image-quality metrics.

Lucy-Richardson iterates x <- x * [H^T(y / (Hx + eps))] with reflective
boundary handling. The fluttered-shutter path inverts the known 1-D smear in
closed form per scanline with ridge regularization; the smear matrix is the
tall (full-convolution) Toeplitz built from the temporal code, whose
conditioning advantage over a box blur is what makes the coding invertible.
The parabolic camera's motion-invariant kernel is obtained by integrating
its schedule's sensor path over time, then deconvolved with Lucy-Richardson.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .coding import CameraCoding, CodingKind, make_schedule
from .errors import DomainError, ValidationError
from .fileio import write_json
from .simulate import conv2_reflect

# ----------------------------------------------------------------------------
# parameters and reports
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class DeconvParams:
    iterations: int = 50
    epsilon: float = 1e-12
    regularization_lambda: float = 0.0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValidationError("iterations must be >= 1")
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive")
        if self.regularization_lambda < 0:
            raise DomainError("regularization lambda must be non-negative")


@dataclass
class EvalReport:
    """Per-pair quality rows plus the two-level grouping used for reporting:
    per-(sequence_length, sigma) means, then sigma-averaged per length."""

    rows: list[dict] = field(default_factory=list)

    def add(self, sequence_length: int, noise_sigma: float, psnr_db: float, ssim_val: float) -> None:
        self.rows.append({"seq_len": int(sequence_length), "sigma": float(noise_sigma),
                          "psnr": float(psnr_db), "ssim": float(ssim_val)})

    def grouped(self) -> list[dict]:
        """Mean PSNR/SSIM per (seq_len, sigma) cell, sorted."""
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


# ----------------------------------------------------------------------------
# deconvolution
# ----------------------------------------------------------------------------


def _check_psf(psf: np.ndarray) -> np.ndarray:
    p = np.asarray(psf, dtype=float)
    if p.ndim != 2:
        raise ValidationError("PSF must be 2-D")
    if np.any(p < 0):
        raise ValidationError("PSF must be non-negative")
    if abs(p.sum() - 1.0) > 1e-6:
        raise ValidationError(f"PSF must be normalized, sum = {p.sum():.8f}")
    return p


def lucy_richardson(blurred: np.ndarray, psf: np.ndarray,
                    params: DeconvParams = DeconvParams()) -> np.ndarray:
    """Richardson-Lucy deconvolution, per channel, reflective padding.

    Starts from x = blurred; every iterate stays non-negative.
    """
    y = np.asarray(blurred, dtype=float)
    if np.any(y < 0):
        raise ValidationError("blurred image must be non-negative")
    p = _check_psf(psf)
    p_flip = p[::-1, ::-1]

    def one_channel(yc: np.ndarray) -> np.ndarray:
        x = yc.copy()
        for _ in range(params.iterations):
            denom = conv2_reflect(x, p)
            ratio = yc / (denom + params.epsilon)
            x = x * conv2_reflect(ratio, p_flip)
            x = np.clip(x, 0.0, None)
        return x

    if y.ndim == 2:
        return one_channel(y)
    if y.ndim == 3:
        return np.stack([one_channel(y[:, :, c]) for c in range(y.shape[2])], axis=2)
    raise ValidationError("blurred image must be 2-D or (H, W, C)")


def smear_matrix(code: str, motion_len_px: int, n_px: int) -> np.ndarray:
    """Tall Toeplitz forward operator of a coded 1-D constant-velocity smear.

    The temporal code is stretched to motion_len_px samples (zero-order
    hold), normalized to unit sum, and placed as the kernel of a full
    convolution: shape (n_px + motion_len - 1, n_px).
    """
    if motion_len_px < 1:
        raise DomainError("motion length must be >= 1")
    if motion_len_px < len(code):
        raise DomainError("motion length must be >= code length")
    bits = np.array([c == "1" for c in code], dtype=float)
    if bits.sum() == 0:
        raise ValidationError("code must contain at least one open bit")
    idx = np.arange(motion_len_px) * len(code) // motion_len_px
    kernel = bits[idx]
    kernel = kernel / kernel.sum()
    a = np.zeros((n_px + motion_len_px - 1, n_px))
    for j in range(n_px):
        a[j:j + motion_len_px, j] = kernel
    return a


def flutter_invert(blurred: np.ndarray, code: str, motion_len_px: int,
                   axis: str = "x", params: DeconvParams = DeconvParams()) -> np.ndarray:
    """Invert a known coded 1-D smear per scanline by ridge least squares.

    The blurred extent along the motion axis is the full smear (scene extent
    + motion - 1), so the recovered image is motion_len - 1 px shorter along
    that axis. lambda = 0 requests the unregularized solve; if the operator
    is rank-deficient a tiny ridge is substituted and a conditioning warning
    is emitted.
    """
    img = np.asarray(blurred, dtype=float)
    flat = img.ndim == 2
    if flat:
        img = img[:, :, None]
    if axis == "y":
        img = img.transpose(1, 0, 2)
    elif axis != "x":
        raise DomainError(f"axis must be 'x' or 'y', got {axis!r}")

    n_obs = img.shape[1]
    n_px = n_obs - motion_len_px + 1
    if n_px < 1:
        raise DomainError("blurred extent shorter than the smear itself")
    a = smear_matrix(code, motion_len_px, n_px)
    lam = params.regularization_lambda
    gram = a.T @ a
    if lam == 0.0:
        sv = np.linalg.svd(gram, compute_uv=False)
        if sv[-1] < 1e-12 * sv[0]:
            warnings.warn("smear matrix is rank-deficient at lambda=0; "
                          "substituting lambda=1e-10", RuntimeWarning)
            lam = 1e-10
    solve_mat = gram + lam * np.eye(n_px)
    lines = img.transpose(0, 2, 1).reshape(-1, n_obs)  # (H*C, n_obs) scanlines
    sol = np.linalg.solve(solve_mat, a.T @ lines.T)    # (n_px, H*C)
    out = sol.T.reshape(img.shape[0], img.shape[2], n_px).transpose(0, 2, 1)
    if axis == "y":
        out = out.transpose(1, 0, 2)
    return out[:, :, 0] if flat else out


def parabolic_kernel(coding: CameraCoding, n_steps: int = 256) -> np.ndarray:
    """Motion-invariant 1-D blur kernel of the parabolic camera: integrate
    the schedule's sensor path over time (bilinear splat of every step's
    shift), normalize, return as a (1, L) image for lucy_richardson."""
    if coding.kind is not CodingKind.PARABOLIC:
        raise DomainError("parabolic_kernel requires a parabolic coding")
    schedule = make_schedule(coding, n_steps)
    shifts = schedule.shift_px[:, 0]
    length = int(np.ceil(shifts.max())) + 2
    kernel = np.zeros(length)
    for s in shifts:
        i = int(np.floor(s))
        f = s - i
        kernel[i] += (1.0 - f)
        kernel[i + 1] += f
    kernel /= kernel.sum()
    return kernel[None, :]


# ----------------------------------------------------------------------------
# metrics
# ----------------------------------------------------------------------------


def _check_pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DomainError(f"image shapes differ: {a.shape} vs {b.shape}")
    for img in (a, b):
        if img.min() < -1e-9 or img.max() > 1 + 1e-9:
            raise DomainError("metric inputs must lie in [0, 1]")
    return a, b


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
    raise DomainError(f"cannot take luma of shape {img.shape}")


def ssim(a: np.ndarray, b: np.ndarray, window: int = 11, sigma: float = 1.5,
         k1: float = 0.01, k2: float = 0.03) -> float:
    """Mean structural similarity on luma, Gaussian 11x11 window, L = 1."""
    a, b = _check_pair(a, b)
    x = _luma(a)
    y = _luma(b)
    if min(x.shape) < window:
        raise DomainError(f"images smaller than the {window}x{window} SSIM window")
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
