"""Coded-exposure image formation.

Two front ends share one machinery:

  render_points   - point-source scenes swept through a schedule (the
                    moving-dots comparison of the four cameras).
  code_exposure   - real frame sequences blurred per step and averaged into
                    one coded capture plus its sharp middle frame (dataset
                    synthesis path).

Photometry conventions, fixed here and referenced by the docstrings below:
render_points works in linear light and scales by the schedule's open
fraction, so a fluttered shutter renders at half the static brightness (the
throughput loss is visible). code_exposure takes the open-step-weighted mean
(weights sum to 1), so its output brightness is normalized across codings
and the flutter penalty surfaces as doubled effective noise instead.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.signal import fftconvolve

from .coding import CameraCoding, CodingKind, ExposureSchedule, make_schedule, open_fraction
from .errors import DomainError, ValidationError
from .optics import (DEFAULT_BANDS, GridSpec, PhaseMask, PsfStack, SpectralBands,
                     build_pupil, psf_monochrome)

DEFAULT_GAMMA = 2.2

# ----------------------------------------------------------------------------
# domain types
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ScenePoint:
    x0: float
    y0: float
    vx: float = 0.0
    vy: float = 0.0
    intensity: tuple[float, float, float] = (1.0, 1.0, 1.0)


@dataclass(frozen=True)
class PointScene:
    """Point sources on a canvas; velocities in px per exposure."""

    points: tuple[ScenePoint, ...]
    canvas: tuple[int, int]  # (width, height)

    def __post_init__(self):
        w, h = self.canvas
        if w <= 0 or h <= 0:
            raise ValidationError("canvas dimensions must be positive")
        for p in self.points:
            if min(p.intensity) < 0:
                raise ValidationError("point intensities must be non-negative")
            for t in (0.0, 1.0):
                x, y = p.x0 + p.vx * t, p.y0 + p.vy * t
                if not (0 <= x < w and 0 <= y < h):
                    raise ValidationError(
                        f"point at ({x:.1f}, {y:.1f}) leaves the canvas at t={t:g}"
                    )


@dataclass
class FrameSequence:
    """Ordered stack of display-encoded RGB frames, shape (N, H, W, 3)."""

    frames: np.ndarray

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=float)
        if self.frames.ndim != 4 or self.frames.shape[3] != 3:
            raise ValidationError("frames must have shape (N, H, W, 3)")
        if len(self.frames) < 1:
            raise ValidationError("at least one frame required")
        if self.frames.min() < -1e-9 or self.frames.max() > 1 + 1e-9:
            raise ValidationError("frame values must lie in [0, 1]")

    def __len__(self) -> int:
        return len(self.frames)

    def middle(self) -> np.ndarray:
        if len(self.frames) % 2 == 0:
            raise ValidationError("middle frame undefined for even-length sequences")
        return self.frames[(len(self.frames) - 1) // 2]


@dataclass
class CodedImage:
    """One synthesized capture with its provenance."""

    pixels: np.ndarray  # (H, W, 3) in [0, 1]
    coding_kind: CodingKind
    n_steps: int
    noise_sigma: float = 0.0
    clipped: bool = False


# ----------------------------------------------------------------------------
# per-step PSFs, cached
# ----------------------------------------------------------------------------

_PSF_CACHE: dict = {}
_PSF_LOCK = threading.Lock()


def _cached_psf(mask: PhaseMask, psi_ref: float, wavelength_nm: float,
                grid: GridSpec) -> np.ndarray:
    # quantize psi so sweep steps shared across renders hit the same entry
    key = (mask, round(psi_ref * 1000.0), wavelength_nm, grid)
    with _PSF_LOCK:
        hit = _PSF_CACHE.get(key)
    if hit is not None:
        return hit
    psf = psf_monochrome(build_pupil(mask, psi_ref, wavelength_nm, grid), grid)
    with _PSF_LOCK:
        _PSF_CACHE.setdefault(key, psf)
    return psf


def clear_psf_cache() -> None:
    with _PSF_LOCK:
        _PSF_CACHE.clear()


def schedule_psfs(coding: CameraCoding, schedule: ExposureSchedule,
                  bands: SpectralBands = DEFAULT_BANDS,
                  grid: GridSpec = GridSpec()) -> PsfStack:
    """RGB PSF for every schedule step: the swept-mask PSF at that step's psi
    for the SWEEP camera, the clear-aperture in-focus PSF otherwise."""
    mask = coding.pupil_mask()
    k = grid.psf_crop
    n = len(schedule)
    psfs = np.empty((3, n, k, k))
    for ci, (_, lam) in enumerate(bands.channels):
        for t in range(n):
            psfs[ci, t] = _cached_psf(mask, float(schedule.psi[t]), lam, grid)
    energy = psfs.sum(axis=(2, 3))
    return PsfStack(psfs=psfs, energy=energy)


# ----------------------------------------------------------------------------
# convolution and splatting helpers
# ----------------------------------------------------------------------------


def conv2_reflect(image: np.ndarray, psf: np.ndarray) -> np.ndarray:
    """2-D convolution with reflective boundary handling (same size)."""
    ph, pw = psf.shape
    py, px = ph // 2, pw // 2
    padded = np.pad(image, ((py, py), (px, px)), mode="reflect")
    out = fftconvolve(padded, psf, mode="same")
    return out[py:py + image.shape[0], px:px + image.shape[1]]


def splat_bilinear(canvas: np.ndarray, x: float, y: float, value: float) -> bool:
    """Deposit value at fractional (x, y) over the 4 neighboring pixels.
    Returns True if any weight fell outside the canvas."""
    h, w = canvas.shape
    ix, iy = int(np.floor(x)), int(np.floor(y))
    fx, fy = x - ix, y - iy
    clipped = False
    for dy, dx, wgt in ((0, 0, (1 - fx) * (1 - fy)), (0, 1, fx * (1 - fy)),
                        (1, 0, (1 - fx) * fy), (1, 1, fx * fy)):
        yy, xx = iy + dy, ix + dx
        if 0 <= yy < h and 0 <= xx < w:
            canvas[yy, xx] += value * wgt
        elif wgt > 0:
            clipped = True
    return clipped


def decode_display(image: np.ndarray, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """Display-encoded [0,1] values to linear light."""
    return np.power(np.clip(image, 0.0, None), gamma)


def encode_display(linear: np.ndarray, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """Linear light to display encoding."""
    return np.power(np.clip(linear, 0.0, None), 1.0 / gamma)


# ----------------------------------------------------------------------------
# operations
# ----------------------------------------------------------------------------


def render_points(scene: PointScene, coding: CameraCoding,
                  schedule: ExposureSchedule | None = None,
                  grid: GridSpec = GridSpec(),
                  bands: SpectralBands = DEFAULT_BANDS,
                  n_steps: int = 64) -> CodedImage:
    """Render a point-source scene through one camera coding, linear light.

    Every open step splats each point (bilinear) at its instantaneous
    position plus sensor shift, convolves with that step's RGB PSF, and
    accumulates weight * open_fraction, so total deposited energy equals
    intensity * duty cycle. The clipped flag is set when any trajectory's
    PSF support reaches past the canvas or a pixel saturates.
    """
    if schedule is None:
        schedule = make_schedule(coding, n_steps)
    w, h = scene.canvas
    psfs = schedule_psfs(coding, schedule, bands, grid)
    half = grid.psf_crop // 2
    out = np.zeros((h, w, 3))
    step_gain = schedule.open_weight * open_fraction(schedule)
    clipped = False
    for t in range(len(schedule)):
        if not schedule.shutter_open[t]:
            continue
        splat = np.zeros((h, w, 3))
        any_mass = False
        for p in scene.points:
            x = p.x0 + p.vx * schedule.t_norm[t] + schedule.shift_px[t, 0]
            y = p.y0 + p.vy * schedule.t_norm[t] + schedule.shift_px[t, 1]
            if x - half < 0 or x + half >= w - 1 or y - half < 0 or y + half >= h - 1:
                clipped = True
            for ci in range(3):
                v = p.intensity[ci] * step_gain
                if v > 0:
                    oob = splat_bilinear(splat[:, :, ci], x, y, v)
                    clipped = clipped or oob
                    any_mass = True
        if not any_mass:
            continue
        for ci in range(3):
            if splat[:, :, ci].any():
                out[:, :, ci] += fftconvolve(splat[:, :, ci], psfs.psfs[ci, t], mode="same")
    if out.max() > 1.0:
        clipped = True
    out = np.clip(out, 0.0, 1.0)
    return CodedImage(pixels=out, coding_kind=coding.kind, n_steps=len(schedule),
                      noise_sigma=0.0, clipped=clipped)


def trace_centroid(channel: np.ndarray, axis: str = "x") -> float:
    """Squared-intensity-weighted centroid of one channel along x or y.

    Squaring concentrates the weight on the channel's sharp (high-peak)
    segment of a motion trace. The plain first moment cannot order the
    channels: symmetric per-step PSFs with equal energy put every channel's
    first moment at the trajectory midpoint.
    """
    p = np.asarray(channel, dtype=float) ** 2
    mass = p.sum()
    if mass <= 0:
        raise DomainError("empty channel has no centroid")
    if axis == "x":
        coords = np.arange(p.shape[1])
        marginal = p.sum(axis=0)
    elif axis == "y":
        coords = np.arange(p.shape[0])
        marginal = p.sum(axis=1)
    else:
        raise DomainError(f"axis must be 'x' or 'y', got {axis!r}")
    return float((marginal * coords).sum() / mass)


def add_awgn(image: np.ndarray, sigma_255: float, seed: int) -> np.ndarray:
    """Add i.i.d. Gaussian noise of std sigma/255 (sigma on a 0..255 scale),
    then clip to [0, 1]. Deterministic per seed; sigma=0 is the identity."""
    if sigma_255 < 0:
        raise DomainError("noise sigma must be non-negative")
    if sigma_255 == 0:
        return np.array(image, dtype=float, copy=True)
    rng = np.random.default_rng(seed)
    noisy = image + rng.normal(0.0, sigma_255 / 255.0, size=np.shape(image))
    return np.clip(noisy, 0.0, 1.0)


def _shift_frame(frame: np.ndarray, dx: float, dy: float) -> np.ndarray:
    if dx == 0 and dy == 0:
        return frame
    return ndimage.shift(frame, (dy, dx), order=1, mode="reflect", prefilter=False)


def code_exposure(frames: FrameSequence | np.ndarray, coding: CameraCoding,
                  grid: GridSpec = GridSpec(), gamma: float = DEFAULT_GAMMA,
                  noise_sigma: float = 0.0, seed: int = 0,
                  bands: SpectralBands = DEFAULT_BANDS,
                  psfs: PsfStack | None = None) -> tuple[CodedImage, np.ndarray]:
    """Collapse an odd-length frame sequence into one coded capture.

    Frames are decoded to linear light (x^gamma), frame k is shifted by the
    step's sensor shift and convolved (FFT, reflective padding) with the k-th
    step PSF, the open-step-weighted mean is taken (weights sum to 1; see the
    module docstring for how this differs from render_points), the result is
    re-encoded (x^(1/gamma)), AWGN of std sigma/255 is added under the given
    seed, and values are clipped to [0, 1]. Returns (coded, sharp middle
    frame). A precomputed PsfStack may be injected for testing.
    """
    if not isinstance(frames, FrameSequence):
        frames = FrameSequence(frames=np.asarray(frames))
    n = len(frames)
    if n % 2 == 0:
        raise ValidationError("frame count must be odd")
    if noise_sigma < 0:
        raise DomainError("noise sigma must be non-negative")
    schedule = make_schedule(coding, n)
    if psfs is None:
        psfs = schedule_psfs(coding, schedule, bands, grid)
    elif psfs.time_steps != n:
        raise ValidationError("injected PsfStack length does not match frame count")

    acc = np.zeros_like(frames.frames[0])
    wgt = schedule.open_weight
    for t in range(n):
        if not schedule.shutter_open[t]:
            continue
        linear = decode_display(frames.frames[t], gamma)
        linear = _shift_frame(linear, schedule.shift_px[t, 0], schedule.shift_px[t, 1])
        for ci in range(3):
            acc[:, :, ci] += wgt * conv2_reflect(linear[:, :, ci], psfs.psfs[ci, t])

    coded = np.clip(encode_display(acc, gamma), 0.0, 1.0)
    coded = add_awgn(coded, noise_sigma, seed)
    image = CodedImage(pixels=coded, coding_kind=coding.kind, n_steps=n,
                       noise_sigma=noise_sigma, clipped=False)
    return image, frames.middle()


def rotating_target(image: np.ndarray, total_angle_deg: float, n_steps: int) -> FrameSequence:
    """Frame sequence of bilinear rotations about the image center at the n
    uniformly spaced angles k*total/n, k = 0..n-1 (endpoint-exclusive, so a
    full turn of an m-fold-symmetric target at n=m repeats exactly)."""
    if n_steps < 1:
        raise DomainError("n_steps must be >= 1")
    img = np.asarray(image, dtype=float)
    frames = np.empty((n_steps,) + img.shape)
    for k in range(n_steps):
        angle = total_angle_deg * k / n_steps
        if angle == 0:
            frames[k] = img
        else:
            frames[k] = ndimage.rotate(img, angle, axes=(1, 0), reshape=False,
                                       order=1, mode="constant", cval=0.0,
                                       prefilter=False)
    return FrameSequence(frames=np.clip(frames, 0.0, 1.0))
