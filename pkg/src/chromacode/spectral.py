"""(x, t) slice construction and 2-D spectral analysis of coded exposures.

A slice stacks, per channel, the central row of each time step's PSF at the
position a moving point occupies during that step. Its 2-D Fourier transform
separates the codings: a static camera's slice has channel-independent
(gray) phase, the swept-mask camera paints channel-dependent phase, and the
fluttered shutter trades brightness for a spectrum without the box blur's
nulls.

Phase is reported unwrapped. Near-zero-amplitude bins carry numerically
meaningless arguments (and PSF-crop truncation ripple can flip their sign),
so xt_spectrum zeroes the wrapped phase wherever the amplitude falls below a
relative floor before unwrapping; the stored amplitude itself is unfloored.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .coding import CameraCoding, ExposureSchedule, make_schedule, open_fraction
from .errors import DomainError, ValidationError
from .optics import DEFAULT_BANDS, GridSpec, SpectralBands
from .simulate import schedule_psfs

# ----------------------------------------------------------------------------
# domain types
# ----------------------------------------------------------------------------


@dataclass
class XtSlice:
    """Per-channel (t, x) image, shape (3, n_steps, width)."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 3 or self.data.shape[0] != 3:
            raise ValidationError("slice must have shape (3, n_steps, width)")
        if np.any(self.data < 0):
            raise ValidationError("slice values must be non-negative")
        if np.any(self.data.sum(axis=(1, 2)) <= 0):
            raise ValidationError("every channel must carry mass")


@dataclass
class XtSpectrum:
    """DC-centered amplitude and unwrapped phase per channel, slice-shaped."""

    amplitude: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        if self.amplitude.shape != self.phase.shape or self.amplitude.ndim != 3:
            raise ValidationError("amplitude and phase must share a (3, nt, nx) shape")


# ----------------------------------------------------------------------------
# operations
# ----------------------------------------------------------------------------


def _splat_profile(row: np.ndarray, profile: np.ndarray, center_x: float) -> None:
    """Add a 1-D profile centered at fractional center_x (bilinear split)."""
    half = len(profile) // 2
    left = center_x - half
    i0 = int(np.floor(left))
    f = left - i0
    if i0 < 0 or i0 + len(profile) + 1 > len(row):
        raise DomainError("trajectory leaves the slice x range")
    row[i0:i0 + len(profile)] += (1.0 - f) * profile
    row[i0 + 1:i0 + 1 + len(profile)] += f * profile


def xt_psf(coding: CameraCoding, velocity_px: float,
           schedule: ExposureSchedule | None = None,
           grid: GridSpec = GridSpec(),
           bands: SpectralBands = DEFAULT_BANDS,
           n_steps: int = 64, width: int | None = None) -> XtSlice:
    """(x, t) PSF of one coding for a point moving at velocity_px/exposure.

    Row t holds the central row of the step-t RGB PSF splatted at
    x0 + velocity * t_norm + sensor_shift(t); closed-shutter rows are zero.
    Rows are scaled like render_points (open weight times duty cycle).
    """
    if schedule is None:
        schedule = make_schedule(coding, n_steps)
    psfs = schedule_psfs(coding, schedule, bands, grid)
    n = len(schedule)
    half = grid.psf_crop // 2

    x_path = velocity_px * schedule.t_norm + schedule.shift_px[:, 0]
    span_lo, span_hi = float(x_path.min()), float(x_path.max())
    if width is None:
        width = int(np.ceil(span_hi - span_lo)) + grid.psf_crop + 6
        if width % 2 == 0:
            width += 1
    x0 = (width - 1) // 2 - (span_hi + span_lo) / 2.0

    data = np.zeros((3, n, width))
    gain = schedule.open_weight * open_fraction(schedule)
    for t in range(n):
        if not schedule.shutter_open[t]:
            continue
        for ci in range(3):
            profile = psfs.psfs[ci, t][half, :] * gain
            _splat_profile(data[ci, t], profile, x0 + x_path[t])
    return XtSlice(data=data)


def phase_unwrap_2d(wrapped: np.ndarray, quality: np.ndarray | None = None) -> np.ndarray:
    """Quality-guided 2-D phase unwrapping.

    Flood-fills from the highest-quality pixel, always growing the region at
    its best-quality frontier pixel and correcting each neighbor by the
    multiple of 2*pi that brings it within pi of the already-unwrapped value.
    The seed keeps its wrapped value, so results are defined up to a global
    2*pi*k when the true seed phase lies outside (-pi, pi]. Best effort:
    inconsistent (residue-carrying) fields keep residual discontinuities.

    quality defaults to negated local wrapped-gradient energy, so smooth
    regions unwrap first. Pass amplitude when unwrapping spectra.
    """
    w = np.asarray(wrapped, dtype=float)
    if w.ndim != 2:
        raise DomainError("phase_unwrap_2d expects a 2-D image")
    if quality is None:
        gy = np.abs(np.diff(w, axis=0, prepend=w[:1]))
        gx = np.abs(np.diff(w, axis=1, prepend=w[:, :1]))
        quality = -(gx + gy)
    else:
        quality = np.asarray(quality, dtype=float)
        if quality.shape != w.shape:
            raise ValidationError("quality map must match the wrapped image shape")

    h, width = w.shape
    out = w.copy()
    visited = np.zeros(w.shape, dtype=bool)
    seed = int(np.argmax(quality))
    sy, sx = divmod(seed, width)
    visited[sy, sx] = True
    heap: list[tuple[float, int, int, int]] = []
    counter = 0  # tie-break: insertion order keeps the fill deterministic

    def push(y: int, x: int) -> None:
        nonlocal counter
        heapq.heappush(heap, (-quality[y, x], counter, y, x))
        counter += 1

    push(sy, sx)
    twopi = 2.0 * np.pi
    while heap:
        _, _, y, x = heapq.heappop(heap)
        ref = out[y, x]
        for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
            if 0 <= ny < h and 0 <= nx < width and not visited[ny, nx]:
                visited[ny, nx] = True
                out[ny, nx] = w[ny, nx] - twopi * np.round((w[ny, nx] - ref) / twopi)
                push(ny, nx)
    return out


def xt_spectrum(slice_: XtSlice, amplitude_floor_rel: float = 1e-2) -> XtSpectrum:
    """2-D Fourier transform of a slice: modulus and unwrapped argument,
    DC-centered.

    The wrapped phase is zeroed where the channel amplitude is below
    amplitude_floor_rel times the channel peak (arguments there are noise);
    amplitude itself is returned unfloored. Unwrapping uses the amplitude as
    its quality map, so the fill starts at the spectral peak.
    """
    nt, nx = slice_.data.shape[1:]
    amplitude = np.empty_like(slice_.data)
    phase = np.empty_like(slice_.data)
    for ci in range(3):
        spec = np.fft.fftshift(np.fft.fft2(slice_.data[ci]))
        amp = np.abs(spec)
        amplitude[ci] = amp
        wrapped = np.angle(spec)
        wrapped[amp < amplitude_floor_rel * amp.max()] = 0.0
        phase[ci] = phase_unwrap_2d(wrapped, quality=amp)
    return XtSpectrum(amplitude=amplitude, phase=phase)


def align_phase_dc(spectrum: XtSpectrum) -> np.ndarray:
    """Phase volume with each channel's DC-bin phase subtracted; absolute
    offsets are meaningless, comparisons use deviations from DC."""
    nt, nx = spectrum.phase.shape[1:]
    dc = spectrum.phase[:, nt // 2, nx // 2]
    return spectrum.phase - dc[:, None, None]


def phase_colorfulness(spectrum: XtSpectrum) -> float:
    """Mean over frequency bins of the across-channel variance of the
    DC-aligned unwrapped phase. Gray-phase codings score near zero."""
    aligned = align_phase_dc(spectrum)
    return float(np.mean(np.var(aligned, axis=0)))
