"""Scalar-diffraction pupil and PSF engine.

Model
-----
The aperture is described on a unit-radius normalized pupil plane. A point
source at effective infinity produces, per wavelength, the complex pupil

    P(rho) = A(rho) * exp(i * [phi_mask(rho) * lam_ref/lam + psi_lam * rho^2])

with A = 1 inside the disc and 0 outside. The quadratic term is the standard
defocus model; psi is the dimensionless defocus measure

    psi = pi R^2 / lam * (1/z_o + 1/z_img - 1/f)

and scales with 1/lam, as does the phase imparted by an etched mask (pure
optical-path-length dispersion, no material dispersion). The incoherent PSF
is |FT{P}|^2, DC-centered, cropped and normalized to unit energy: a phase
mask redistributes light but never absorbs it.

All lengths entering defocus_psi are converted to millimeters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePupilError, DomainError, ValidationError

# ----------------------------------------------------------------------------
# domain types
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class LensSpec:
    """Thin-lens imaging geometry. object_distance_mm may be math.inf."""

    exit_pupil_radius_mm: float
    focal_length_mm: float
    object_distance_mm: float
    image_distance_mm: float

    def __post_init__(self):
        for name in ("exit_pupil_radius_mm", "focal_length_mm", "image_distance_mm"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be finite and positive, got {v}")
        z_o = self.object_distance_mm
        if not (z_o > 0):  # inf allowed
            raise DomainError(f"object_distance_mm must be positive, got {z_o}")


@dataclass(frozen=True)
class PhaseMask:
    """Concentric ring phase mask on the normalized pupil.

    rings: tuple of (r_inner, r_outer, phase_rad) with radii in [0, 1],
    ordered and non-overlapping. An empty tuple is a clear aperture.
    Phases are specified at reference_wavelength_nm.
    """

    rings: tuple[tuple[float, float, float], ...] = ()
    reference_wavelength_nm: float = 455.0

    def __post_init__(self):
        if self.reference_wavelength_nm <= 0:
            raise DomainError("reference wavelength must be positive")
        prev_outer = 0.0
        for r_in, r_out, _phase in self.rings:
            if not (0.0 <= r_in < r_out <= 1.0):
                raise ValidationError(
                    f"ring radii must satisfy 0 <= r_inner < r_outer <= 1, got ({r_in}, {r_out})"
                )
            if r_in < prev_outer:
                raise ValidationError("rings must be ordered and non-overlapping")
            prev_outer = r_out


# Two-ring design used throughout: inner ring 6.5 rad over radii 0.55-0.8,
# outer ring 13.2 rad over 0.8-1.0, both at the 455 nm blue reference.
DEFAULT_MASK = PhaseMask(rings=((0.55, 0.8, 6.5), (0.8, 1.0, 13.2)),
                         reference_wavelength_nm=455.0)
CLEAR_MASK = PhaseMask(rings=(), reference_wavelength_nm=455.0)


@dataclass(frozen=True)
class SpectralBands:
    """Three named channels with representative wavelengths, R first,
    wavelengths strictly decreasing toward B."""

    channels: tuple[tuple[str, float], ...] = (("R", 610.0), ("G", 530.0), ("B", 455.0))

    def __post_init__(self):
        if len(self.channels) != 3:
            raise ValidationError("exactly three spectral channels required")
        lams = [lam for _, lam in self.channels]
        if any(lam <= 0 for lam in lams):
            raise DomainError("wavelengths must be positive")
        if not (lams[0] > lams[1] > lams[2]):
            raise ValidationError("wavelengths must strictly decrease from R to B")

    def wavelength(self, name: str) -> float:
        for n, lam in self.channels:
            if n == name:
                return lam
        raise KeyError(name)


DEFAULT_BANDS = SpectralBands()


@dataclass(frozen=True)
class GridSpec:
    """Sampling plan: pupil_samples per axis (even), zero-pad factor for the
    FFT, and the odd PSF crop size."""

    pupil_samples: int = 256
    pad_factor: int = 2
    psf_crop: int = 65

    def __post_init__(self):
        if self.pupil_samples <= 0 or self.pupil_samples % 2 != 0:
            raise ValidationError("pupil_samples must be even and positive")
        if self.pad_factor < 1:
            raise ValidationError("pad_factor must be >= 1")
        if self.psf_crop <= 0 or self.psf_crop % 2 == 0:
            raise ValidationError("psf_crop must be odd and positive")
        if self.psf_crop > self.pupil_samples * self.pad_factor:
            raise ValidationError("psf_crop exceeds padded grid size")


@dataclass
class ComplexField:
    """Complex 2-D field sampled row-major, shape (height, width)."""

    width: int
    height: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != (self.height, self.width):
            raise ValidationError(
                f"field shape {self.values.shape} does not match "
                f"(height, width) = ({self.height}, {self.width})"
            )


@dataclass
class PsfStack:
    """Per-channel, per-time-step PSFs: psfs[channel][time] is a 2-D image,
    energy[channel][time] its sum (1 after normalization)."""

    psfs: np.ndarray   # (3, time_steps, k, k)
    energy: np.ndarray  # (3, time_steps)

    def __post_init__(self):
        if self.psfs.ndim != 4 or self.psfs.shape[0] != 3:
            raise ValidationError("psfs must have shape (3, time_steps, k, k)")
        if self.energy.shape != self.psfs.shape[:2]:
            raise ValidationError("energy shape must be (3, time_steps)")
        if np.any(self.psfs < 0):
            raise ValidationError("PSF samples must be non-negative")

    @property
    def time_steps(self) -> int:
        return self.psfs.shape[1]


# ----------------------------------------------------------------------------
# operations
# ----------------------------------------------------------------------------


def defocus_psi(lens: LensSpec, wavelength_nm: float) -> float:
    """Dimensionless defocus measure psi = pi R^2/lam (1/z_o + 1/z_img - 1/f).

    1/z_o is taken as 0 for an object at infinity. Lengths are evaluated in
    millimeters (wavelength converted from nm).
    """
    if wavelength_nm <= 0:
        raise DomainError("wavelength must be positive")
    lam_mm = wavelength_nm * 1e-6
    inv_zo = 0.0 if math.isinf(lens.object_distance_mm) else 1.0 / lens.object_distance_mm
    bracket = inv_zo + 1.0 / lens.image_distance_mm - 1.0 / lens.focal_length_mm
    return math.pi * lens.exit_pupil_radius_mm ** 2 / lam_mm * bracket


def psi_at_wavelength(psi_ref: float, ref_wavelength_nm: float, wavelength_nm: float) -> float:
    """Rescale a defocus value from its reference wavelength (psi ~ 1/lam)."""
    if ref_wavelength_nm <= 0 or wavelength_nm <= 0:
        raise DomainError("wavelengths must be positive")
    return psi_ref * ref_wavelength_nm / wavelength_nm


def _pupil_radius_grid(n: int) -> np.ndarray:
    # half-open symmetric sampling, x_j = (j - n/2) * (2/n); FFT-friendly
    x = (np.arange(n) - n // 2) * (2.0 / n)
    xx, yy = np.meshgrid(x, x)
    return np.hypot(xx, yy)


def mask_phase_profile(mask: PhaseMask, rho: np.ndarray) -> np.ndarray:
    """Phase in radians applied by the mask at its reference wavelength,
    evaluated at normalized radii rho. Ring membership is r_inner <= rho <
    r_outer, except the outermost edge at 1.0 which is inclusive."""
    phase = np.zeros_like(rho)
    for r_in, r_out, phi in mask.rings:
        if r_out >= 1.0:
            sel = (rho >= r_in) & (rho <= 1.0)
        else:
            sel = (rho >= r_in) & (rho < r_out)
        phase[sel] = phi
    return phase


def build_pupil(mask: PhaseMask, psi: float, wavelength_nm: float, grid: GridSpec) -> ComplexField:
    """Complex pupil for one wavelength and one defocus value.

    psi is given at the mask's reference wavelength; both it and the mask
    phase are scaled by lam_ref/lam before being applied. Inside the unit
    disc the amplitude is 1; outside it is 0.
    """
    if wavelength_nm <= 0:
        raise DomainError("wavelength must be positive")
    # revalidate; masks built by hand may bypass the dataclass checks
    PhaseMask(rings=mask.rings, reference_wavelength_nm=mask.reference_wavelength_nm)
    n = grid.pupil_samples
    rho = _pupil_radius_grid(n)
    disc = rho <= 1.0
    scale = mask.reference_wavelength_nm / wavelength_nm
    phase = mask_phase_profile(mask, rho) * scale + psi * scale * rho ** 2
    values = np.where(disc, np.exp(1j * phase), 0.0 + 0.0j)
    return ComplexField(width=n, height=n, values=values)


def psf_monochrome(pupil: ComplexField, grid: GridSpec) -> np.ndarray:
    """Incoherent PSF |FT{pupil}|^2, DC-centered, cropped to psf_crop square
    and normalized to unit energy."""
    if (pupil.height, pupil.width) != (grid.pupil_samples, grid.pupil_samples):
        raise ValidationError("pupil dimensions do not match grid")
    if not np.any(pupil.values):
        raise DegeneratePupilError("pupil carries no light")
    n = grid.pupil_samples
    m = n * grid.pad_factor
    padded = np.zeros((m, m), dtype=np.complex128)
    padded[:n, :n] = pupil.values
    intensity = np.abs(np.fft.fft2(padded)) ** 2
    intensity = np.fft.fftshift(intensity)
    c = m // 2
    h = grid.psf_crop // 2
    crop = intensity[c - h:c + h + 1, c - h:c + h + 1]
    total = crop.sum()
    if total <= 0:
        raise DegeneratePupilError("cropped PSF has zero energy")
    return crop / total


def psf_rgb(mask: PhaseMask, psi_ref: float, bands: SpectralBands = DEFAULT_BANDS,
            grid: GridSpec = GridSpec()) -> np.ndarray:
    """Three-channel PSF, shape (psf_crop, psf_crop, 3) in band order.

    psi_ref is the defocus at the mask's reference wavelength; each channel
    sees psi_at_wavelength(psi_ref, lam_ref, lam_c) and the dispersed mask
    phase. Channels are normalized independently.
    """
    k = grid.psf_crop
    out = np.empty((k, k, 3))
    for ci, (_, lam) in enumerate(bands.channels):
        pupil = build_pupil(mask, psi_ref, lam, grid)
        out[:, :, ci] = psf_monochrome(pupil, grid)
    return out


def channel_width(psf_channel: np.ndarray) -> float:
    """Second-moment radius sqrt(sum p * r^2 / sum p) about the centroid.

    Zero only when all mass sits on one sample.
    """
    p = np.asarray(psf_channel, dtype=float)
    if p.ndim != 2:
        raise DomainError("channel_width expects a 2-D image")
    if np.any(p < 0):
        raise DomainError("PSF samples must be non-negative")
    mass = p.sum()
    if mass <= 0:
        raise DomainError("zero-mass image has no width")
    ys, xs = np.mgrid[0:p.shape[0], 0:p.shape[1]]
    cx = (p * xs).sum() / mass
    cy = (p * ys).sum() / mass
    r2 = (xs - cx) ** 2 + (ys - cy) ** 2
    return float(np.sqrt((p * r2).sum() / mass))
