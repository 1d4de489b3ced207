"""Exposure-coding camera models and their temporal schedules.

Four cameras are modeled, each discretized into n uniform time steps over a
normalized exposure t in [0, 1]:

  static     - shutter open, focus fixed (psi = 0), sensor still.
  flutter    - shutter driven by a binary code, focus fixed, sensor still.
  parabolic  - shutter open, focus fixed, sensor swept along x on a parabola
               so its velocity covers [-v_max, +v_max] linearly in time.
  sweep      - shutter open, sensor still, defocus psi swept linearly across
               a range (default 0 to 8) with a ring phase mask in the pupil.

Schedules carry (t_norm, psi, shift, shutter state) per step; open steps are
weighted 1/n_open so the weights of open steps always sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, ValidationError
from .optics import DEFAULT_MASK, CLEAR_MASK, PhaseMask

# Published 52-bit near-optimal fluttered-shutter sequence (26 ones, so the
# duty cycle is exactly one half). Stored as data; fully configurable.
DEFAULT_FLUTTER_CODE = "1010000111000001010000110011110111010111001001100111"


class CodingKind(str, Enum):
    STATIC = "static"
    FLUTTER = "flutter"
    PARABOLIC = "parabolic"
    SWEEP = "sweep"

    @classmethod
    def parse(cls, text: str) -> "CodingKind":
        aliases = {
            "static": cls.STATIC,
            "flutter": cls.FLUTTER,
            "fluttered_shutter": cls.FLUTTER,
            "flutteredshutter": cls.FLUTTER,
            "parabolic": cls.PARABOLIC,
            "parabolic_motion": cls.PARABOLIC,
            "parabolicmotion": cls.PARABOLIC,
            "sweep": cls.SWEEP,
            "phase_sweep": cls.SWEEP,
            "phasesweep": cls.SWEEP,
        }
        key = text.strip().lower()
        if key not in aliases:
            raise ValidationError(f"unknown camera kind {text!r}")
        return aliases[key]


@dataclass(frozen=True)
class CameraCoding:
    """One exposure-coding camera.

    flutter_code applies to FLUTTER only; v_max_px_per_exposure to PARABOLIC
    only; psi_range and mask to SWEEP only (other kinds image through a clear
    aperture in focus).
    """

    kind: CodingKind = CodingKind.STATIC
    flutter_code: str = DEFAULT_FLUTTER_CODE
    v_max_px_per_exposure: float = 20.0
    psi_range: tuple[float, float] = (0.0, 8.0)
    mask: PhaseMask = field(default_factory=lambda: DEFAULT_MASK)

    def __post_init__(self):
        if not self.flutter_code or "1" not in self.flutter_code:
            raise ValidationError("flutter code must contain at least one open bit")
        if any(c not in "01" for c in self.flutter_code):
            raise ValidationError("flutter code must be a string of 0s and 1s")
        if self.v_max_px_per_exposure < 0:
            raise DomainError("v_max must be non-negative")

    def pupil_mask(self) -> PhaseMask:
        """Mask actually in the pupil: the configured one for SWEEP, clear
        aperture for every other camera."""
        return self.mask if self.kind is CodingKind.SWEEP else CLEAR_MASK


@dataclass
class ExposureSchedule:
    """Uniform time discretization of one exposure.

    Parallel arrays over steps: t_norm strictly increasing in [0, 1], psi at
    the mask reference wavelength, shift_px (dx, dy), shutter_open flags.
    Each open step carries weight 1/n_open.
    """

    t_norm: np.ndarray
    psi: np.ndarray
    shift_px: np.ndarray      # (n, 2)
    shutter_open: np.ndarray  # bool

    def __post_init__(self):
        n = len(self.t_norm)
        if n == 0:
            raise ValidationError("schedule must have at least one step")
        if self.psi.shape != (n,) or self.shift_px.shape != (n, 2) or self.shutter_open.shape != (n,):
            raise ValidationError("schedule arrays must have matching lengths")
        if np.any(np.diff(self.t_norm) <= 0):
            raise ValidationError("t_norm must be strictly increasing")
        if not self.shutter_open.any():
            raise ValidationError("schedule must contain at least one open step")

    def __len__(self) -> int:
        return len(self.t_norm)

    @property
    def n_open(self) -> int:
        return int(self.shutter_open.sum())

    @property
    def open_weight(self) -> float:
        """Weight of each open step; open weights sum to exactly 1."""
        return 1.0 / self.n_open


def make_schedule(coding: CameraCoding, n_steps: int) -> ExposureSchedule:
    """Discretize a camera coding into n_steps uniform steps.

    SWEEP: psi_k = psi_start + k*(psi_end - psi_start)/(n_steps - 1), so the
    endpoints hit the configured range exactly. PARABOLIC: shift_x(t) =
    v_max*(t - 1/2)^2, whose derivative 2*v_max*(t - 1/2) sweeps the sensor
    velocity linearly over [-v_max, +v_max]. FLUTTER: n_steps must be a
    multiple of the code length; each bit spans n_steps/len(code) steps.
    """
    if n_steps < 1:
        raise DomainError("n_steps must be >= 1")
    t = (np.arange(n_steps) / (n_steps - 1)) if n_steps > 1 else np.array([0.0])
    psi = np.zeros(n_steps)
    shift = np.zeros((n_steps, 2))
    open_ = np.ones(n_steps, dtype=bool)

    if coding.kind is CodingKind.SWEEP:
        lo, hi = coding.psi_range
        psi = lo + t * (hi - lo) if n_steps > 1 else np.array([float(lo)])
    elif coding.kind is CodingKind.FLUTTER:
        code = coding.flutter_code
        if n_steps % len(code) != 0:
            raise ValidationError(
                f"n_steps={n_steps} is not a multiple of the {len(code)}-bit flutter code"
            )
        rep = n_steps // len(code)
        bits = np.repeat([c == "1" for c in code], rep)
        open_ = bits
    elif coding.kind is CodingKind.PARABOLIC:
        shift[:, 0] = coding.v_max_px_per_exposure * (t - 0.5) ** 2

    return ExposureSchedule(t_norm=t, psi=psi, shift_px=shift, shutter_open=open_)


def open_fraction(schedule: ExposureSchedule) -> float:
    """Fraction of steps with the shutter open (light throughput)."""
    return schedule.n_open / len(schedule)
