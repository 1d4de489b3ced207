"""chromacode: simulation and reconstruction toolkit for spatiotemporally
phase-coded motion imaging.

Core surface: pupil/PSF engine (optics), exposure-coding schedules (coding),
coded image formation (simulate), (x,t) spectral analysis (spectral),
classical deconvolution + metrics (restore), dataset synthesis (dataset),
and the `chromacode` CLI.
"""

from .errors import (ChromacodeError, DataError, DegeneratePupilError,
                     DomainError, ValidationError)
from .optics import (CLEAR_MASK, DEFAULT_BANDS, DEFAULT_MASK, ComplexField,
                     GridSpec, LensSpec, PhaseMask, PsfStack, SpectralBands,
                     build_pupil, channel_width, defocus_psi, mask_phase_profile,
                     psf_monochrome, psf_rgb, psi_at_wavelength)
from .coding import (DEFAULT_FLUTTER_CODE, CameraCoding, CodingKind,
                     ExposureSchedule, make_schedule, open_fraction)
from .fileio import (read_json, read_pfm, read_png, write_json, write_pfm,
                     write_png)
from .simulate import (DEFAULT_GAMMA, CodedImage, FrameSequence, PointScene,
                       ScenePoint, add_awgn, clear_psf_cache, code_exposure,
                       conv2_reflect, decode_display, encode_display,
                       render_points, rotating_target, schedule_psfs,
                       splat_bilinear, trace_centroid)
from .spectral import (XtSlice, XtSpectrum, align_phase_dc, phase_colorfulness,
                       phase_unwrap_2d, xt_psf, xt_spectrum)
from .restore import (DeconvParams, EvalReport, flutter_invert, lucy_richardson,
                      parabolic_kernel, psnr, smear_matrix, ssim)
from .dataset import (DatasetConfig, Manifest, assign_splits, build_dataset,
                      coding_fingerprint, expected_pair_count, pair_seed,
                      verify_manifest)

__version__ = "0.1.0"
