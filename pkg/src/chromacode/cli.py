"""Command-line entry point: one binary, one subcommand per pipeline stage.

    chromacode <psf|dots|spectrum|dataset|deconv|eval>
               [--config file.yaml] [--set key=value ...] --out DIR [--seed N]

Every run writes resolved_config.yaml into the output directory as
provenance. Exit codes: 0 success, 1 usage/config error, 2 data error;
failures print one machine-parsable "error: <category>: <message>" line on
standard error.

Figure-style outputs are written twice when --viz is given: the raw
quantized image (metric-grade, never visually transformed) and a _viz
variant with dilation and display gamma applied for inspection.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import config as cfgmod
from .coding import CodingKind, make_schedule
from .dataset import build_dataset, verify_manifest, Manifest
from .errors import DataError, DomainError, ValidationError
from .fileio import read_pfm, read_png, write_json, write_pfm, write_png
from .optics import channel_width, psf_rgb
from .restore import (DeconvParams, EvalReport, flutter_invert, lucy_richardson,
                      parabolic_kernel, psnr, ssim)
from .simulate import encode_display, render_points
from .spectral import align_phase_dc, phase_colorfulness, xt_psf, xt_spectrum


def _steps_for(coding, requested: int) -> int:
    # flutter schedules need a multiple of the code length; round up
    if coding.kind is CodingKind.FLUTTER:
        code_len = len(coding.flutter_code)
        if requested % code_len != 0:
            return code_len * max(1, -(-requested // code_len))
    return requested


def _normalize_channels(img: np.ndarray) -> np.ndarray:
    out = np.zeros_like(img)
    for c in range(img.shape[2]):
        peak = img[:, :, c].max()
        if peak > 0:
            out[:, :, c] = img[:, :, c] / peak
    return out


def _viz_transform(img: np.ndarray) -> np.ndarray:
    dilated = ndimage.grey_dilation(img, size=(3, 3, 1))
    return encode_display(np.clip(dilated, 0.0, 1.0))


def _montage(images: list[np.ndarray], gap: int = 2) -> np.ndarray:
    h = max(im.shape[0] for im in images)
    w = max(im.shape[1] for im in images)
    cols = 2
    rows = -(-len(images) // cols)
    canvas = np.full((rows * h + (rows - 1) * gap, cols * w + (cols - 1) * gap, 3), 0.15)
    for i, im in enumerate(images):
        r, c = divmod(i, cols)
        y, x = r * (h + gap), c * (w + gap)
        canvas[y:y + im.shape[0], x:x + im.shape[1]] = im
    return canvas


# ----------------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------------


def cmd_psf(cfg: dict, args) -> int:
    out = Path(args.out)
    mask = cfgmod.mask_from(cfg)
    grid = cfgmod.grid_from(cfg)
    bands = cfgmod.bands_from(cfg)
    lo, hi = float(cfg["camera"]["psi_start"]), float(cfg["camera"]["psi_end"])
    n = int(cfg["psf"]["n_samples"])
    psis = np.linspace(lo, hi, n) if n > 1 else np.array([lo])
    names = [name for name, _ in bands.channels]
    rows = []
    for psi in psis:
        p = psf_rgb(mask, float(psi), bands, grid)
        widths = [channel_width(p[:, :, c]) for c in range(3)]
        rows.append((psi, widths, names[int(np.argmin(widths))]))
        stem = f"psf_psi_{psi:g}"
        write_png(out / f"{stem}.png", _normalize_channels(p))
        write_pfm(out / f"{stem}.pfm", p)
    with open(out / "widths.csv", "w") as f:
        f.write("psi," + ",".join(f"width_{n}" for n in names) + ",narrowest\n")
        for psi, widths, narrowest in rows:
            f.write(f"{psi:g}," + ",".join(f"{w:.6f}" for w in widths) + f",{narrowest}\n")
    print(f"wrote {len(rows)} PSF strips and widths.csv to {out}")
    return 0


def cmd_dots(cfg: dict, args) -> int:
    out = Path(args.out)
    scene = cfgmod.scene_from(cfg)
    grid = cfgmod.grid_from(cfg)
    bands = cfgmod.bands_from(cfg)
    panel = []
    for kind in cfg["dots"]["codings"]:
        coding = cfgmod.camera_from(cfg, kind=kind)
        n_steps = _steps_for(coding, int(cfg["camera"]["n_steps"]))
        schedule = make_schedule(coding, n_steps)
        image = render_points(scene, coding, schedule, grid, bands)
        write_png(out / f"{coding.kind.value}.png", image.pixels)
        shown = image.pixels
        if args.viz:
            shown = _viz_transform(image.pixels)
            write_png(out / f"{coding.kind.value}_viz.png", shown)
        panel.append(shown)
        if image.clipped:
            print(f"note: {coding.kind.value} render clipped at canvas or range limits")
    write_png(out / "montage.png", _montage(panel))
    print(f"wrote {len(panel)} coding renders + montage to {out}")
    return 0


def cmd_spectrum(cfg: dict, args) -> int:
    out = Path(args.out)
    grid = cfgmod.grid_from(cfg)
    bands = cfgmod.bands_from(cfg)
    floor = float(cfg["spectrum"]["amplitude_floor_rel"])
    width = cfg["spectrum"]["width"]
    metrics = {}
    for kind in cfg["spectrum"]["codings"]:
        coding = cfgmod.camera_from(cfg, kind=kind)
        n_steps = _steps_for(coding, int(cfg["camera"]["n_steps"]))
        schedule = make_schedule(coding, n_steps)
        for velocity in cfg["spectrum"]["velocities"]:
            tag = f"{coding.kind.value}_v{float(velocity):g}"
            slice_ = xt_psf(coding, float(velocity), schedule, grid, bands,
                            width=None if width in (None, "") else int(width))
            spec = xt_spectrum(slice_, amplitude_floor_rel=floor)
            slice_img = np.moveaxis(slice_.data, 0, 2)
            amp = np.moveaxis(spec.amplitude, 0, 2)
            phase = np.moveaxis(align_phase_dc(spec), 0, 2)
            write_png(out / f"{tag}_slice.png", _normalize_channels(slice_img))
            write_png(out / f"{tag}_amplitude.png",
                      _normalize_channels(np.log1p(amp)))
            span = np.abs(phase).max() or 1.0
            write_png(out / f"{tag}_phase.png", np.clip(0.5 + phase / (2 * span), 0, 1))
            write_pfm(out / f"{tag}_amplitude.pfm", amp)
            write_pfm(out / f"{tag}_phase.pfm", phase)
            metrics[tag] = {"phase_colorfulness": phase_colorfulness(spec)}
    write_json(out / "metrics.json", metrics)
    print(f"wrote {len(metrics)} slice/amplitude/phase triplets to {out}")
    return 0


def cmd_dataset(cfg: dict, args) -> int:
    out = Path(args.out)
    frame_root = cfgmod.require(cfg["dataset"]["frame_root"], "dataset.frame_root")
    ds_config = cfgmod.dataset_from(cfg)
    manifest = build_dataset(frame_root, ds_config, out)
    for err in manifest.errors:
        print(f"warning: {err}", file=sys.stderr)
    report = verify_manifest(out / "manifest.jsonl", out, frame_root, ds_config)
    write_json(out / "verify_report.json", report)
    print(f"built {len(manifest.records)} pairs "
          f"({manifest.skipped_windows} windows skipped), "
          f"verified {report['n_regenerated']} regenerations")
    if not report["ok"]:
        raise DataError("; ".join(report["violations"][:5]))
    return 0


def cmd_deconv(cfg: dict, args) -> int:
    out = Path(args.out)
    section = cfg["deconv"]
    input_dir = Path(cfgmod.require(section["input_dir"], "deconv.input_dir"))
    images = sorted(input_dir.glob("*.png"))
    if not images:
        raise DataError(f"no PNG inputs under {input_dir}")
    params = DeconvParams(iterations=int(section["iterations"]),
                          epsilon=float(section["epsilon"]),
                          regularization_lambda=float(section["ridge_lambda"]))
    baseline = section["baseline"]
    if baseline == "lr":
        if section["psf_pfm"]:
            kernel = read_pfm(section["psf_pfm"])
            if kernel.ndim == 3:
                kernel = kernel.mean(axis=2)
        elif section["kernel"] == "parabolic":
            kernel = parabolic_kernel(cfgmod.camera_from(cfg, kind="parabolic"))
        else:
            raise ValidationError("deconv.psf_pfm or deconv.kernel=parabolic required for lr")
        restore = lambda img: np.clip(lucy_richardson(img, kernel, params), 0.0, 1.0)
    elif baseline == "flutter":
        code = str(cfg["camera"]["flutter_code"])
        motion = int(section["motion_len"])
        axis = str(section["axis"])
        restore = lambda img: np.clip(
            flutter_invert(img, code, motion, axis, params), 0.0, 1.0)
    else:
        raise ValidationError(f"unknown deconv baseline {baseline!r}")
    for path in images:
        restored = restore(read_png(path))
        write_png(out / path.name, restored)
        write_pfm(out / (path.stem + ".pfm"), restored)
    print(f"deconvolved {len(images)} images with baseline {baseline} to {out}")
    return 0


def _parse_pair_tag(name: str) -> tuple[int, float]:
    import re
    m = re.search(r"_L(\d+)_s([0-9.]+)$", name)
    if m:
        return int(m.group(1)), float(m.group(2))
    return 0, 0.0


def cmd_eval(cfg: dict, args) -> int:
    out = Path(args.out)
    section = cfg["eval"]
    report = EvalReport()
    if section["manifest"]:
        manifest_path = Path(section["manifest"])
        recon_dir = Path(cfgmod.require(section["recon_dir"], "eval.recon_dir"))
        manifest = Manifest.read(manifest_path)
        root = manifest_path.parent
        for rec in manifest.records:
            if section["split"] and rec["split"] != section["split"]:
                continue
            recon_path = recon_dir / f"{rec['pair_id']}.png"
            if not recon_path.is_file():
                raise DataError(f"missing reconstruction {recon_path}")
            a = read_png(recon_path)
            b = read_png(root / rec["sharp_path"])
            report.add(rec["sequence_length"], rec["sigma"], psnr(a, b), ssim(a, b))
    else:
        recon_dir = Path(cfgmod.require(section["recon_dir"], "eval.recon_dir"))
        sharp_dir = Path(cfgmod.require(section["sharp_dir"], "eval.sharp_dir"))
        names = sorted({p.name for p in recon_dir.glob("*.png")}
                       & {p.name for p in sharp_dir.glob("*.png")})
        if not names:
            raise DataError(f"no common PNG names between {recon_dir} and {sharp_dir}")
        for name in names:
            a = read_png(recon_dir / name)
            b = read_png(sharp_dir / name)
            length, sigma = _parse_pair_tag(Path(name).stem)
            report.add(length, sigma, psnr(a, b), ssim(a, b))
    report.write_csv(out / "report.csv")
    report.write_json(out / "report.json")
    for row in report.by_length():
        print(f"L={row['seq_len']}: PSNR {row['psnr']:.2f} dB, SSIM {row['ssim']:.4f} "
              f"(mean over sigmas {row['sigmas']})")
    return 0


# ----------------------------------------------------------------------------
# parser and entry point
# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chromacode",
        description="Phase-coded motion imaging: simulation, datasets, reconstruction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "psf": (cmd_psf, "Through-focus RGB PSF strips and width-vs-psi CSV"),
        "dots": (cmd_dots, "Moving-dots comparison panel of the four codings"),
        "spectrum": (cmd_spectrum, "(x,t) slices with FT amplitude/phase per coding"),
        "dataset": (cmd_dataset, "Build and verify a coded-blur dataset"),
        "deconv": (cmd_deconv, "Deconvolve a directory with a classical baseline"),
        "eval": (cmd_eval, "PSNR/SSIM report grouped by (length, sigma)"),
    }
    for name, (func, help_text) in handlers.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="YAML configuration file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="dotted-key override, repeatable")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--viz", action="store_true",
                       help="also write dilated/gamma-corrected visualization PNGs")
        p.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        cfg = cfgmod.load_config(args.config)
        cfg = cfgmod.apply_overrides(cfg, args.set)
        if args.seed is not None:
            cfg["seed"] = int(args.seed)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        cfgmod.dump_resolved(cfg, out_dir)
        return args.func(cfg, args)
    except (ValidationError, DomainError) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
