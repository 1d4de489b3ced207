"""Structured configuration: YAML files, dotted-key overrides, resolution to
domain objects, and provenance echo.

Every CLI run starts from the defaults below, deep-merges the --config file
over them, then applies --set key=value pairs (dotted keys, YAML-parsed
values). The fully resolved mapping is written into each output directory as
resolved_config.yaml so any artifact can be traced to its exact settings.
"""

from __future__ import annotations

import copy
import functools
import os
from pathlib import Path

import yaml

from .coding import DEFAULT_FLUTTER_CODE, CameraCoding, CodingKind
from .dataset import DatasetConfig
from .errors import ChromacodeError, DataError, ValidationError
from .optics import CLEAR_MASK, GridSpec, PhaseMask, SpectralBands
from .simulate import PointScene, ScenePoint

DEFAULTS: dict = {
    "seed": 0,
    "gamma": 2.2,
    "camera": {
        "kind": "sweep",
        "flutter_code": DEFAULT_FLUTTER_CODE,
        "v_max": 20.0,
        "psi_start": 0.0,
        "psi_end": 8.0,
        "n_steps": 64,
    },
    "mask": {
        "clear": False,
        "rings": [[0.55, 0.8, 6.5], [0.8, 1.0, 13.2]],
        "reference_wavelength_nm": 455.0,
    },
    "bands": {"R": 610.0, "G": 530.0, "B": 455.0},
    "grid": {"pupil_samples": 256, "pad_factor": 2, "psf_crop": 65},
    "psf": {"n_samples": 9},
    "scene": {
        "canvas": [192, 128],
        "points": [
            {"x": 48.0, "y": 40.0, "vx": 0.0, "vy": 0.0, "rgb": [0.6, 0.6, 0.6]},
            {"x": 64.0, "y": 88.0, "vx": 24.0, "vy": 0.0, "rgb": [0.6, 0.6, 0.6]},
            {"x": 120.0, "y": 36.0, "vx": 0.0, "vy": 20.0, "rgb": [0.6, 0.6, 0.6]},
            {"x": 128.0, "y": 80.0, "vx": 18.0, "vy": 12.0, "rgb": [0.6, 0.6, 0.6]},
        ],
    },
    "dots": {"codings": ["static", "flutter", "parabolic", "sweep"]},
    "spectrum": {
        "codings": ["static", "flutter", "parabolic", "sweep"],
        "velocities": [10.0],
        "width": None,
        "amplitude_floor_rel": 0.01,
    },
    "dataset": {
        "frame_root": None,
        "lengths": [9],
        "sigmas": [0.0],
        "stride": None,
        "split": [0.8, 0.1, 0.1],
    },
    "deconv": {
        "baseline": "lr",
        "input_dir": None,
        "psf_pfm": None,
        "kernel": "parabolic",
        "iterations": 50,
        "epsilon": 1.0e-12,
        "ridge_lambda": 0.0,
        "motion_len": 52,
        "axis": "x",
    },
    "eval": {
        "manifest": None,
        "split": None,
        "recon_dir": None,
        "sharp_dir": None,
    },
}


def _deep_merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config(path: str | os.PathLike | None) -> dict:
    """Defaults deep-merged with an optional YAML file."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is None:
        return cfg
    try:
        with open(path) as f:
            loaded = yaml.safe_load(f) or {}
    except FileNotFoundError as exc:
        raise DataError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ValidationError(f"config file {path} is not valid YAML: {exc}") from exc
    if not isinstance(loaded, dict):
        raise ValidationError(f"config file {path} must contain a mapping")
    return _deep_merge(cfg, loaded)


def apply_overrides(cfg: dict, assignments: list[str]) -> dict:
    """Apply --set key.path=value pairs; values are YAML-parsed."""
    out = copy.deepcopy(cfg)
    for text in assignments:
        if "=" not in text:
            raise ValidationError(f"override {text!r} is not of the form key=value")
        key, raw = text.split("=", 1)
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ValidationError(f"cannot parse override value {raw!r}: {exc}") from exc
        node = out
        parts = key.strip().split(".")
        for part in parts[:-1]:
            nxt = node.get(part)
            if not isinstance(nxt, dict):
                nxt = {}
                node[part] = nxt
            node = nxt
        node[parts[-1]] = value
    return out


def dump_resolved(cfg: dict, out_dir: str | os.PathLike) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "resolved_config.yaml", "w") as f:
        yaml.safe_dump(cfg, f, sort_keys=True, default_flow_style=False)


# ----------------------------------------------------------------------------
# resolution to domain objects
# ----------------------------------------------------------------------------


def _section(name: str):
    """Turn raw coercion failures (None where a number belongs, missing keys)
    into config errors naming the offending section."""
    def wrap(fn):
        @functools.wraps(fn)
        def inner(cfg, *args, **kwargs):
            try:
                return fn(cfg, *args, **kwargs)
            except ChromacodeError:
                raise
            except (KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"bad {name} section: {exc}") from exc
        return inner
    return wrap


@_section("mask")
def mask_from(cfg: dict) -> PhaseMask:
    section = cfg["mask"]
    if section.get("clear"):
        return CLEAR_MASK
    rings = tuple(tuple(float(v) for v in ring) for ring in section["rings"])
    return PhaseMask(rings=rings,
                     reference_wavelength_nm=float(section["reference_wavelength_nm"]))


@_section("grid")
def grid_from(cfg: dict) -> GridSpec:
    g = cfg["grid"]
    return GridSpec(pupil_samples=int(g["pupil_samples"]),
                    pad_factor=int(g["pad_factor"]),
                    psf_crop=int(g["psf_crop"]))


@_section("bands")
def bands_from(cfg: dict) -> SpectralBands:
    b = cfg["bands"]
    return SpectralBands(channels=(("R", float(b["R"])), ("G", float(b["G"])),
                                   ("B", float(b["B"]))))


@_section("camera")
def camera_from(cfg: dict, kind: str | None = None) -> CameraCoding:
    cam = cfg["camera"]
    return CameraCoding(
        kind=CodingKind.parse(kind if kind is not None else cam["kind"]),
        flutter_code=str(cam["flutter_code"]),
        v_max_px_per_exposure=float(cam["v_max"]),
        psi_range=(float(cam["psi_start"]), float(cam["psi_end"])),
        mask=mask_from(cfg),
    )


@_section("scene")
def scene_from(cfg: dict) -> PointScene:
    section = cfg["scene"]
    points = []
    for p in section["points"]:
        rgb = p.get("rgb", [1.0, 1.0, 1.0])
        points.append(ScenePoint(x0=float(p["x"]), y0=float(p["y"]),
                                 vx=float(p.get("vx", 0.0)), vy=float(p.get("vy", 0.0)),
                                 intensity=(float(rgb[0]), float(rgb[1]), float(rgb[2]))))
    w, h = section["canvas"]
    return PointScene(points=tuple(points), canvas=(int(w), int(h)))


@_section("dataset")
def dataset_from(cfg: dict) -> DatasetConfig:
    d = cfg["dataset"]
    stride = d.get("stride")
    return DatasetConfig(
        sequence_lengths=tuple(int(v) for v in d["lengths"]),
        noise_sigmas=tuple(float(v) for v in d["sigmas"]),
        stride=None if stride in (None, "") else int(stride),
        split=tuple(float(v) for v in d["split"]),
        seed=int(cfg["seed"]),
        gamma=float(cfg["gamma"]),
        coding=camera_from(cfg),
        grid=grid_from(cfg),
    )


def require(cfg_value, dotted_name: str):
    if cfg_value in (None, ""):
        raise ValidationError(f"configuration key {dotted_name} is required")
    return cfg_value
