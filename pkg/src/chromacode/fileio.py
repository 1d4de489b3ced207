"""Image and report file formats: PNG (display-encoded), PFM (linear float),
CSV/JSON report helpers.

PFM layout: header line "PF" (color) or "Pf" (grayscale), then "width height",
then the scale line whose sign encodes byte order (negative = little-endian),
then float32 samples row-major with the bottom row first.
"""

from __future__ import annotations

import json
import os

import numpy as np
from PIL import Image

from .errors import DataError


def write_png(path: str | os.PathLike, image01: np.ndarray, bits: int = 8) -> None:
    """Write a [0,1] float image (H,W) or (H,W,3) as an 8- or 16-bit PNG."""
    arr = np.asarray(image01, dtype=float)
    if arr.ndim not in (2, 3):
        raise DataError(f"cannot write PNG with shape {arr.shape}")
    arr = np.clip(arr, 0.0, 1.0)
    if bits == 8:
        q = np.round(arr * 255.0).astype(np.uint8)
    elif bits == 16:
        q = np.round(arr * 65535.0).astype(np.uint16)
    else:
        raise DataError(f"unsupported PNG bit depth {bits}")
    if arr.ndim == 2:
        img = Image.fromarray(q)
    elif bits == 8:
        img = Image.fromarray(q, mode="RGB")
    else:
        # no native 16-bit RGB in Pillow; linear data belongs in PFM anyway
        raise DataError("16-bit RGB PNG not supported, write PFM for high precision")
    img.save(path, format="PNG")


def read_png(path: str | os.PathLike) -> np.ndarray:
    """Read a PNG into a [0,1] float array, (H,W) or (H,W,3)."""
    try:
        img = Image.open(path)
    except (FileNotFoundError, OSError) as exc:
        raise DataError(f"cannot read image {path}: {exc}") from exc
    if img.mode in ("I;16", "I"):
        arr = np.asarray(img, dtype=np.float64) / 65535.0
    elif img.mode in ("L", "RGB"):
        arr = np.asarray(img, dtype=np.float64) / 255.0
    elif img.mode in ("RGBA", "LA", "P"):
        arr = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    else:
        raise DataError(f"unsupported PNG mode {img.mode} in {path}")
    return arr


def write_pfm(path: str | os.PathLike, image: np.ndarray) -> None:
    """Write a float image (H,W) or (H,W,3) as little-endian PFM."""
    arr = np.asarray(image, dtype=np.float32)
    if arr.ndim == 3 and arr.shape[2] == 3:
        header = b"PF"
    elif arr.ndim == 2:
        header = b"Pf"
    else:
        raise DataError(f"cannot write PFM with shape {arr.shape}")
    h, w = arr.shape[:2]
    with open(path, "wb") as f:
        f.write(header + b"\n")
        f.write(f"{w} {h}\n".encode("ascii"))
        f.write(b"-1.0\n")
        f.write(arr[::-1].astype("<f4").tobytes())


def read_pfm(path: str | os.PathLike) -> np.ndarray:
    """Read a PFM file into a float64 array, (H,W) or (H,W,3)."""
    try:
        with open(path, "rb") as f:
            header = f.readline().strip()
            if header not in (b"PF", b"Pf"):
                raise DataError(f"not a PFM file: {path}")
            dims = f.readline().split()
            w, h = int(dims[0]), int(dims[1])
            scale = float(f.readline())
            dtype = "<f4" if scale < 0 else ">f4"
            count = w * h * (3 if header == b"PF" else 1)
            data = np.frombuffer(f.read(count * 4), dtype=dtype, count=count)
    except FileNotFoundError as exc:
        raise DataError(f"cannot read PFM {path}: {exc}") from exc
    shape = (h, w, 3) if header == b"PF" else (h, w)
    return data.reshape(shape)[::-1].astype(np.float64)


def write_json(path: str | os.PathLike, obj) -> None:
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def read_json(path: str | os.PathLike):
    try:
        with open(path) as f:
            return json.load(f)
    except FileNotFoundError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
