"""Image and report file round trips.

Reads the pair files a dataset build leaves behind: 8- or 16-bit PNG
(display-encoded) and float PFM (linear, little-endian, bottom-up rows).
Training prefers the PFM twin of a PNG when it exists so values need no
gamma handling; metrics then agree with the files on disk exactly.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np
from PIL import Image


class DataFileError(Exception):
    """Missing or malformed input file."""


def read_png(path: str | os.PathLike) -> np.ndarray:
    """PNG to float64 in [0,1]; grayscale is promoted to 3 channels."""
    try:
        img = Image.open(path)
    except FileNotFoundError as exc:
        raise DataFileError(f"cannot read {path}: {exc}") from exc
    arr = np.asarray(img)
    scale = 65535.0 if arr.dtype == np.uint16 else 255.0
    out = arr.astype(np.float64) / scale
    if out.ndim == 2:
        out = np.stack([out] * 3, axis=2)
    return out[:, :, :3]


def write_png(path: str | os.PathLike, image: np.ndarray) -> None:
    arr = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    Image.fromarray((arr * 255.0).round().astype(np.uint8)).save(path)


def read_pfm(path: str | os.PathLike) -> np.ndarray:
    """PFM to float64, (H,W) or (H,W,3); rows are stored bottom-up."""
    try:
        with open(path, "rb") as f:
            header = f.readline().strip()
            if header not in (b"PF", b"Pf"):
                raise DataFileError(f"not a PFM file: {path}")
            dims = f.readline().split()
            w, h = int(dims[0]), int(dims[1])
            scale = float(f.readline())
            dtype = "<f4" if scale < 0 else ">f4"
            count = w * h * (3 if header == b"PF" else 1)
            data = np.frombuffer(f.read(count * 4), dtype=dtype, count=count)
    except FileNotFoundError as exc:
        raise DataFileError(f"cannot read {path}: {exc}") from exc
    shape = (h, w, 3) if header == b"PF" else (h, w)
    return data.reshape(shape)[::-1].astype(np.float64)


def write_pfm(path: str | os.PathLike, image: np.ndarray) -> None:
    arr = np.asarray(image, dtype=np.float32)
    if arr.ndim == 3 and arr.shape[2] == 3:
        header = b"PF"
    elif arr.ndim == 2:
        header = b"Pf"
    else:
        raise DataFileError(f"cannot write PFM with shape {arr.shape}")
    h, w = arr.shape[:2]
    with open(path, "wb") as f:
        f.write(header + b"\n")
        f.write(f"{w} {h}\n".encode("ascii"))
        f.write(b"-1.0\n")
        f.write(arr[::-1].astype("<f4").tobytes())


def load_linear(path: str | os.PathLike) -> np.ndarray:
    """Load a pair image, preferring the linear PFM twin of a PNG path."""
    p = Path(path)
    twin = p.with_suffix(".pfm")
    if twin.is_file():
        arr = read_pfm(twin)
        if arr.ndim == 2:
            arr = np.stack([arr] * 3, axis=2)
        return arr
    return read_png(p)


def write_json(path: str | os.PathLike, obj) -> None:
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")
