"""Checkpoint loading and full-frame restoration.

The U-shaped model needs both spatial dimensions divisible by 16 so the
four pooling levels align with their skips; arbitrary frames are reflect-
padded up to the next multiple and the output is cropped back, so callers
always get out what they put in, clipped to [0,1].
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

from .fileio import DataFileError
from .models import build_model

ALIGNMENT = 16


def save_checkpoint(path, model, kind: str, extra: dict | None = None) -> None:
    payload = {"kind": kind, "state": model.state_dict()}
    if extra:
        payload["extra"] = extra
    torch.save(payload, path)


def load_checkpoint(path):
    """Rebuild the saved model in eval mode; returns (model, kind, extra)."""
    p = Path(path)
    if not p.is_file():
        raise DataFileError(f"no checkpoint at {p}")
    payload = torch.load(p, map_location="cpu", weights_only=True)
    model = build_model(payload["kind"])
    model.load_state_dict(payload["state"])
    model.eval()
    return model, payload["kind"], payload.get("extra", {})


def restore(model: torch.nn.Module, image: np.ndarray) -> np.ndarray:
    """Restore one (H,W,3) image in [0,1]; output has the same shape."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H,W,3) image, got shape {arr.shape}")
    h, w = arr.shape[:2]
    pad_h = (-h) % ALIGNMENT
    pad_w = (-w) % ALIGNMENT
    x = torch.from_numpy(arr.transpose(2, 0, 1)).float().unsqueeze(0)
    if pad_h or pad_w:
        x = F.pad(x, (0, pad_w, 0, pad_h), mode="reflect")
    model.eval()
    with torch.no_grad():
        y = model(x)
    out = y[0, :, :h, :w].numpy().transpose(1, 2, 0)
    return np.clip(out, 0.0, 1.0)
