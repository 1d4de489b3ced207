"""CNN deblurring for coded-exposure imagery: models, training, evaluation."""

from .data import PairRecord, PatchDataset, load_pair, read_manifest, split_records
from .evaluate import evaluate
from .fileio import (DataFileError, load_linear, read_pfm, read_png, write_json,
                     write_pfm, write_png)
from .infer import load_checkpoint, restore, save_checkpoint
from .models import (MODELS, ResUNet, ShallowNet, build_model, conv_block,
                     parameter_count, zero_init_output)
from .report import EvalReport, psnr, ssim
from .train import TrainConfig, train

__all__ = [
    "DataFileError", "EvalReport", "MODELS", "PairRecord", "PatchDataset",
    "ResUNet", "ShallowNet", "TrainConfig", "build_model", "conv_block",
    "evaluate", "load_checkpoint", "load_linear", "load_pair",
    "parameter_count", "psnr", "read_manifest", "read_pfm", "read_png",
    "restore", "save_checkpoint", "split_records", "ssim", "train",
    "write_json", "write_pfm", "write_png", "zero_init_output",
]
