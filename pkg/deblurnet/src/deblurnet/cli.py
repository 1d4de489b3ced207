"""Command line entry points: train, infer, eval.

Exit codes: 0 success, 1 usage or configuration problem, 2 data problem.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .data import read_manifest  # noqa: F401  (re-exported surface check)
from .evaluate import evaluate
from .fileio import DataFileError, read_png, write_pfm, write_png
from .infer import load_checkpoint, restore
from .train import TrainConfig, train


def cmd_train(args) -> int:
    cfg = TrainConfig(manifest=args.manifest, out_dir=args.out, model=args.model,
                      patch_size=args.patch_size, batch_size=args.batch_size,
                      epochs=args.epochs, samples_per_epoch=args.samples_per_epoch,
                      learning_rate=args.lr, huber_delta=args.huber_delta,
                      noise_sigma=args.noise_sigma, noise_fixed=args.noise_fixed,
                      seed=args.seed, val_split=args.val_split)
    ckpt, log = train(cfg)
    best = log["best"]
    print(f"trained {args.model} for {args.epochs} epochs; "
          f"best val PSNR {best['val_psnr']:.2f} dB (epoch {best['epoch']}); "
          f"checkpoint {ckpt}")
    return 0


def cmd_infer(args) -> int:
    model, kind, _ = load_checkpoint(args.checkpoint)
    src = Path(args.input)
    paths = sorted(src.glob("*.png")) if src.is_dir() else [src]
    if not paths:
        raise DataFileError(f"no PNG inputs under {src}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for p in paths:
        restored = restore(model, read_png(p))
        write_png(out / p.name, restored)
        write_pfm(out / p.with_suffix(".pfm").name, restored)
    print(f"restored {len(paths)} image(s) with {kind} model into {out}")
    return 0


def cmd_eval(args) -> int:
    model, kind, _ = load_checkpoint(args.checkpoint)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = evaluate(model, args.manifest, args.split,
                      save_dir=out / "restored" if args.save_images else None)
    report.write_csv(out / "report.csv")
    report.write_json(out / "report.json")
    for cell in report.grouped():
        print(f"L={cell['seq_len']} sigma={cell['sigma']:g}: "
              f"{cell['psnr']:.2f} dB / {cell['ssim']:.4f} ({cell['count']} pairs)")
    print(f"evaluated {kind} model on split {args.split!r}; report in {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deblurnet",
                                     description="Train and evaluate residual deblurring networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="Train a model on a dataset manifest")
    p.add_argument("--manifest", required=True, help="manifest.jsonl of the dataset build")
    p.add_argument("--out", required=True, help="output directory for checkpoint and log")
    p.add_argument("--model", choices=["unet", "shallow"], default="unet")
    p.add_argument("--patch-size", type=int, default=128)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--samples-per-epoch", type=int, default=256)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--huber-delta", type=float, default=0.01)
    p.add_argument("--noise-sigma", type=float, default=9.0)
    p.add_argument("--noise-fixed", action="store_true",
                   help="use the sigma value as-is instead of sampling U[0, sigma]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--val-split", default="val")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="Restore a PNG or a directory of PNGs")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True, help="PNG file or directory")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval", help="Grouped PSNR/SSIM report over one split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--out", required=True)
    p.add_argument("--save-images", action="store_true")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 1
    except DataFileError as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
