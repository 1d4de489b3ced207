"""Residual restoration networks.

Two architectures share one contract: the network estimates a residual
correction and adds it to the blurred input through a global skip, so an
untrained model whose output convolution is zero-initialized is exactly the
identity. All convolutions are 3x3 without bias, each followed by batch
normalization and a leaky activation; blocks stack that sequence twice.

The U-shaped model halves the spatial dimensions four times with max-pooling
and mirrors each level with a learned transposed-convolution upsampling whose
output is concatenated with the same-scale encoder features. The shallow
ablation model keeps full resolution throughout: ten stacked blocks at 32
filters, about 1.2% of the large model's weight count.
"""

from __future__ import annotations

import torch
import torch.nn as nn

LEAKY_SLOPE = 0.01


def conv_block(in_ch: int, out_ch: int) -> nn.Sequential:
    """Two rounds of 3x3 conv (no bias) + batch norm + leaky activation."""
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, kernel_size=3, padding=1, bias=False),
        nn.BatchNorm2d(out_ch),
        nn.LeakyReLU(LEAKY_SLOPE, inplace=True),
        nn.Conv2d(out_ch, out_ch, kernel_size=3, padding=1, bias=False),
        nn.BatchNorm2d(out_ch),
        nn.LeakyReLU(LEAKY_SLOPE, inplace=True),
    )


class Down(nn.Module):
    """2x2 max-pool then a conv block; halves H and W exactly."""

    def __init__(self, in_ch: int, out_ch: int):
        super().__init__()
        self.pool = nn.MaxPool2d(2)
        self.conv = conv_block(in_ch, out_ch)

    def forward(self, x):
        return self.conv(self.pool(x))


class Up(nn.Module):
    """Learned 2x upsampling, concatenation with the skip, then a conv block.

    The transposed convolution keeps the channel count, so the block input
    is skip channels + carried channels.
    """

    def __init__(self, carried_ch: int, skip_ch: int, out_ch: int):
        super().__init__()
        self.upsample = nn.ConvTranspose2d(carried_ch, carried_ch,
                                           kernel_size=2, stride=2, bias=False)
        self.conv = conv_block(carried_ch + skip_ch, out_ch)

    def forward(self, x, skip):
        return self.conv(torch.cat([skip, self.upsample(x)], dim=1))


class ResUNet(nn.Module):
    """Four-level U-shaped residual restorer, 3-channel in and out."""

    def __init__(self):
        super().__init__()
        self.inc = conv_block(3, 64)
        self.down1 = Down(64, 128)
        self.down2 = Down(128, 256)
        self.down3 = Down(256, 512)
        self.down4 = Down(512, 512)
        self.up1 = Up(512, 512, 256)
        self.up2 = Up(256, 256, 128)
        self.up3 = Up(128, 128, 64)
        self.up4 = Up(64, 64, 64)
        self.outc = nn.Conv2d(64, 3, kernel_size=3, padding=1, bias=False)

    def forward(self, x):
        _check_input(x)
        f0 = self.inc(x)
        f1 = self.down1(f0)
        f2 = self.down2(f1)
        f3 = self.down3(f2)
        f4 = self.down4(f3)
        y = self.up1(f4, f3)
        y = self.up2(y, f2)
        y = self.up3(y, f1)
        y = self.up4(y, f0)
        return x + self.outc(y)


class ShallowNet(nn.Module):
    """Ten full-resolution blocks at 32 filters plus a 3-filter head."""

    def __init__(self):
        super().__init__()
        blocks = [conv_block(3, 32)]
        blocks += [conv_block(32, 32) for _ in range(9)]
        self.body = nn.Sequential(*blocks)
        self.outc = nn.Conv2d(32, 3, kernel_size=3, padding=1, bias=False)

    def forward(self, x):
        _check_input(x)
        return x + self.outc(self.body(x))


MODELS = {"unet": ResUNet, "shallow": ShallowNet}


def build_model(kind: str) -> nn.Module:
    try:
        return MODELS[kind]()
    except KeyError:
        raise ValueError(f"unknown model kind {kind!r}, expected one of {sorted(MODELS)}")


def zero_init_output(model: nn.Module) -> nn.Module:
    """Zero the residual head so the untrained model is the identity map."""
    with torch.no_grad():
        model.outc.weight.zero_()
    return model


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


def _check_input(x: torch.Tensor) -> None:
    if x.ndim != 4 or x.shape[1] != 3:
        raise ValueError(f"expected (N,3,H,W) input, got {tuple(x.shape)}")
