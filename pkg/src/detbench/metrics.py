"""Detection-quality and image-quality metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imageio import luma

PSNR_CAP_DB = 99.0


@dataclass(frozen=True)
class ConfusionStats:
    """FNR/FPR/ACC over a batch of binary verdicts.

    A rate is None when its class is absent from the batch (undefined, not 0).
    """

    fnr: float | None
    fpr: float | None
    acc: float
    n_positive: int
    n_negative: int


def confusion(verdicts, labels) -> ConfusionStats:
    verdicts = np.asarray(verdicts, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if verdicts.shape != labels.shape:
        raise ValueError(
            f"verdicts ({verdicts.shape}) and labels ({labels.shape}) differ in length"
        )
    pos = labels == 1
    neg = labels == 0
    n_pos = int(pos.sum())
    n_neg = int(neg.sum())
    fnr = float((verdicts[pos] == 0).mean()) if n_pos else None
    fpr = float((verdicts[neg] == 1).mean()) if n_neg else None
    acc = float((verdicts == labels).mean()) if (n_pos + n_neg) else 0.0
    return ConfusionStats(fnr=fnr, fpr=fpr, acc=acc, n_positive=n_pos, n_negative=n_neg)


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for [0,1] images, capped at 99."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * math.log10(1.0 / mse), PSNR_CAP_DB)


_SSIM_SIGMA = 1.5
_SSIM_RADIUS = 5  # 11-tap window
_SSIM_C1 = 0.01**2
_SSIM_C2 = 0.03**2


def _ssim_window(x: np.ndarray) -> np.ndarray:
    i = np.arange(-_SSIM_RADIUS, _SSIM_RADIUS + 1, dtype=np.float64)
    k = np.exp(-0.5 * (i / _SSIM_SIGMA) ** 2)
    k /= k.sum()
    tmp = ndimage.convolve1d(x, k, axis=0, mode="reflect")
    return ndimage.convolve1d(tmp, k, axis=1, mode="reflect")


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Single-scale structural similarity on the luma plane."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    x = luma(a)
    y = luma(b)
    mu_x = _ssim_window(x)
    mu_y = _ssim_window(y)
    xx = _ssim_window(x * x) - mu_x * mu_x
    yy = _ssim_window(y * y) - mu_y * mu_y
    xy = _ssim_window(x * y) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + _SSIM_C1) * (2.0 * xy + _SSIM_C2)
    den = (mu_x**2 + mu_y**2 + _SSIM_C1) * (xx + yy + _SSIM_C2)
    return float(np.mean(num / den))
