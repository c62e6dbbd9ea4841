"""Orthonormal 2-D DCT, full-image or 8x8-blockwise.

The orthonormal (type-II / type-III) pair keeps Parseval's identity, so
watermark strength expressed in coefficient units is comparable across
image resolutions.  Block mode pads to a multiple of the block size by edge
replication; the inverse discards the padding when given the original shape.
"""

from __future__ import annotations

import numpy as np
from scipy import fft as _fft

from .errors import ParameterError


def _check_grid(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
        raise ParameterError(f"expected a non-empty 2-D grid, got shape {a.shape}")
    return a


def pad_to_multiple(a: np.ndarray, block: int) -> np.ndarray:
    h, w = a.shape
    ph = (-h) % block
    pw = (-w) % block
    if ph == 0 and pw == 0:
        return a
    return np.pad(a, ((0, ph), (0, pw)), mode="edge")


def _blocks(a: np.ndarray, block: int) -> np.ndarray:
    h, w = a.shape
    return a.reshape(h // block, block, w // block, block).transpose(0, 2, 1, 3)


def _unblocks(b: np.ndarray) -> np.ndarray:
    nbh, nbw, block, _ = b.shape
    return b.transpose(0, 2, 1, 3).reshape(nbh * block, nbw * block)


def dct2(a: np.ndarray, block_size: int | None = None) -> np.ndarray:
    """Orthonormal 2-D DCT-II; blockwise when block_size is given."""
    a = _check_grid(a)
    if block_size is None:
        return _fft.dctn(a, type=2, norm="ortho")
    if block_size < 1:
        raise ParameterError(f"block_size must be >= 1, got {block_size}")
    padded = pad_to_multiple(a, block_size)
    blocks = _blocks(padded, block_size)
    return _unblocks(_fft.dctn(blocks, type=2, norm="ortho", axes=(-2, -1)))


def idct2(
    c: np.ndarray,
    block_size: int | None = None,
    out_shape: tuple[int, int] | None = None,
) -> np.ndarray:
    """Inverse of dct2; out_shape crops away block padding."""
    c = _check_grid(c)
    if block_size is None:
        out = _fft.idctn(c, type=2, norm="ortho")
    else:
        blocks = _blocks(c, block_size)
        out = _unblocks(_fft.idctn(blocks, type=2, norm="ortho", axes=(-2, -1)))
    if out_shape is not None:
        out = out[: out_shape[0], : out_shape[1]]
    return out
