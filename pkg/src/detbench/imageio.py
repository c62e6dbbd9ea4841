"""Image representation and portable file I/O.

Images are numpy arrays of shape (height, width, channels) with float64
values in [0, 1].  Channels is 1 or 3.  8-bit quantization happens only at
file boundaries; all in-memory processing stays in the real domain so that
sub-quantum perturbations are representable.

Two file formats are supported:
  * binary PPM (P6, maxval 255) for 3-channel images,
  * a raw float32 format ("IDBF1" magic, u32 height/width/channels
    little-endian, then float32 pixels) for anything else.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError

MIN_SIDE = 64

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

_RAW_MAGIC = b"IDBF1"


def validate_image(img: np.ndarray, *, min_side: int = MIN_SIDE) -> np.ndarray:
    """Check the image contract and return the array unchanged."""
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] not in (1, 3):
        raise FormatError(f"expected (H, W, 1|3) image, got shape {img.shape}")
    if img.shape[0] < min_side or img.shape[1] < min_side:
        raise FormatError(
            f"image {img.shape[0]}x{img.shape[1]} smaller than minimum side {min_side}"
        )
    if not np.isfinite(img).all():
        raise FormatError("image contains non-finite values")
    return img


def clamp01(img: np.ndarray) -> np.ndarray:
    return np.clip(img, 0.0, 1.0)


def quantize8(img: np.ndarray) -> np.ndarray:
    """Snap values to the 8-bit grid used at file boundaries (round half up)."""
    return np.floor(255.0 * clamp01(img) + 0.5) / 255.0


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Rec.601 luma; 1-channel input is returned unchanged."""
    img = validate_image(img, min_side=1)
    if img.shape[2] == 1:
        return img
    return (img @ LUMA_WEIGHTS)[..., None]


def luma(img: np.ndarray) -> np.ndarray:
    """2-D luma plane (grayscale without the trailing channel axis)."""
    if img.ndim == 2:
        return img
    if img.shape[2] == 1:
        return img[..., 0]
    return img @ LUMA_WEIGHTS


def save_image(img: np.ndarray, path) -> None:
    """Write a P6 PPM for .ppm paths (3-channel only), raw float otherwise.

    PPM bytes are round(255*clamp(v)), half away from zero.
    """
    img = validate_image(img, min_side=1)
    path = str(path)
    try:
        if path.endswith(".ppm"):
            if img.shape[2] != 3:
                raise FormatError(
                    f"PPM P6 stores 3 channels, image has {img.shape[2]}; "
                    "use the raw .idbf format for grayscale"
                )
            h, w = img.shape[:2]
            payload = np.floor(255.0 * clamp01(img) + 0.5).astype(np.uint8)
            with open(path, "wb") as f:
                f.write(b"P6\n%d %d\n255\n" % (w, h))
                f.write(payload.tobytes())
        else:
            h, w, c = img.shape
            with open(path, "wb") as f:
                f.write(_RAW_MAGIC)
                f.write(struct.pack("<III", h, w, c))
                f.write(img.astype("<f4").tobytes())
    except OSError as exc:
        raise OSError(f"cannot write image to {path}: {exc}") from exc


def _read_ppm_token(data: bytes, pos: int) -> tuple[bytes, int]:
    # skip whitespace and '#' comment lines between header tokens
    n = len(data)
    while pos < n:
        ch = data[pos : pos + 1]
        if ch.isspace():
            pos += 1
        elif ch == b"#":
            while pos < n and data[pos : pos + 1] != b"\n":
                pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise FormatError("truncated PPM header")
    return data[start:pos], pos


def load_image(path) -> np.ndarray:
    """Load a P6 PPM or raw float image; PPM bytes map to v/255."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:2] == b"P6":
        pos = 2
        fields = []
        for name in ("width", "height", "maxval"):
            token, pos = _read_ppm_token(data, pos)
            try:
                fields.append(int(token))
            except ValueError:
                raise FormatError(f"PPM {name} is not an integer: {token!r}") from None
        w, h, maxval = fields
        if w <= 0 or h <= 0:
            raise FormatError(f"PPM dimensions must be positive, got {w}x{h}")
        if maxval != 255:
            raise FormatError(f"PPM maxval must be 255, got {maxval}")
        pos += 1  # single whitespace byte after maxval
        payload = data[pos : pos + h * w * 3]
        if len(payload) != h * w * 3:
            raise FormatError(
                f"PPM payload truncated: expected {h * w * 3} bytes, got {len(payload)}"
            )
        pixels = np.frombuffer(payload, dtype=np.uint8).astype(np.float64) / 255.0
        return pixels.reshape(h, w, 3)
    if data[: len(_RAW_MAGIC)] == _RAW_MAGIC:
        header_end = len(_RAW_MAGIC) + 12
        if len(data) < header_end:
            raise FormatError("raw image header truncated")
        h, w, c = struct.unpack("<III", data[len(_RAW_MAGIC) : header_end])
        if c not in (1, 3):
            raise FormatError(f"raw image channels must be 1 or 3, got {c}")
        count = h * w * c
        payload = data[header_end:]
        if len(payload) != 4 * count:
            raise FormatError(
                f"raw payload truncated: expected {4 * count} bytes, got {len(payload)}"
            )
        pixels = np.frombuffer(payload, dtype="<f4").astype(np.float64)
        return pixels.reshape(h, w, c)
    raise FormatError(f"unrecognized image magic {data[:5]!r}")
