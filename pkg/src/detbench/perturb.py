"""Common image perturbations.

Seven parameterized operations: JPEG-style lossy compression, Gaussian and
Rayleigh pixel noise, Gaussian blur, brightness, contrast, and elastic
warping.  Five of them ("seen" kinds) double as the training-time
augmentation pool; Rayleigh noise and elastic warping are held out as
"unseen" kinds.  All outputs are clamped to [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .dct import dct2, idct2
from .errors import ConfigError, ParameterError
from .imageio import clamp01, validate_image

JPEG = "jpeg"
GAUSS_NOISE = "gauss_noise"
RAYLEIGH_NOISE = "rayleigh_noise"
GAUSS_BLUR = "gauss_blur"
BRIGHTNESS = "brightness"
CONTRAST = "contrast"
ELASTIC = "elastic"

ALL_KINDS = (JPEG, GAUSS_NOISE, RAYLEIGH_NOISE, GAUSS_BLUR, BRIGHTNESS, CONTRAST, ELASTIC)
SEEN_KINDS = (JPEG, GAUSS_NOISE, GAUSS_BLUR, BRIGHTNESS, CONTRAST)
UNSEEN_KINDS = (RAYLEIGH_NOISE, ELASTIC)

# param domain per kind: (low, high), inclusive
_DOMAINS = {
    JPEG: (1.0, 100.0),
    GAUSS_NOISE: (0.0, math.inf),
    RAYLEIGH_NOISE: (0.0, math.inf),
    GAUSS_BLUR: (0.0, math.inf),
    BRIGHTNESS: (-1.0, 1.0),
    CONTRAST: (0.0, math.inf),  # exclusive low
    ELASTIC: (0.0, math.inf),
}

# boundary handling for blurs and resampling: half-sample symmetric extension
_BOUNDARY = "reflect"

# smoothing scale (pixels) of the elastic displacement field
ELASTIC_FIELD_STD = 8.0

# standard baseline luminance quantization table, row-major
JPEG_LUMA_TABLE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.float64,
)


@dataclass(frozen=True)
class PerturbationSpec:
    """One perturbation kind with its intensity parameter."""

    kind: str
    param: float

    def __post_init__(self):
        if self.kind not in _DOMAINS:
            raise ParameterError(f"unknown perturbation kind {self.kind!r}")
        lo, hi = _DOMAINS[self.kind]
        ok = lo <= self.param <= hi
        if self.kind == CONTRAST:
            ok = self.param > 0.0
        if not ok:
            raise ParameterError(
                f"{self.kind} parameter {self.param} outside domain [{lo}, {hi}]"
            )

    def to_json(self) -> dict:
        return {"kind": self.kind, "param": float(self.param)}

    @classmethod
    def from_json(cls, obj: dict) -> "PerturbationSpec":
        return cls(kind=obj["kind"], param=float(obj["param"]))


def jpeg_quality_scale(q: float) -> float:
    """De-facto baseline encoder quality-to-scale rule."""
    return 5000.0 / q if q < 50 else 200.0 - 2.0 * q


def jpeg_quant_table(q: float) -> np.ndarray:
    """Scaled luminance table, entries clamped to [1, 255]."""
    s = jpeg_quality_scale(q)
    return np.clip(np.floor((JPEG_LUMA_TABLE * s + 50.0) / 100.0), 1.0, 255.0)


def _jpeg_channel(chan: np.ndarray, steps: np.ndarray) -> np.ndarray:
    h, w = chan.shape
    coeffs = dct2(chan, block_size=8)
    nb_h, nb_w = coeffs.shape[0] // 8, coeffs.shape[1] // 8
    tiled = np.tile(steps, (nb_h, nb_w))
    quantized = np.floor(coeffs / tiled + 0.5) * tiled
    return idct2(quantized, block_size=8, out_shape=(h, w))


def jpeg_compress(img: np.ndarray, q: float) -> np.ndarray:
    """Lossy 8x8 block-DCT round-trip (no entropy coding).

    Each channel is transformed blockwise, quantized with the scaled
    luminance table mapped to the [0,1] pixel domain, dequantized, and
    inverse transformed.
    """
    steps = jpeg_quant_table(q) / 255.0
    out = np.empty_like(img)
    for c in range(img.shape[2]):
        out[..., c] = _jpeg_channel(img[..., c], steps)
    return clamp01(out)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps with half-width ceil(3*sigma)."""
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(img: np.ndarray, radius: float) -> np.ndarray:
    """Separable Gaussian blur of standard deviation `radius`; 0 is identity."""
    if radius == 0.0:
        return img.copy()
    k = gaussian_kernel(radius)
    out = np.empty_like(img)
    for c in range(img.shape[2]):
        tmp = ndimage.convolve1d(img[..., c], k, axis=0, mode=_BOUNDARY)
        out[..., c] = ndimage.convolve1d(tmp, k, axis=1, mode=_BOUNDARY)
    return clamp01(out)


def _blur_field(field: np.ndarray) -> np.ndarray:
    k = gaussian_kernel(ELASTIC_FIELD_STD)
    tmp = ndimage.convolve1d(field, k, axis=0, mode=_BOUNDARY)
    return ndimage.convolve1d(tmp, k, axis=1, mode=_BOUNDARY)


def elastic_warp(img: np.ndarray, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """Resample through a smooth random displacement field of scale alpha px."""
    if alpha == 0.0:
        return img.copy()
    h, w = img.shape[:2]
    dy = alpha * _blur_field(rng.uniform(-1.0, 1.0, size=(h, w)))
    dx = alpha * _blur_field(rng.uniform(-1.0, 1.0, size=(h, w)))
    rows, cols = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    coords = np.stack([rows + dy, cols + dx])
    out = np.empty_like(img)
    for c in range(img.shape[2]):
        out[..., c] = ndimage.map_coordinates(
            img[..., c], coords, order=1, mode=_BOUNDARY
        )
    return clamp01(out)


def apply_perturbation(
    spec: PerturbationSpec, img: np.ndarray, rng: np.random.Generator | None = None
) -> np.ndarray:
    """Apply one perturbation; rng is consumed only by the stochastic kinds."""
    img = validate_image(img)
    kind, p = spec.kind, spec.param
    if kind == JPEG:
        return jpeg_compress(img, p)
    if kind == GAUSS_NOISE:
        if rng is None:
            raise ParameterError("gauss_noise requires an rng")
        return clamp01(img + rng.normal(0.0, p, size=img.shape))
    if kind == RAYLEIGH_NOISE:
        if rng is None:
            raise ParameterError("rayleigh_noise requires an rng")
        # mean-centered so the noise does not double as a brightness shift
        noise = rng.rayleigh(scale=p, size=img.shape) if p > 0 else np.zeros(img.shape)
        return clamp01(img + noise - p * math.sqrt(math.pi / 2.0))
    if kind == GAUSS_BLUR:
        return gaussian_blur(img, p)
    if kind == BRIGHTNESS:
        if p == 0.0:
            return img.copy()
        return clamp01(img + p)
    if kind == CONTRAST:
        if p == 1.0:
            return img.copy()
        mu = img.mean(axis=(0, 1), keepdims=True)
        return clamp01(mu + p * (img - mu))
    if kind == ELASTIC:
        if rng is None:
            raise ParameterError("elastic requires an rng")
        return elastic_warp(img, p, rng)
    raise ParameterError(f"unknown perturbation kind {kind!r}")


# default sampling intervals for the five seen kinds, used by augmentation
# and codec tuning unless a config overrides them
DEFAULT_SEEN_RANGES = {
    JPEG: (40.0, 95.0),
    GAUSS_NOISE: (0.02, 0.15),
    GAUSS_BLUR: (0.25, 1.0),
    BRIGHTNESS: (-0.1, 0.1),
    CONTRAST: (0.7, 1.4),
}


def sample_seen_perturbation(
    rng: np.random.Generator, param_ranges: dict | None = None
) -> PerturbationSpec:
    """Sample a kind uniformly from the five seen kinds, param uniform in range."""
    ranges = DEFAULT_SEEN_RANGES if param_ranges is None else param_ranges
    if set(ranges) != set(SEEN_KINDS):
        raise ConfigError(
            f"param_ranges must cover exactly the seen kinds {sorted(SEEN_KINDS)}, "
            f"got {sorted(ranges)}"
        )
    for kind, (lo, hi) in ranges.items():
        if not lo <= hi:
            raise ConfigError(f"empty range for {kind}: [{lo}, {hi}]")
    kind = SEEN_KINDS[rng.integers(len(SEEN_KINDS))]
    lo, hi = ranges[kind]
    return PerturbationSpec(kind=kind, param=float(rng.uniform(lo, hi)))


def worst_case_specs(param_ranges: dict) -> list[PerturbationSpec]:
    """Most intense endpoint of each configured range (used by codec tuning)."""
    specs = []
    for kind, (lo, hi) in param_ranges.items():
        if kind == JPEG:
            p = lo  # lower quality compresses harder
        elif kind == BRIGHTNESS:
            p = lo if abs(lo) >= abs(hi) else hi
        elif kind == CONTRAST:
            p = lo if abs(math.log(lo)) >= abs(math.log(hi)) else hi
        else:
            p = hi
        specs.append(PerturbationSpec(kind=kind, param=float(p)))
    return specs
