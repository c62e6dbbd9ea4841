"""Deterministic, splittable random streams.

Every stochastic step in the toolkit draws from a stream derived from a
64-bit master seed plus a path of labels (experiment, scenario, image index,
purpose).  Derivation hashes the seed and path into a Philox key, so the same
(seed, path) always yields the same sequence and sibling paths give
statistically independent streams regardless of execution order.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

_MASK64 = (1 << 64) - 1


def _encode_label(h, label) -> None:
    # length/type prefixes keep ("ab","c") and ("a","bc") from colliding
    if isinstance(label, bool):
        raise TypeError("bool path labels are ambiguous; use int or str")
    if isinstance(label, (int, np.integer)):
        h.update(b"i")
        h.update(struct.pack("<q", int(label)))
    elif isinstance(label, str):
        raw = label.encode("utf-8")
        h.update(b"s")
        h.update(struct.pack("<I", len(raw)))
        h.update(raw)
    else:
        raise TypeError(f"unsupported path label type: {type(label).__name__}")


def derive_key(master_seed: int, *path) -> int:
    """Hash (master_seed, path) into a 128-bit Philox key."""
    h = hashlib.sha256()
    h.update(struct.pack("<Q", int(master_seed) & _MASK64))
    for label in path:
        _encode_label(h, label)
    return int.from_bytes(h.digest()[:16], "little")


def derive_rng(master_seed: int, *path) -> np.random.Generator:
    """Return the unique random stream for (master_seed, path).

    The stream is backed by the counter-based Philox generator and provides
    uniform, normal, Rayleigh, and all other numpy Generator draws.
    """
    return np.random.Generator(np.random.Philox(key=derive_key(master_seed, *path)))
