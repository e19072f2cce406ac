"""Deterministic, label-keyed random streams.

A stream is a counter-based Philox generator keyed by the SHA-256 digest of
the master seed plus an arbitrary label tuple, so any substream (a sweep
point, a repetition) can be regenerated independently of execution order and
identically across processes.  Normal draws use an explicit Box-Muller
transform over raw 64-bit words; the mapping from key to samples is fixed by
this module, not by library internals.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["normal_draws", "stream"]


def stream(seed: int, *labels) -> np.random.Generator:
    """Philox generator keyed by SHA-256(seed, labels...)."""
    if seed < 0:
        raise ValueError("master seed must be nonnegative")
    h = hashlib.sha256()
    h.update(str(int(seed)).encode())
    for label in labels:
        h.update(b"/")
        h.update(str(label).encode())
    key = np.frombuffer(h.digest()[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def normal_draws(gen: np.random.Generator, n: int) -> np.ndarray:
    """n standard-normal samples via Box-Muller on raw 64-bit words."""
    if n < 0:
        raise ValueError("draw count must be nonnegative")
    if n == 0:
        return np.empty(0)
    pairs = (n + 1) // 2
    raw = gen.integers(0, 2**64, size=2 * pairs, dtype=np.uint64, endpoint=False)
    # Uniforms in (0, 1]: +1 keeps log() away from zero.
    u = (raw.astype(np.float64) + 1.0) / 2.0**64
    r = np.sqrt(-2.0 * np.log(u[0::2]))
    phase = 2.0 * np.pi * u[1::2]
    out = np.empty(2 * pairs)
    out[0::2] = r * np.cos(phase)
    out[1::2] = r * np.sin(phase)
    return out[:n]
