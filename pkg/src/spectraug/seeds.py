"""Deterministic seed derivation and counter-based Gaussian sampling.

Reproducibility contract: every random quantity in this package is a pure
function of a 64-bit seed plus a structural address (bin index, region
index, volume id, copy index). Nothing depends on iteration order, worker
count, or global RNG state.
"""

from __future__ import annotations

import hashlib

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_TWO_NEG53 = float(2.0**-53)

_U64 = np.uint64
_MASK64 = (1 << 64) - 1


def _finalize(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; wraps mod 2^64 via uint64 arithmetic
    x = (x ^ (x >> _U64(30))) * _MIX1
    x = (x ^ (x >> _U64(27))) * _MIX2
    return x ^ (x >> _U64(31))


def _finalize_int(x: int) -> int:
    # same finalizer on a plain int (numpy warns on scalar uint64 overflow)
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def derive_seed(*parts: int | str) -> int:
    """Stable 64-bit seed from a tuple of ints and strings.

    Hash-based (blake2b), so it is identical across runs, platforms and
    Python processes; distinct inputs collide only with ~2^-64 probability.
    """
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        if isinstance(part, str):
            token = b"s" + part.encode("utf-8")
        else:
            token = b"i" + int(part).to_bytes(16, "little", signed=True)
        h.update(len(token).to_bytes(4, "little"))
        h.update(token)
    return int.from_bytes(h.digest(), "little")


def unit_normals(seed: int, counters: np.ndarray) -> np.ndarray:
    """Standard-normal value per counter, a pure function of (seed, counter).

    Counter-based construction: two splitmix64 outputs keyed by the seed at
    positions 2c and 2c+1 feed a Box-Muller transform. Equal counters give
    equal values no matter how the array is ordered or partitioned.
    """
    c = np.ascontiguousarray(counters, dtype=np.uint64)
    base = np.uint64(_finalize_int((int(seed) + 0x9E3779B97F4A7C15) & _MASK64))
    idx2 = c << _U64(1)
    a = _finalize(base + (idx2 + _U64(1)) * _GOLDEN)
    b = _finalize(base + (idx2 + _U64(2)) * _GOLDEN)
    # u1 in (0, 1], u2 in [0, 1)
    u1 = ((a >> _U64(11)).astype(np.float64) + 1.0) * _TWO_NEG53
    u2 = (b >> _U64(11)).astype(np.float64) * _TWO_NEG53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def philox_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for a (seed, stream) pair.

    Used where a sequential Generator API is convenient (permutations,
    uniform ints); streams with distinct (seed, stream) never overlap.
    """
    key = (int(seed) & _MASK64) | ((int(stream) & _MASK64) << 64)
    return np.random.Generator(np.random.Philox(key=key))
