"""Counter-based random streams (SplitMix64 finalizer).

Every path owns two independent streams, ``driver`` (Brownian increments)
and ``aux`` (edge labels, killing levels, bridge variates).  Stream ``j``
of path ``p`` yields ``mix(key + c * GOLDEN)`` for ``c = 1, 2, ...`` with
``key = mix(base + mix(2 p + j))`` and ``base`` derived from ``(seed,
stream)``.  Nothing depends on how paths are split across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
M1 = np.uint64(0xBF58476D1CE4E5B9)
M2 = np.uint64(0x94D049BB133111EB)
S30 = np.uint64(30)
S27 = np.uint64(27)
S31 = np.uint64(31)
S11 = np.uint64(11)
INV53 = 1.0 / 9007199254740992.0  # 2^-53

DRIVER = 0
AUX = 1


@dataclass(frozen=True)
class RngConfig:
    """``seed`` selects the experiment, ``stream`` an independent family of
    streams under the same seed (e.g. replicate index)."""

    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if not 0 <= int(self.stream) < 2 ** 32:
            raise ValueError("stream must be in [0, 2^32)")

    @property
    def base_key(self) -> np.uint64:
        s = np.array([self.seed], dtype=np.uint64)
        st = np.array([self.stream], dtype=np.uint64)
        return mix_np(mix_np(s) ^ mix_np(st + GOLDEN))[0]

    def generator(self, label: int = 0) -> np.random.Generator:
        """numpy Generator for the vectorized exact samplers."""
        return np.random.Generator(np.random.PCG64(
            np.random.SeedSequence([int(self.seed), int(self.stream), int(label)])))


def mix_np(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> S30)) * M1
    z = (z ^ (z >> S27)) * M2
    return z ^ (z >> S31)


def path_keys_np(base: np.uint64, paths: np.ndarray, which: int) -> np.ndarray:
    p = np.asarray(paths, dtype=np.uint64)
    return mix_np(np.uint64(base) + mix_np(np.uint64(2) * p + np.uint64(which)))


class VecStreams:
    """Vectorized counterpart of the per-path numba streams.

    ``key`` and ``ctr`` are per-path arrays; all draws act on an index
    subset so paths advance independently, exactly as in the scalar code.
    """

    def __init__(self, keys: np.ndarray):
        self.key = np.asarray(keys, dtype=np.uint64).copy()
        self.ctr = np.zeros_like(self.key)
        self.has_spare = np.zeros(self.key.shape, dtype=bool)
        self.spare = np.zeros(self.key.shape)

    def uniform(self, idx: np.ndarray) -> np.ndarray:
        self.ctr[idx] += np.uint64(1)
        v = mix_np(self.key[idx] + self.ctr[idx] * GOLDEN)
        return (v >> S11).astype(np.float64) * INV53

    def normal(self, idx: np.ndarray) -> np.ndarray:
        """Marsaglia polar normals with one cached spare per path."""
        out = np.empty(idx.shape[0])
        sp = self.has_spare[idx]
        out[sp] = self.spare[idx[sp]]
        self.has_spare[idx[sp]] = False
        pos = np.flatnonzero(~sp)
        while pos.size:
            sub = idx[pos]
            u = 2.0 * self.uniform(sub) - 1.0
            v = 2.0 * self.uniform(sub) - 1.0
            s = u * u + v * v
            ok = (s < 1.0) & (s > 0.0)
            f = np.sqrt(-2.0 * np.log(s[ok]) / s[ok])
            out[pos[ok]] = u[ok] * f
            self.spare[sub[ok]] = v[ok] * f
            self.has_spare[sub[ok]] = True
            pos = pos[~ok]
        return out
