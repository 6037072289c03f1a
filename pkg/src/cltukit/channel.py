"""BPSK modulation, AWGN, and LLR formation.

Symbol energy is normalized to 1; with code rate R the noise variance is
sigma^2 = 1 / (2 R 10^(EbN0_dB / 10)).  Randomness comes from counter
based Philox streams keyed on (master_seed, stream_index), so trials
partition deterministically across workers.  Gaussians are produced by
numpy's standard_normal (ziggurat); bit-exact reproducibility holds
within this implementation, statistical equivalence across others.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf2 import BitWord

__all__ = ["ChannelParams", "modulate", "transmit", "llr", "stream_rng"]


@dataclass(frozen=True)
class ChannelParams:
    eb_n0_db: float
    code_rate: float = 0.5

    def __post_init__(self):
        if not 0 < self.code_rate <= 1:
            raise ValueError("code rate must be in (0, 1]")

    @property
    def sigma2(self) -> float:
        return 1.0 / (2.0 * self.code_rate * 10.0 ** (self.eb_n0_db / 10.0))

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.sigma2))


def modulate(bits) -> np.ndarray:
    """Map bit 0 -> +1, bit 1 -> -1."""
    if isinstance(bits, BitWord):
        bits = bits.to_bits()
    bits = np.asarray(bits)
    return np.where(bits == 0, 1.0, -1.0)


def stream_rng(master_seed: int, stream_index: int) -> np.random.Generator:
    """Counter-based substream: disjoint Philox counter blocks per index."""
    bg = np.random.Philox(key=master_seed, counter=stream_index << 128)
    return np.random.Generator(bg)


def domain_seed(master_seed: int, *path: int) -> int:
    """Independent 64-bit key for a named estimator domain, so different
    estimators sharing one master seed never reuse a noise stream."""
    entropy = [int(e) % (1 << 63) for e in (master_seed, *path)]
    ss = np.random.SeedSequence(entropy)
    return int(ss.generate_state(1, np.uint64)[0])


def transmit(symbols: np.ndarray, params: ChannelParams,
             rng: np.random.Generator) -> np.ndarray:
    """r = s + n with n ~ N(0, sigma^2) i.i.d.  Accepts any array shape."""
    symbols = np.asarray(symbols, dtype=np.float64)
    return symbols + rng.standard_normal(symbols.shape) * params.sigma


def llr(received: np.ndarray, params: ChannelParams) -> np.ndarray:
    """Per-symbol LLR 2 r / sigma^2 (positive means bit 0 more likely)."""
    return 2.0 * np.asarray(received, dtype=np.float64) / params.sigma2
