"""CCSDS telecommand pseudo-randomizer.

The randomizing sequence is produced by the LFSR with feedback polynomial
x^8 + x^6 + x^4 + x^3 + x^2 + x + 1 seeded with all ones.  The register
convention is pinned by a startup self-test: the first 128 output bits
must equal KEYSTREAM_128_HEX, and the stream must have period 255.  The
randomizer resets before every 128-bit block, so the same 128 keystream
bits apply to every codeword, tail sequence, and idle block.
"""

from __future__ import annotations

import numpy as np

from .gf2 import BitWord

__all__ = [
    "KEYSTREAM_128_HEX",
    "LFSR_PERIOD",
    "keystream",
    "randomize",
    "derandomize_soft",
]

KEYSTREAM_128_HEX = "FF399E5A68E906F56C892FA1315E08C0"
LFSR_PERIOD = 255
BLOCK_BITS = 128


def _generate_period() -> tuple[int, ...]:
    # s[t+8] = s[t+6] ^ s[t+4] ^ s[t+3] ^ s[t+2] ^ s[t+1] ^ s[t], seed all ones
    seq = [1] * 8
    for t in range(LFSR_PERIOD - 8):
        seq.append(seq[t + 6] ^ seq[t + 4] ^ seq[t + 3]
                   ^ seq[t + 2] ^ seq[t + 1] ^ seq[t])
    return tuple(seq)


_PERIOD_BITS = _generate_period()

if BitWord.from_bits(_PERIOD_BITS[:BLOCK_BITS]).to_hex() != KEYSTREAM_128_HEX:
    raise RuntimeError("LFSR self-test failed: keystream prefix mismatch")

_KEYSTREAM_128 = BitWord.from_hex(KEYSTREAM_128_HEX)
_KEYSTREAM_SIGNS = np.where(np.array(_PERIOD_BITS[:BLOCK_BITS]) == 1, -1.0, 1.0)


def keystream(length: int) -> BitWord:
    """First ``length`` bits of the LFSR output (register reset at start)."""
    if length < 1:
        raise ValueError("length must be >= 1")
    reps = -(-length // LFSR_PERIOD)
    bits = (_PERIOD_BITS * reps)[:length]
    return BitWord.from_bits(bits)


def randomize(block: BitWord) -> BitWord:
    """XOR a 128-bit block with the keystream.  Involution."""
    if block.length != BLOCK_BITS:
        raise ValueError(f"randomizer blocks are {BLOCK_BITS} bits")
    return block ^ _KEYSTREAM_128


def derandomize_soft(llr: np.ndarray) -> np.ndarray:
    """Flip the sign of llr[i] wherever keystream bit i is 1."""
    llr = np.asarray(llr, dtype=np.float64)
    if llr.shape[-1] != BLOCK_BITS:
        raise ValueError(f"soft de-randomization expects {BLOCK_BITS} symbols")
    return llr * _KEYSTREAM_SIGNS
