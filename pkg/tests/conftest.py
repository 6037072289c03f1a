import numpy as np
import pytest

from cltukit.code import ccsds_short_code
from cltukit.gf2 import BinaryMatrix, BitWord
from cltukit.code import LinearCode
from cltukit.tsdesign import enumerate_low_weight


@pytest.fixture(scope="session")
def code():
    return ccsds_short_code()


@pytest.fixture(scope="session")
def low_weight_14(code):
    """Exhaustive codeword list up to weight 14 (half-weight budget 7)."""
    return enumerate_low_weight(code, 7, threads=2)


def random_half_rate_code(k: int, seed: int) -> LinearCode:
    """Random rate-1/2 code with both systematic forms (P invertible)."""
    rng = np.random.default_rng(seed)
    while True:
        p = rng.integers(0, 2, (k, k)).astype(np.uint8)
        if BinaryMatrix(p).rank == k:
            break
    h = BinaryMatrix(np.hstack([p.T % 2, np.eye(k, dtype=np.uint8)]))
    return LinearCode.from_parity_check(h)


def random_word(rng, n: int) -> BitWord:
    bits = rng.integers(0, 2, n)
    return BitWord.from_bits(bits)
