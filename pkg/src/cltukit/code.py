"""Linear block codes: construction from a parity-check matrix, systematic
encoders, syndrome computation, and the built-in CCSDS short uplink code."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from typing import Optional

import numpy as np

from .gf2 import (
    BinaryMatrix,
    BitWord,
    QcSpec,
    RankDeficientError,
    SystematicForms,
    expand_qc,
    systematic_forms,
)

__all__ = [
    "LinearCode",
    "ccsds_short_spec",
    "ccsds_short_code",
    "CCSDS_SHORT_NAME",
]

CCSDS_SHORT_NAME = "ccsds-128-64"

# Quasi-cyclic grid of the standardized short (n=128, k=64) uplink code,
# M=16.  Shipped both as this constant and as data/ccsds_128_64.txt.
_CCSDS_SHORT_SPEC_TEXT = """\
M=16
I+P7,P2,P14,P6,Z,P0,P13,I
P6,I+P15,P0,P1,I,Z,P0,P7
P4,P1,I+P15,P14,P11,I,Z,P3
P0,P1,P9,I+P13,P14,P1,I,Z
"""


class LinearCode:
    """An (n, k) binary linear code realized from its parity-check matrix.

    Holds both systematic generator forms and the check/variable adjacency
    lists used by the iterative decoder.  Instances are immutable after
    construction and safe to share across workers.
    """

    def __init__(self, h: BinaryMatrix, forms: SystematicForms,
                 qc_block_size: Optional[int] = None):
        self.h = h
        self.forms = forms
        self.n = h.cols
        self.k = h.cols - h.rows
        self.qc_block_size = qc_block_size
        # adjacency: per-check and per-variable neighbor index lists
        self.check_neighbors = [np.flatnonzero(h.a[i]).astype(np.int32)
                                for i in range(h.rows)]
        self.var_neighbors = [np.flatnonzero(h.a[:, j]).astype(np.int32)
                              for j in range(h.cols)]
        self._h_rows = h.row_ints()
        self._gl_rows = forms.g_left.row_ints()
        self._gr_rows = forms.g_right.row_ints()

    @classmethod
    def from_parity_check(cls, h: BinaryMatrix,
                          qc_block_size: Optional[int] = None) -> "LinearCode":
        if h.rank != h.rows:
            raise RankDeficientError(h.rank, h.rows)
        forms = systematic_forms(h)
        if forms.column_permutation is not None:
            # keep everything consistent: adopt the permuted coordinates
            h = BinaryMatrix(h.a[:, list(forms.column_permutation)])
        return cls(h, forms, qc_block_size)

    @property
    def rate(self) -> float:
        return self.k / self.n

    # -- encoding ----------------------------------------------------

    def encode_left(self, message: BitWord) -> BitWord:
        """Systematic encoding with the message in the first k positions."""
        return self._encode(message, self._gl_rows)

    def encode_right(self, message: BitWord) -> BitWord:
        """Systematic encoding with the message in the last k positions."""
        return self._encode(message, self._gr_rows)

    def _encode(self, message: BitWord, rows: list[int]) -> BitWord:
        if message.length != self.k:
            raise ValueError(f"message length {message.length} != k={self.k}")
        acc = 0
        v = message.value
        for i in range(self.k - 1, -1, -1):
            if v & 1:
                acc ^= rows[i]
            v >>= 1
        return BitWord(self.n, acc)

    def syndrome(self, word: BitWord) -> BitWord:
        """word . H^T"""
        if word.length != self.n:
            raise ValueError(f"word length {word.length} != n={self.n}")
        acc = 0
        for row in self._h_rows:
            acc = (acc << 1) | ((row & word.value).bit_count() & 1)
        return BitWord(self.n - self.k, acc)

    def is_codeword(self, word: BitWord) -> bool:
        return self.syndrome(word).value == 0

    # -- packed views used by the search kernels ----------------------

    def packed_parity_left(self) -> np.ndarray:
        """Rows of P_L (right part of G_L) as uint64; requires n = 2k <= 128."""
        self._require_half_rate()
        mask = (1 << self.k) - 1
        return np.array([r & mask for r in self._gl_rows], dtype=np.uint64)

    def packed_parity_right(self) -> np.ndarray:
        """Rows of P_R (left part of G_R) as uint64; requires n = 2k <= 128."""
        self._require_half_rate()
        return np.array([r >> self.k for r in self._gr_rows], dtype=np.uint64)

    def _require_half_rate(self):
        if self.n != 2 * self.k:
            raise ValueError("rate-1/2 code required")
        if self.k > 64:
            raise ValueError("packed kernels support k <= 64")

    def __repr__(self) -> str:
        return f"LinearCode(n={self.n}, k={self.k})"


def ccsds_short_spec() -> QcSpec:
    """The built-in QC grid of the short (128, 64) uplink code."""
    return QcSpec.parse(_CCSDS_SHORT_SPEC_TEXT)


@lru_cache(maxsize=1)
def ccsds_short_code() -> LinearCode:
    """Build the (128, 64) code; rank and generator syndromes are checked."""
    spec = ccsds_short_spec()
    h = expand_qc(spec)
    if h.rank != 64:
        raise RankDeficientError(h.rank, 64)
    code = LinearCode.from_parity_check(h, qc_block_size=spec.block_size)
    assert code.forms.column_permutation is None
    return code


def reference_spec_text() -> str:
    """Contents of the shipped QC spec reference file."""
    return resources.files("cltukit").joinpath("data/ccsds_128_64.txt").read_text()
