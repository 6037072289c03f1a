"""Bit vectors, dense GF(2) matrices, and quasi-cyclic block expansion.

Conventions used throughout the package:

* A bit vector of length L is rendered as contiguous uppercase hex.  Bit
  index 0 is the most significant bit of the first hex character, so the
  hex constants used by the rest of the package can be pasted verbatim.
* ``Phi(i)`` denotes the i-th right circular shift of the MxM identity
  matrix: row j of ``Phi(i)`` has its single 1 in column (j + i) mod M.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

__all__ = [
    "BitWord",
    "BinaryMatrix",
    "QcToken",
    "QcSpec",
    "SystematicForms",
    "RankDeficientError",
    "expand_qc",
    "systematic_forms",
    "hamming_distance",
    "weight",
    "overlap",
]


class RankDeficientError(ValueError):
    """Raised when a parity-check matrix does not have full row rank."""

    def __init__(self, rank: int, expected: int):
        self.rank = rank
        self.expected = expected
        super().__init__(f"matrix rank {rank} < expected {expected}")


@dataclass(frozen=True)
class BitWord:
    """Immutable fixed-length bit vector backed by a Python int.

    ``value`` holds the bits big-endian: bit i of the word is
    ``(value >> (length - 1 - i)) & 1``.
    """

    length: int
    value: int

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("length must be positive")
        if not 0 <= self.value < (1 << self.length):
            raise ValueError("value out of range for length")

    # -- constructors ------------------------------------------------

    @classmethod
    def zeros(cls, length: int) -> "BitWord":
        return cls(length, 0)

    @classmethod
    def ones(cls, length: int) -> "BitWord":
        return cls(length, (1 << length) - 1)

    @classmethod
    def unit(cls, length: int, index: int) -> "BitWord":
        """Weight-1 word with its single 1 at bit ``index``."""
        if not 0 <= index < length:
            raise IndexError("bit index out of range")
        return cls(length, 1 << (length - 1 - index))

    @classmethod
    def from_hex(cls, text: str, length: Optional[int] = None) -> "BitWord":
        """Parse contiguous hex; whitespace is ignored, case insensitive."""
        digits = "".join(text.split())
        if length is None:
            length = 4 * len(digits)
        value = int(digits, 16) if digits else 0
        return cls(length, value)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitWord":
        value = 0
        n = 0
        for b in bits:
            value = (value << 1) | (int(b) & 1)
            n += 1
        return cls(n, value)

    @classmethod
    def alternating(cls, length: int, start_bit: int = 0) -> "BitWord":
        """Alternating 0/1 pattern beginning with ``start_bit``."""
        bits = [(start_bit ^ (i & 1)) & 1 for i in range(length)]
        return cls.from_bits(bits)

    # -- accessors ---------------------------------------------------

    def bit(self, index: int) -> int:
        if not 0 <= index < self.length:
            raise IndexError("bit index out of range")
        return (self.value >> (self.length - 1 - index)) & 1

    def to_hex(self) -> str:
        if self.length % 4 != 0:
            raise ValueError("hex rendering requires length divisible by 4")
        return format(self.value, f"0{self.length // 4}X")

    def to_bits(self) -> np.ndarray:
        out = np.empty(self.length, dtype=np.uint8)
        v = self.value
        for i in range(self.length - 1, -1, -1):
            out[i] = v & 1
            v >>= 1
        return out

    def support(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.length) if self.bit(i))

    @property
    def weight(self) -> int:
        return self.value.bit_count()

    def halves(self) -> tuple["BitWord", "BitWord"]:
        """Split into (left, right); left gets the extra bit if odd length."""
        lr = self.length // 2
        ll = self.length - lr
        return (
            BitWord(ll, self.value >> lr),
            BitWord(lr, self.value & ((1 << lr) - 1)),
        )

    def concat(self, other: "BitWord") -> "BitWord":
        return BitWord(self.length + other.length,
                       (self.value << other.length) | other.value)

    def slice(self, start: int, stop: int) -> "BitWord":
        if not (0 <= start < stop <= self.length):
            raise IndexError("slice out of range")
        width = stop - start
        return BitWord(width, (self.value >> (self.length - stop)) & ((1 << width) - 1))

    def qc_shift(self, block_size: int, amount: int = 1) -> "BitWord":
        """Simultaneous right circular shift of every ``block_size``-bit block."""
        if self.length % block_size != 0:
            raise ValueError("length not a multiple of block size")
        amount %= block_size
        mask = (1 << block_size) - 1
        out = 0
        for off in range(0, self.length, block_size):
            blk = (self.value >> (self.length - block_size - off)) & mask
            blk = ((blk >> amount) | (blk << (block_size - amount))) & mask
            out = (out << block_size) | blk
        return BitWord(self.length, out)

    def __xor__(self, other: "BitWord") -> "BitWord":
        if self.length != other.length:
            raise ValueError("length mismatch")
        return BitWord(self.length, self.value ^ other.value)

    def __and__(self, other: "BitWord") -> "BitWord":
        if self.length != other.length:
            raise ValueError("length mismatch")
        return BitWord(self.length, self.value & other.value)

    def __str__(self) -> str:
        if self.length % 4 == 0:
            return self.to_hex()
        return format(self.value, f"0{self.length}b")


def hamming_distance(a: BitWord, b: BitWord) -> int:
    if a.length != b.length:
        raise ValueError("length mismatch")
    return (a.value ^ b.value).bit_count()


def weight(a: BitWord) -> int:
    return a.value.bit_count()


def overlap(a: BitWord, b: BitWord) -> int:
    """|Supp(a) & Supp(b)|."""
    if a.length != b.length:
        raise ValueError("length mismatch")
    return (a.value & b.value).bit_count()


class BinaryMatrix:
    """Dense matrix over GF(2), stored as a uint8 array of 0/1 entries."""

    def __init__(self, array: np.ndarray):
        a = np.asarray(array, dtype=np.uint8) % 2
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        self.a = a
        self.a.setflags(write=False)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BinaryMatrix":
        return cls(np.zeros((rows, cols), dtype=np.uint8))

    @classmethod
    def identity(cls, n: int) -> "BinaryMatrix":
        return cls(np.eye(n, dtype=np.uint8))

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    @cached_property
    def rank(self) -> int:
        _, pivots = _row_reduce(self.a.copy())
        return len(pivots)

    def matmul(self, other: "BinaryMatrix") -> "BinaryMatrix":
        return BinaryMatrix((self.a.astype(np.uint32) @ other.a) % 2)

    def transpose(self) -> "BinaryMatrix":
        return BinaryMatrix(self.a.T)

    def row_word(self, i: int) -> BitWord:
        return BitWord.from_bits(self.a[i])

    def row_ints(self) -> list[int]:
        """Rows packed big-endian into Python ints (bit 0 = column 0)."""
        return [BitWord.from_bits(r).value for r in self.a]

    def mul_word(self, w: BitWord) -> BitWord:
        """Row-vector times this matrix: w (1 x rows) . M (rows x cols)."""
        if w.length != self.rows:
            raise ValueError("length mismatch")
        acc = 0
        v = w.value
        for i in range(self.rows - 1, -1, -1):
            if v & 1:
                acc ^= self._row_int_cache[i]
            v >>= 1
        return BitWord(self.cols, acc)

    @cached_property
    def _row_int_cache(self) -> list[int]:
        return self.row_ints()

    def __eq__(self, other) -> bool:
        return isinstance(other, BinaryMatrix) and np.array_equal(self.a, other.a)

    def __repr__(self) -> str:
        return f"BinaryMatrix({self.rows}x{self.cols})"


def _row_reduce(a: np.ndarray, pivot_cols: Optional[range] = None):
    """In-place Gauss-Jordan over GF(2); returns (a, pivot column list)."""
    rows, cols = a.shape
    search = pivot_cols if pivot_cols is not None else range(cols)
    pivots = []
    r = 0
    for c in search:
        if r >= rows:
            break
        hit = None
        for i in range(r, rows):
            if a[i, c]:
                hit = i
                break
        if hit is None:
            continue
        if hit != r:
            a[[r, hit]] = a[[hit, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        pivots.append(c)
        r += 1
    return a, pivots


@dataclass(frozen=True)
class QcToken:
    """One block of a quasi-cyclic grid: Z, I, P<i>, or I+P<i>."""

    kind: str  # "Z", "I", "P", "I+P"
    shift: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("Z", "I", "P", "I+P"):
            raise ValueError(f"unknown token kind {self.kind!r}")
        if self.kind in ("P", "I+P") and self.shift is None:
            raise ValueError(f"token {self.kind} requires a shift")

    @classmethod
    def parse(cls, text: str) -> "QcToken":
        t = text.strip()
        if t == "Z":
            return cls("Z")
        if t == "I":
            return cls("I")
        if t.startswith("I+P"):
            return cls("I+P", int(t[3:]))
        if t.startswith("P"):
            return cls("P", int(t[1:]))
        raise ValueError(f"cannot parse QC token {text!r}")

    def render(self) -> str:
        if self.kind in ("Z", "I"):
            return self.kind
        if self.kind == "P":
            return f"P{self.shift}"
        return f"I+P{self.shift}"


@dataclass(frozen=True)
class QcSpec:
    """Grid of circulant block tokens plus the block size M."""

    block_size: int
    grid: tuple[tuple[QcToken, ...], ...]

    def __post_init__(self):
        if self.block_size < 1:
            raise ValueError("block size must be positive")
        widths = {len(row) for row in self.grid}
        if len(widths) != 1:
            raise ValueError("ragged grid")
        for row in self.grid:
            for tok in row:
                if tok.shift is not None and not 0 <= tok.shift < self.block_size:
                    raise ValueError(
                        f"shift {tok.shift} out of range for M={self.block_size}")

    @property
    def block_rows(self) -> int:
        return len(self.grid)

    @property
    def block_cols(self) -> int:
        return len(self.grid[0])

    @classmethod
    def parse(cls, text: str) -> "QcSpec":
        """Parse the text format: header ``M=<int>``, then one comma
        separated grid row per line."""
        lines = [ln.strip() for ln in text.splitlines()
                 if ln.strip() and not ln.strip().startswith("#")]
        if not lines or not lines[0].startswith("M="):
            raise ValueError("missing M=<int> header")
        m = int(lines[0][2:])
        grid = tuple(
            tuple(QcToken.parse(tok) for tok in ln.split(","))
            for ln in lines[1:]
        )
        if not grid:
            raise ValueError("empty grid")
        return cls(m, grid)

    def render(self) -> str:
        out = [f"M={self.block_size}"]
        for row in self.grid:
            out.append(",".join(tok.render() for tok in row))
        return "\n".join(out) + "\n"


def _circulant(m: int, shift: int) -> np.ndarray:
    blk = np.zeros((m, m), dtype=np.uint8)
    idx = np.arange(m)
    blk[idx, (idx + shift) % m] = 1
    return blk


def expand_qc(spec: QcSpec) -> BinaryMatrix:
    """Expand a QC grid into its (rows*M) x (cols*M) binary matrix."""
    m = spec.block_size
    blocks = []
    for row in spec.grid:
        brow = []
        for tok in row:
            if tok.kind == "Z":
                blk = np.zeros((m, m), dtype=np.uint8)
            elif tok.kind == "I":
                blk = np.eye(m, dtype=np.uint8)
            elif tok.kind == "P":
                blk = _circulant(m, tok.shift)
            else:  # I+P
                blk = (np.eye(m, dtype=np.uint8) + _circulant(m, tok.shift)) % 2
            brow.append(blk)
        blocks.append(brow)
    return BinaryMatrix(np.block(blocks))


@dataclass(frozen=True)
class SystematicForms:
    """Generators [I_k | P_L] and [P_R | I_k] for the code of a given H.

    ``column_permutation`` is None when H admits both forms directly.
    Otherwise it records the column reordering (new_cols = perm applied to
    original columns) that was needed to make the pivot blocks invertible;
    the generators then describe the permuted code.
    """

    g_left: BinaryMatrix
    g_right: BinaryMatrix
    column_permutation: Optional[tuple[int, ...]] = None


def systematic_forms(h: BinaryMatrix) -> SystematicForms:
    """Derive both systematic generator forms from a full-rank H.

    The left form [I_k | P_L] comes from reducing H with pivots on
    columns [k, n); the right form [P_R | I_k] pivots on [0, n-k).  If a
    pivot block is singular, columns are exchanged within the affected
    pivot region, a warning is emitted, and the permutation is recorded;
    both generators then describe the same permuted code.
    """
    r, n = h.rows, h.cols
    k = n - r
    if h.rank < r:
        raise RankDeficientError(h.rank, r)

    perm = list(range(n))
    a = h.a.copy()
    swapped = False

    def reduce_region(mat: np.ndarray, lo: int, hi: int,
                      allow_swaps: bool) -> Optional[np.ndarray]:
        """Gauss-Jordan pivoting only on columns [lo, hi).  With
        ``allow_swaps``, a column without a pivot is exchanged for one
        that has one (preferring columns inside the region, else
        borrowing from outside it); swaps update ``a`` and ``perm``."""
        nonlocal swapped
        m = mat.copy()
        row = 0
        for c in range(lo, hi):
            hit = None
            for i in range(row, r):
                if m[i, c]:
                    hit = i
                    break
            if hit is None:
                if not allow_swaps:
                    return None
                candidates = [c2 for c2 in range(c + 1, hi)]
                candidates += [c2 for c2 in range(n) if not lo <= c2 < hi]
                swap = None
                for c2 in candidates:
                    for i in range(row, r):
                        if m[i, c2]:
                            swap = (c2, i)
                            break
                    if swap:
                        break
                if swap is None:
                    return None
                c2, hit = swap
                m[:, [c, c2]] = m[:, [c2, c]]
                a[:, [c, c2]] = a[:, [c2, c]]
                perm[c], perm[c2] = perm[c2], perm[c]
                swapped = True
            if hit != row:
                m[[row, hit]] = m[[hit, row]]
            for i in range(r):
                if i != row and m[i, c]:
                    m[i] ^= m[row]
            row += 1
        return m

    # settle a column permutation both pivot regions can live with
    for _ in range(4):
        swapped = False
        reduce_region(a, k, n, allow_swaps=True)
        reduce_region(a, 0, r, allow_swaps=True)
        if not swapped:
            break
    else:
        raise RuntimeError("no stable column permutation for both forms")

    # derive both forms from the settled matrix, no further swaps:
    # left form H -> [C | I_r] gives G_L = [I_k | C^T]; right form
    # H -> [I_r | D] gives G_R = [D^T | I_k]
    left_red = reduce_region(a, k, n, allow_swaps=False)
    right_red = reduce_region(a, 0, r, allow_swaps=False)
    if left_red is None or right_red is None:
        raise RuntimeError("no stable column permutation for both forms")
    g_left = np.hstack([np.eye(k, dtype=np.uint8), left_red[:, :k].T])
    g_right = np.hstack([right_red[:, r:].T, np.eye(k, dtype=np.uint8)])

    permutation: Optional[tuple[int, ...]] = None
    if perm != list(range(n)):
        permutation = tuple(perm)
        warnings.warn(
            "singular systematic pivot block: columns were permuted within "
            "a pivot region; generators describe the permuted code",
            stacklevel=2,
        )

    return SystematicForms(BinaryMatrix(g_left), BinaryMatrix(g_right), permutation)
