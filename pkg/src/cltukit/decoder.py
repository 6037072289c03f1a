"""Iterative min-sum decoder for LDPC codes.

Plain (unscaled) min-sum with a flooding schedule.  The decoder doubles
as the decoder-based termination detector: a decoding failure on a tail
window marks the end of a transmission unit.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .code import LinearCode
from .gf2 import BitWord

__all__ = ["DecodeOutcome", "MinSumDecoder"]

# LlrVector convention: one float per code symbol, positive sign means
# bit 0 is the more likely value.


@dataclass(frozen=True)
class DecodeOutcome:
    converged: bool
    word: BitWord
    iterations: int

    @property
    def status(self) -> str:
        return "converged" if self.converged else "failure"


class MinSumDecoder:
    """Decoder bound to one code.

    A single ``decode`` call runs single-threaded; ``decode_batch`` splits
    the batch across ``threads`` workers.  The code object is shared
    read-only; working buffers live inside the kernel call.
    """

    def __init__(self, code: LinearCode, max_iter: int = 100,
                 clip: float = 1e3):
        if max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if code.n > 128:
            raise ValueError("decoder supports n <= 128")
        self.code = code
        self.max_iter = max_iter
        self.clip = float(clip)

        # flatten the Tanner graph: edges grouped by check, plus a
        # variable-grouped view of the same edge ids
        edge_var = []
        check_ptr = [0]
        for neigh in code.check_neighbors:
            edge_var.extend(int(v) for v in neigh)
            check_ptr.append(len(edge_var))
        self.edge_var = np.array(edge_var, dtype=np.int32)
        self.check_ptr = np.array(check_ptr, dtype=np.int32)

        by_var: list[list[int]] = [[] for _ in range(code.n)]
        for e, v in enumerate(edge_var):
            by_var[v].append(e)
        var_edges = []
        var_ptr = [0]
        for lst in by_var:
            var_edges.extend(lst)
            var_ptr.append(len(var_edges))
        self.var_edges = np.array(var_edges, dtype=np.int32)
        self.var_ptr = np.array(var_ptr, dtype=np.int32)

    def decode(self, llr: np.ndarray) -> DecodeOutcome:
        llr = np.asarray(llr, dtype=np.float32)
        if llr.shape != (self.code.n,):
            raise ValueError(f"llr must have length n={self.code.n}")
        if not np.all(np.isfinite(llr)):
            raise ValueError("llr values must be finite")
        conv, iters, words = self.decode_batch(llr[None, :], threads=1)
        return DecodeOutcome(bool(conv[0]), self._unpack(words[0]), int(iters[0]))

    def decode_batch(self, llr: np.ndarray, threads: int = 1):
        """Decode ``llr`` of shape (trials, n).

        Returns (converged uint8[trials], iterations int32[trials],
        words uint64[trials, 2]) with hard words packed big-endian.
        Results are independent of ``threads``.
        """
        llr = np.ascontiguousarray(llr, dtype=np.float32)
        trials = llr.shape[0]
        conv = np.empty(trials, dtype=np.uint8)
        iters = np.empty(trials, dtype=np.int32)
        words = np.empty((trials, 2), dtype=np.uint64)

        def run(t0: int, t1: int):
            _kernels.minsum_decode_slice(
                llr, t0, t1, self.max_iter, self.clip,
                self.edge_var, self.check_ptr, self.var_edges, self.var_ptr,
                conv, iters, words)

        if threads <= 1 or trials < 2 * threads:
            run(0, trials)
        else:
            bounds = np.linspace(0, trials, threads + 1).astype(int)
            with ThreadPoolExecutor(max_workers=threads) as ex:
                futs = [ex.submit(run, int(bounds[i]), int(bounds[i + 1]))
                        for i in range(threads)]
                for f in futs:
                    f.result()
        return conv, iters, words

    def _unpack(self, packed: np.ndarray) -> BitWord:
        n = self.code.n
        value = (int(packed[0]) << 64) | int(packed[1])
        return BitWord(n, value & ((1 << n) - 1))
