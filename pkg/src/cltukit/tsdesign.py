"""Tail-sequence design and certification.

The design goal is a 128-bit word that is far (in Hamming distance) from
every codeword, so that the decoder reliably fails on it.  This module
provides:

* ``ncs``: nearest-codeword search around an arbitrary word for rate-1/2
  codes, by enumerating low-weight messages through both systematic
  forms (each half of a difference pattern at distance d has weight at
  most ceil(d/2), so scanning messages by weight certifies the result);
* ``certify_min_distance``: the same scan truncated at a target radius;
* ``enumerate_low_weight``: exhaustive collection of all codewords up to
  twice a half-weight budget;
* ``guaranteed_search``: rejection sampling of fixed-weight words whose
  overlap with every listed low-weight codeword is small enough to bound
  the distance from all codewords at once;
* ``local_search``: stochastic hill climb that repeatedly flips a bit on
  which all current nearest codewords agree, pushing the word one step
  farther from its nearest set per accepted flip;
* ``transform_for_lrt``: XOR with a codeword to force the last half to a
  chosen pattern without changing any distance to the code;
* ``brute_force_nearest``: the independent exhaustive oracle for small k.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from . import _kernels
from .code import LinearCode
from .gf2 import BitWord

__all__ = [
    "SearchParams",
    "DistanceReport",
    "CodewordList",
    "CostCeilingError",
    "LocalSearchResult",
    "ncs",
    "certify_min_distance",
    "enumerate_low_weight",
    "guaranteed_search",
    "local_search",
    "transform_for_lrt",
    "brute_force_nearest",
]

DEFAULT_OP_CEILING = 10_000_000_000


class CostCeilingError(RuntimeError):
    """Raised when an enumeration would exceed the configured ceiling."""

    def __init__(self, estimated_ops: int, ceiling: int):
        self.estimated_ops = estimated_ops
        self.ceiling = ceiling
        super().__init__(
            f"enumeration needs ~{estimated_ops:.3g} encodings, "
            f"ceiling is {ceiling:.3g}")


@dataclass(frozen=True)
class SearchParams:
    w_max: int = 22            # weight cap for the guaranteed search
    max_attempts: int = 10 ** 6
    T: int = 512               # local-search iteration cap
    S_max: int = 64            # nearest-set size cap
    rng_seed: int = 0

    def __post_init__(self):
        if min(self.w_max, self.max_attempts, self.T, self.S_max) < 1:
            raise ValueError("all search parameters must be >= 1")


@dataclass(frozen=True)
class DistanceReport:
    d: int
    nearest: tuple[BitWord, ...]
    exact: bool

    def render(self) -> str:
        head = f"d={self.d} exact={str(self.exact).lower()} nearest={len(self.nearest)}"
        return "\n".join([head, *(w.to_hex() for w in self.nearest)])


@dataclass(frozen=True)
class LocalSearchResult:
    word: BitWord
    report: DistanceReport
    stop_reason: str            # "no_flip" or "iteration_cap"
    iterations: int
    distances: tuple[int, ...]  # d after each evaluation
    trajectory: tuple[BitWord, ...]  # the word at each evaluation


class CodewordList:
    """Low-weight codewords grouped by weight.

    ``completeness_bound`` is the largest weight up to which the list is
    certified exhaustive.  When built from a quasi-cyclic code the list
    is closed under the simultaneous block shift.
    """

    def __init__(self, n: int, k: int, by_weight: dict[int, list[BitWord]],
                 completeness_bound: int):
        self.n = n
        self.k = k
        self.by_weight = {w: sorted(ws, key=lambda x: x.value)
                          for w, ws in sorted(by_weight.items()) if ws}
        self.completeness_bound = completeness_bound

    def counts(self) -> dict[int, int]:
        return {w: len(ws) for w, ws in self.by_weight.items()}

    def words(self, lo: int = 0, hi: Optional[int] = None) -> Iterator[BitWord]:
        for w, ws in self.by_weight.items():
            if w >= lo and (hi is None or w <= hi):
                yield from ws

    def min_nonzero_weight(self) -> Optional[int]:
        ws = [w for w in self.by_weight if w > 0]
        return min(ws) if ws else None

    def save(self, path: str | Path) -> None:
        lines = [f"n={self.n} k={self.k} complete_to={self.completeness_bound}"]
        hexw = self.n % 4 == 0
        for w, words in self.by_weight.items():
            for word in words:
                rendered = word.to_hex() if hexw else format(word.value, "0%db" % self.n)
                lines.append(f"{w} {rendered}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "CodewordList":
        lines = Path(path).read_text().splitlines()
        head = dict(part.split("=") for part in lines[0].split())
        n, k = int(head["n"]), int(head["k"])
        complete_to = int(head["complete_to"])
        by_weight: dict[int, list[BitWord]] = {}
        for ln in lines[1:]:
            if not ln.strip():
                continue
            wtxt, val = ln.split()
            word = (BitWord.from_hex(val, n) if n % 4 == 0
                    else BitWord(n, int(val, 2)))
            by_weight.setdefault(int(wtxt), []).append(word)
        return cls(n, k, by_weight, complete_to)


# ----------------------------------------------------------------------
# enumeration plumbing
# ----------------------------------------------------------------------

def _enumeration_ops(k: int, max_w: int) -> int:
    """Encodings needed to scan both forms for message weights <= max_w."""
    return 2 * sum(math.comb(k, w) for w in range(max_w + 1))


def _outer_splits(k: int, w: int, parts: int) -> list[tuple[int, int]]:
    """Split the outer index range of a weight-w class into cost-balanced
    chunks (the chunk ending at t carries ~C(t, w-1) inner combinations)."""
    lo = max(0, w - 1)
    if parts <= 1 or w == 0 or k - lo <= parts:
        return [(0, k)]
    costs = np.array([math.comb(t, w - 1) for t in range(lo, k)], dtype=np.float64)
    cum = np.cumsum(costs)
    targets = cum[-1] * (np.arange(1, parts) / parts)
    cuts = np.searchsorted(cum, targets) + lo + 1
    bounds = [0, *sorted(set(int(c) for c in cuts)), k]
    return [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)
            if bounds[i] < bounds[i + 1]]


def _packed_views(code: LinearCode, s: BitWord):
    """Reference residual halves for the left/right searches around s."""
    k = code.k
    s_left, s_right = s.halves()
    c_left = code.encode_left(s_left)
    c_right = code.encode_right(s_right)
    u_l = s ^ c_left    # left half zero
    u_r = s ^ c_right   # right half zero
    u_lr = np.uint64(u_l.value)
    u_rl = np.uint64(u_r.value >> k)
    pl = code.packed_parity_left()
    pr = code.packed_parity_right()
    return pl, pr, u_lr, u_rl, c_left, c_right


def _require_rate_half(code: LinearCode, s: BitWord) -> None:
    if code.n != 2 * code.k:
        raise ValueError("rate-1/2 code required")
    if s.length != code.n:
        raise ValueError(f"query length {s.length} != n={code.n}")


# ----------------------------------------------------------------------
# nearest codeword search
# ----------------------------------------------------------------------

def ncs(code: LinearCode, s: BitWord, params: Optional[SearchParams] = None,
        weight_limit: Optional[int] = None, threads: int = 1) -> DistanceReport:
    """Nearest codewords around ``s`` for a rate-1/2 code.

    Scans messages by increasing weight w through both systematic forms
    while w <= ceil(d/2) for the running minimum d; the nearest set is
    cleared whenever d improves and capped at ``params.S_max`` entries
    (the distance itself is never affected by the cap).  ``weight_limit``
    truncates the scan; the report's ``exact`` flag records whether the
    full radius was covered.
    """
    _require_rate_half(code, s)
    params = params or SearchParams()
    pl, pr, u_lr, u_rl, c_left, c_right = _packed_views(code, s)
    k = code.k
    s_max = params.S_max

    set_m = np.empty(s_max, dtype=np.uint64)
    set_side = np.empty(s_max, dtype=np.uint8)
    d = code.n + 1
    count = 0
    w = 0
    while w <= (d + 1) // 2 and w <= k:
        if weight_limit is not None and w > weight_limit:
            break
        if threads <= 1 or w < 2:
            d, count = _kernels.ncs_scan_weight(
                pl, pr, u_lr, u_rl, k, w, 0, k, d, s_max, set_m, set_side, count)
        else:
            d, count = _ncs_scan_parallel(
                pl, pr, u_lr, u_rl, k, w, d, s_max, set_m, set_side, count, threads)
        w += 1

    exact = w > (d + 1) // 2
    words = _materialize(code, set_m[:count], set_side[:count], c_left, c_right)
    words = [cw for cw in words if (cw.value ^ s.value).bit_count() == d]
    seen: set[int] = set()
    nearest = []
    for cw in words:
        if cw.value not in seen:
            seen.add(cw.value)
            nearest.append(cw)
    return DistanceReport(d, tuple(nearest), exact)


def _ncs_scan_parallel(pl, pr, u_lr, u_rl, k, w, d, s_max,
                       set_m, set_side, count, threads):
    """One weight class split across workers; deterministic merge: min d,
    then in-order union of the per-chunk sets, then truncation."""
    splits = _outer_splits(k, w, threads)
    locals_ = []
    for _ in splits:
        locals_.append((np.empty(s_max, dtype=np.uint64),
                        np.empty(s_max, dtype=np.uint8)))

    def run(i):
        t0, t1 = splits[i]
        lm, ls = locals_[i]
        return _kernels.ncs_scan_weight(
            pl, pr, u_lr, u_rl, k, w, t0, t1, d, s_max, lm, ls, 0)

    with ThreadPoolExecutor(max_workers=threads) as ex:
        results = list(ex.map(run, range(len(splits))))

    best = min((r[0] for r in results), default=d)
    if best > d:
        best = d
    if best < d:
        count = 0
    new_m, new_s = [], []
    for (ld, lc), (lm, ls) in zip(results, locals_):
        if ld == best:
            new_m.extend(int(x) for x in lm[:lc])
            new_s.extend(int(x) for x in ls[:lc])
    for m, side in zip(new_m, new_s):
        if count >= s_max:
            break
        set_m[count] = m
        set_side[count] = side
        count += 1
    return best, count


def _materialize(code: LinearCode, ms: np.ndarray, sides: np.ndarray,
                 c_left: BitWord, c_right: BitWord) -> list[BitWord]:
    out = []
    for m, side in zip(ms, sides):
        msg = BitWord(code.k, int(m))
        if side == 0:
            out.append(c_left ^ code.encode_left(msg))
        else:
            out.append(c_right ^ code.encode_right(msg))
    return out


def certify_min_distance(code: LinearCode, s: BitWord, L: int,
                         op_ceiling: int = DEFAULT_OP_CEILING,
                         threads: int = 1) -> bool:
    """True iff no codeword lies within distance <= L of ``s``.

    Certification enumerates both-half message weights up to ceil(L/2).
    Refuses with a cost estimate when the scan would exceed the ceiling.
    """
    _require_rate_half(code, s)
    if not 0 <= L <= code.n:
        raise ValueError("L out of range")
    max_w = (L + 1) // 2
    est = _enumeration_ops(code.k, max_w)
    if est > op_ceiling:
        raise CostCeilingError(est, op_ceiling)

    pl, pr, u_lr, u_rl, _, _ = _packed_views(code, s)
    k = code.k
    abort = np.zeros(1, dtype=np.uint8)
    best = code.n + 1
    for w in range(min(max_w, k) + 1):
        splits = _outer_splits(k, w, threads)
        if len(splits) == 1 or threads <= 1:
            got = _kernels.certify_scan_weight(
                pl, pr, u_lr, u_rl, k, w, 0, k, L, abort)
            best = min(best, int(got))
        else:
            def run(span):
                return _kernels.certify_scan_weight(
                    pl, pr, u_lr, u_rl, k, w, span[0], span[1], L, abort)
            with ThreadPoolExecutor(max_workers=threads) as ex:
                for got in ex.map(run, splits):
                    best = min(best, int(got))
        if best <= L:
            return False
    return best > L


# ----------------------------------------------------------------------
# low-weight codeword enumeration
# ----------------------------------------------------------------------

def enumerate_low_weight(code: LinearCode, half_weight_budget: int,
                         op_ceiling: int = DEFAULT_OP_CEILING,
                         threads: int = 1) -> CodewordList:
    """All codewords of weight <= 2 * budget, found by pushing every
    message of weight <= budget through both systematic forms.

    Any codeword of weight <= 2b has one half of weight <= b, and each
    half is a systematic message, so the sweep is exhaustive up to 2b.
    Quasi-cyclic orbit closure is applied when the code carries a block
    size; duplicates are removed via the canonical orbit representative.
    """
    _require_rate_half(code, BitWord.zeros(code.n))
    b = half_weight_budget
    if b < 0:
        raise ValueError("budget must be >= 0")
    est = _enumeration_ops(code.k, min(b, code.k))
    if est > op_ceiling:
        raise CostCeilingError(est, op_ceiling)

    pl = code.packed_parity_left()
    pr = code.packed_parity_right()
    k = code.k
    cap = 1 << 22
    found: list[tuple[int, int]] = []  # (message, side)

    for w in range(1, min(b, k) + 1):
        splits = _outer_splits(k, w, threads)
        outs = [(np.empty(cap, dtype=np.uint64), np.empty(cap, dtype=np.uint8))
                for _ in splits]

        def run(i):
            t0, t1 = splits[i]
            om, os_ = outs[i]
            return _kernels.collect_scan_weight(
                pl, pr, k, w, t0, t1, 2 * b, om, os_, cap)

        if len(splits) == 1 or threads <= 1:
            counts = [run(i) for i in range(len(splits))]
        else:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                counts = list(ex.map(run, range(len(splits))))
        for cnt, (om, os_) in zip(counts, outs):
            if cnt < 0:
                raise RuntimeError("collection buffer overflow; raise cap")
            found.extend((int(om[i]), int(os_[i])) for i in range(cnt))

    words: set[int] = {0}
    for m, side in found:
        msg = BitWord(k, m)
        cw = code.encode_left(msg) if side == 0 else code.encode_right(msg)
        words.add(cw.value)

    if code.qc_block_size:
        closed: set[int] = set()
        for v in words:
            w0 = BitWord(code.n, v)
            for t in range(code.qc_block_size):
                closed.add(w0.qc_shift(code.qc_block_size, t).value)
        words = closed

    by_weight: dict[int, list[BitWord]] = {}
    for v in sorted(words):
        w0 = BitWord(code.n, v)
        if w0.weight <= 2 * b:
            by_weight.setdefault(w0.weight, []).append(w0)
    for ws in by_weight.values():
        for cw in ws:
            assert code.is_codeword(cw)
    return CodewordList(code.n, code.k, by_weight, 2 * b)


# ----------------------------------------------------------------------
# guaranteed-distance random search
# ----------------------------------------------------------------------

def _overlap_bound(omega: int, d_target: int, w_max: int) -> int:
    # floor((omega + D - (w_max + 1)/2) / 2) computed in integers
    return (2 * (omega + d_target) - (w_max + 1)) // 4


def guaranteed_search(code: Optional[LinearCode], low_weight: CodewordList,
                      params: SearchParams) -> Optional[BitWord]:
    """Random word with certified distance from every codeword.

    Draws words of the target weight until one overlaps every listed
    codeword of weight in [d_min, w_max] by no more than the bound; such
    a word is at distance >= its own weight from all codewords.  When
    every listed nonzero weight is even the target weight is
    ceil((w_max+1)/2), otherwise floor((w_max+1)/2).  Returns None when
    max_attempts is exhausted.  Only the block length is needed, so
    ``code`` may be None; when given it must match the list.
    """
    if code is not None and code.n != low_weight.n:
        raise ValueError("code and codeword list disagree on n")
    w_max = params.w_max
    d_min = low_weight.min_nonzero_weight()
    if d_min is None:
        raise ValueError("codeword list holds no nonzero codewords")
    if w_max <= d_min:
        raise ValueError("w_max must exceed the minimum distance")
    if low_weight.completeness_bound < w_max:
        import warnings
        warnings.warn(
            f"codeword list certified only to weight "
            f"{low_weight.completeness_bound} < w_max={w_max}; the distance "
            "guarantee is downgraded to the listed codewords", stacklevel=2)

    even_only = all(w % 2 == 0 for w in low_weight.by_weight if w > 0)
    d_target = (w_max + 2) // 2 if even_only else (w_max + 1) // 2

    checks = [(w, [c.value for c in ws], _overlap_bound(w, d_target, w_max))
              for w, ws in low_weight.by_weight.items()
              if d_min <= w <= w_max]
    n = low_weight.n
    rng = np.random.default_rng(params.rng_seed)
    for _ in range(params.max_attempts):
        pos = rng.choice(n, size=d_target, replace=False)
        v = 0
        for p in pos:
            v |= 1 << (n - 1 - int(p))
        ok = True
        for _, values, bound in checks:
            for cv in values:
                if (v & cv).bit_count() > bound:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return BitWord(n, v)
    return None


def check_overlap_bounds(v: BitWord, low_weight: CodewordList,
                         w_max: int) -> bool:
    """Whether ``v`` satisfies the acceptance condition of the guaranteed
    search against the listed codewords of weight in [d_min, w_max]."""
    d_min = low_weight.min_nonzero_weight()
    if d_min is None:
        return True
    for w, ws in low_weight.by_weight.items():
        if not d_min <= w <= w_max:
            continue
        bound = _overlap_bound(w, v.weight, w_max)
        for c in ws:
            if (v.value & c.value).bit_count() > bound:
                return False
    return True


# ----------------------------------------------------------------------
# stochastic local search
# ----------------------------------------------------------------------

def _flip_candidates(s: BitWord, nearest: tuple[BitWord, ...]) -> list[int]:
    """Bit positions where every nearest codeword agrees with s."""
    n = s.length
    full = (1 << n) - 1
    and_ones = full
    and_zeros = full
    for c in nearest:
        and_ones &= c.value
        and_zeros &= ~c.value & full
    mask = (and_ones & s.value) | (and_zeros & ~s.value & full)
    return [i for i in range(n) if (mask >> (n - 1 - i)) & 1]


def local_search(code: LinearCode, params: Optional[SearchParams] = None,
                 threads: int = 1) -> LocalSearchResult:
    """Stochastic hill climb from a random weight-1 word.

    Each iteration finds the nearest codewords, then flips a uniformly
    random bit on which they all agree with the current word, which
    pushes the word one step away from every member of that set.  Stops
    when no such bit exists or after T iterations.
    """
    params = params or SearchParams()
    rng = np.random.default_rng(params.rng_seed)
    n = code.n
    s = BitWord.unit(n, int(rng.integers(0, n)))
    distances: list[int] = []
    trajectory: list[BitWord] = []
    iterations = 0
    stop_reason = "iteration_cap"
    report = None
    while iterations < params.T:
        report = ncs(code, s, params, threads=threads)
        distances.append(report.d)
        trajectory.append(s)
        cands = _flip_candidates(s, report.nearest)
        if not cands:
            stop_reason = "no_flip"
            break
        flip = cands[int(rng.integers(0, len(cands)))]
        s = s ^ BitWord.unit(n, flip)
        iterations += 1
    else:
        report = ncs(code, s, params, threads=threads)
        distances.append(report.d)
        trajectory.append(s)
    return LocalSearchResult(s, report, stop_reason, iterations,
                             tuple(distances), tuple(trajectory))


# ----------------------------------------------------------------------
# idle-friendly transform
# ----------------------------------------------------------------------

def transform_for_lrt(code: LinearCode, v: BitWord,
                      target_half: BitWord) -> BitWord:
    """XOR ``v`` with the codeword that forces its last k bits to
    ``target_half``.  Linearity keeps every distance to the code intact,
    so the decoder-facing behavior is unchanged while the trailing half
    can mimic the idle pattern for a shared 64-bit detector."""
    _require_rate_half(code, v)
    if target_half.length != code.k:
        raise ValueError(f"target half must be {code.k} bits")
    _, v_right = v.halves()
    p = v_right ^ target_half
    return v ^ code.encode_right(p)


# ----------------------------------------------------------------------
# exhaustive oracle
# ----------------------------------------------------------------------

def brute_force_nearest(code: LinearCode, s: BitWord,
                        k_limit: int = 20) -> DistanceReport:
    """Exhaustive scan of all 2^k codewords; the independent oracle."""
    if code.k > k_limit:
        raise ValueError(f"k={code.k} exceeds brute-force limit {k_limit}")
    if s.length != code.n:
        raise ValueError("query length mismatch")
    hi_arr, lo_arr = _all_codewords_packed(code)
    s_hi = np.uint64(s.value >> 64) if code.n > 64 else np.uint64(0)
    s_lo = np.uint64(s.value & ((1 << min(code.n, 64)) - 1))
    dists = np.bitwise_count(hi_arr ^ s_hi) + np.bitwise_count(lo_arr ^ s_lo)
    d = int(dists.min())
    idx = np.flatnonzero(dists == d)
    nearest = tuple(
        BitWord(code.n, (int(hi_arr[i]) << 64 | int(lo_arr[i]))
                & ((1 << code.n) - 1))
        for i in idx)
    return DistanceReport(d, nearest, True)


def _all_codewords_packed(code: LinearCode):
    """All codewords as parallel (hi, lo) uint64 arrays, Gray-code order."""
    k, n = code.k, code.n
    rows = [code.encode_left(BitWord.unit(k, i)).value for i in range(k)]
    total = 1 << k
    hi = np.empty(total, dtype=np.uint64)
    lo = np.empty(total, dtype=np.uint64)
    mask64 = (1 << 64) - 1
    cur = 0
    hi[0] = 0
    lo[0] = 0
    for i in range(1, total):
        bit = (i & -i).bit_length() - 1
        cur ^= rows[k - 1 - bit]
        hi[i] = cur >> 64
        lo[i] = cur & mask64
    return hi, lo
