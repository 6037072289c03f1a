"""Numba kernels for the hot paths.

Two families live here:

* a flooding min-sum decoder that processes a contiguous slice of a trial
  batch (callers split slices across threads; kernels are nogil);
* colexicographic enumeration of fixed-weight messages against the packed
  parity halves of a rate-1/2 code (nearest-codeword scans, distance
  certification, and low-weight codeword collection).

Messages and vector halves are packed big-endian into uint64: bit j of a
k-bit message sits at 1 << (k - 1 - j), matching BitWord.value.
"""

from __future__ import annotations

import numpy as np
from numba import njit, uint64

U1 = np.uint64(1)


@njit(cache=True, nogil=True, inline="always")
def _popcount(x):
    x = uint64(x)
    x = x - ((x >> uint64(1)) & uint64(0x5555555555555555))
    x = (x & uint64(0x3333333333333333)) + ((x >> uint64(2)) & uint64(0x3333333333333333))
    x = (x + (x >> uint64(4))) & uint64(0x0F0F0F0F0F0F0F0F)
    return (x * uint64(0x0101010101010101)) >> uint64(56)


# ----------------------------------------------------------------------
# min-sum decoding
# ----------------------------------------------------------------------

@njit(cache=True, nogil=True, fastmath=True)
def minsum_decode_slice(llr, t0, t1, max_iter, clip,
                        edge_var, check_ptr, var_edges, var_ptr,
                        conv_out, iter_out, word_out):
    """Decode trials [t0, t1) of ``llr`` (shape: trials x n).

    Flooding schedule, plain min-sum, variable-to-check messages clipped
    to +-clip.  Hard-decision ties (total exactly 0) resolve to bit 0.
    Stops early once the hard decision has zero syndrome.  Outputs per
    trial: converged flag, iterations used, hard word packed big-endian
    into word_out[t, 0] (high bits) and word_out[t, 1] (low 64 bits).
    """
    n_checks = check_ptr.shape[0] - 1
    n_vars = var_ptr.shape[0] - 1
    n_edges = edge_var.shape[0]

    v2c = np.empty(n_edges, dtype=np.float32)
    c2v = np.empty(n_edges, dtype=np.float32)
    hard = np.empty(n_vars, dtype=np.uint8)

    for t in range(t0, t1):
        for e in range(n_edges):
            v2c[e] = llr[t, edge_var[e]]

        converged = False
        iters = 0
        for it in range(max_iter):
            # check node update
            for c in range(n_checks):
                lo = check_ptr[c]
                hi = check_ptr[c + 1]
                min1 = np.float32(np.inf)
                min2 = np.float32(np.inf)
                argmin = lo
                neg = 0
                for e in range(lo, hi):
                    m = v2c[e]
                    if m < 0.0:
                        neg += 1
                        m = -m
                    if m < min1:
                        min2 = min1
                        min1 = m
                        argmin = e
                    elif m < min2:
                        min2 = m
                for e in range(lo, hi):
                    mag = min2 if e == argmin else min1
                    own_neg = 1 if v2c[e] < 0.0 else 0
                    if (neg - own_neg) & 1:
                        c2v[e] = -mag
                    else:
                        c2v[e] = mag

            # variable node update + hard decision
            for v in range(n_vars):
                tot = llr[t, v]
                for j in range(var_ptr[v], var_ptr[v + 1]):
                    tot += c2v[var_edges[j]]
                hard[v] = 1 if tot < 0.0 else 0
                for j in range(var_ptr[v], var_ptr[v + 1]):
                    e = var_edges[j]
                    x = tot - c2v[e]
                    if x > clip:
                        x = clip
                    elif x < -clip:
                        x = -clip
                    v2c[e] = x

            iters = it + 1

            # syndrome check on the hard decision
            ok = True
            for c in range(n_checks):
                par = 0
                for e in range(check_ptr[c], check_ptr[c + 1]):
                    par ^= hard[edge_var[e]]
                if par:
                    ok = False
                    break
            if ok:
                converged = True
                break

        hiw = uint64(0)
        low = uint64(0)
        for v in range(n_vars):
            hiw = (hiw << U1) | ((low >> uint64(63)) & U1)
            low = (low << U1) | uint64(hard[v])
        conv_out[t] = 1 if converged else 0
        iter_out[t] = iters
        word_out[t, 0] = hiw
        word_out[t, 1] = low


# ----------------------------------------------------------------------
# colex enumeration over fixed-weight messages
# ----------------------------------------------------------------------
#
# Weight-w messages are enumerated in colexicographic order of their
# support; the outer loop runs over the largest support index t, so a
# scan can be partitioned deterministically on [t_lo, t_hi).  Partial
# parity accumulators are maintained incrementally.

@njit(cache=True, nogil=True)
def ncs_scan_weight(pl, pr, u_lr, u_rl, k, w, t_lo, t_hi,
                    d_in, s_max, set_m, set_side, set_count_in):
    """Scan all weight-w messages with largest support index in
    [t_lo, t_hi) against both systematic forms.

    Maintains the running minimum distance and the nearest set: the set
    is cleared whenever the distance improves and grows up to ``s_max``
    entries, each a (message, side) pair with side 0 = left form, 1 =
    right form.  Returns (d, set_count).
    """
    d = d_in
    count = set_count_in
    ONE = U1

    if w == 0:
        if t_lo == 0:
            dl = _popcount(u_lr)
            dr = _popcount(u_rl)
            dm = min(dl, dr)
            if dm < d:
                d = dm
                count = 0
            if dl == d and count < s_max:
                set_m[count] = uint64(0)
                set_side[count] = 0
                count += 1
            if dr == d and count < s_max:
                set_m[count] = uint64(0)
                set_side[count] = 1
                count += 1
        return d, count

    idx = np.empty(w, dtype=np.int64)
    for t in range(max(t_lo, w - 1), t_hi):
        # inner combination: indices 0..w-2 over [0, t), plus fixed index t
        m = ONE << uint64(k - 1 - t)
        accl = pl[t]
        accr = pr[t]
        for j in range(w - 1):
            idx[j] = j
            m |= ONE << uint64(k - 1 - j)
            accl ^= pl[j]
            accr ^= pr[j]

        while True:
            dl = w + _popcount(accl ^ u_lr)
            dr = w + _popcount(accr ^ u_rl)
            dm = dl if dl < dr else dr
            if dm < d:
                d = dm
                count = 0
            if dm == d:
                if dl == d and count < s_max:
                    set_m[count] = m
                    set_side[count] = 0
                    count += 1
                if dr == d and count < s_max:
                    set_m[count] = m
                    set_side[count] = 1
                    count += 1

            if w == 1:
                break
            # advance inner combination one colex step
            j = 0
            while j < w - 1:
                nxt = idx[j] + 1
                bound = idx[j + 1] if j + 1 < w - 1 else t
                if nxt < bound:
                    break
                j += 1
            if j >= w - 1:
                break
            # unwind positions 0..j, then set idx[j] += 1, reset 0..j-1
            for i in range(j + 1):
                c = idx[i]
                m ^= ONE << uint64(k - 1 - c)
                accl ^= pl[c]
                accr ^= pr[c]
            idx[j] += 1
            c = idx[j]
            m |= ONE << uint64(k - 1 - c)
            accl ^= pl[c]
            accr ^= pr[c]
            for i in range(j):
                idx[i] = i
                m |= ONE << uint64(k - 1 - i)
                accl ^= pl[i]
                accr ^= pr[i]

    return d, count


@njit(cache=True, nogil=True)
def certify_scan_weight(pl, pr, u_lr, u_rl, k, w, t_lo, t_hi,
                        limit, abort_flag):
    """Minimum distance over weight-w messages in the outer range, with
    early abort once any distance <= limit is seen (abort_flag is shared
    across concurrent scans)."""
    best = np.int64(1 << 30)
    ONE = U1

    if w == 0:
        if t_lo == 0:
            best = min(_popcount(u_lr), _popcount(u_rl))
            if best <= limit:
                abort_flag[0] = 1
        return best

    idx = np.empty(w, dtype=np.int64)
    for t in range(max(t_lo, w - 1), t_hi):
        if abort_flag[0]:
            return best
        accl = pl[t]
        accr = pr[t]
        for j in range(w - 1):
            idx[j] = j
            accl ^= pl[j]
            accr ^= pr[j]

        while True:
            dl = w + _popcount(accl ^ u_lr)
            dr = w + _popcount(accr ^ u_rl)
            dm = dl if dl < dr else dr
            if dm < best:
                best = dm
                if best <= limit:
                    abort_flag[0] = 1
                    return best

            if w == 1:
                break
            j = 0
            while j < w - 1:
                nxt = idx[j] + 1
                bound = idx[j + 1] if j + 1 < w - 1 else t
                if nxt < bound:
                    break
                j += 1
            if j >= w - 1:
                break
            for i in range(j + 1):
                c = idx[i]
                accl ^= pl[c]
                accr ^= pr[c]
            idx[j] += 1
            c = idx[j]
            accl ^= pl[c]
            accr ^= pr[c]
            for i in range(j):
                idx[i] = i
                accl ^= pl[i]
                accr ^= pr[i]

    return best


@njit(cache=True, nogil=True)
def collect_scan_weight(pl, pr, k, w, t_lo, t_hi, weight_cap,
                        out_m, out_side, cap):
    """Collect messages of weight w whose left-form or right-form codeword
    has total weight <= weight_cap.  Enumeration is centered on the zero
    word (u = 0).  Returns the number of entries written (<= cap); a
    return value of -1 signals output overflow."""
    count = 0
    ONE = U1

    if w == 0:
        return 0  # the zero codeword is implicit

    idx = np.empty(w, dtype=np.int64)
    for t in range(max(t_lo, w - 1), t_hi):
        m = ONE << uint64(k - 1 - t)
        accl = pl[t]
        accr = pr[t]
        for j in range(w - 1):
            idx[j] = j
            m |= ONE << uint64(k - 1 - j)
            accl ^= pl[j]
            accr ^= pr[j]

        while True:
            if w + _popcount(accl) <= weight_cap:
                if count >= cap:
                    return -1
                out_m[count] = m
                out_side[count] = 0
                count += 1
            if w + _popcount(accr) <= weight_cap:
                if count >= cap:
                    return -1
                out_m[count] = m
                out_side[count] = 1
                count += 1

            if w == 1:
                break
            j = 0
            while j < w - 1:
                nxt = idx[j] + 1
                bound = idx[j + 1] if j + 1 < w - 1 else t
                if nxt < bound:
                    break
                j += 1
            if j >= w - 1:
                break
            for i in range(j + 1):
                c = idx[i]
                m ^= ONE << uint64(k - 1 - c)
                accl ^= pl[c]
                accr ^= pr[c]
            idx[j] += 1
            c = idx[j]
            m |= ONE << uint64(k - 1 - c)
            accl ^= pl[c]
            accr ^= pr[c]
            for i in range(j):
                idx[i] = i
                m |= ONE << uint64(k - 1 - i)
                accl ^= pl[i]
                accr ^= pr[i]

    return count
