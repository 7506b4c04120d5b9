"""Compiled inner loops: polar transform, SC / list decoding, density evolution.

Indexing is natural (non-bit-reversed) throughout.  The decoder tree for a
length-N code has depth n = log2(N); depth 0 is the channel level and depth n
the decision leaves.  Per-path scratch layout, with N = 1 << n:

* LLR tree, levels 1..n packed into a length N-1 array; level d (width N >> d)
  starts at offset N - (N >> (d-1)).
* Saved left-child codewords for depths 0..n-1 packed the same way: the slot
  for depth d (width N >> (d+1)) starts at offset N - (N >> d).
"""

import numpy as np
from numba import njit

from .constants import GA_MEAN_CLAMP

# Value of the fitted mid-range form at the 10.0 seam; the asymptotic branch
# is capped here so the overall function stays monotone.
_PHI_SEAM = float(np.exp(0.0218 - 0.4527 * 10.0 ** 0.86))

# Crossing point of the small-argument moment series and the fitted form;
# switching exactly there keeps phi continuous.  The fitted form alone loses
# too much accuracy in 1 - phi below ~0.3, which compounds through chains of
# check-node updates on the least reliable synthesized channels.
_PHI_SERIES_CUT = 0.32333040659493184


@njit(cache=True)
def phi_ga(x):
    """Gaussian-approximation phi(x) = 1 - E[tanh(L/2)], L ~ N(x, 2x)."""
    if x <= 0.0:
        return 1.0
    if x < _PHI_SERIES_CUT:
        # Taylor expansion of E[tanh(L/2)] in the moments of L ~ N(x, 2x).
        t = (x / 2.0
             - (x ** 3 + 6.0 * x ** 2) / 24.0
             + (x ** 5 + 20.0 * x ** 4 + 60.0 * x ** 3) / 240.0
             - 17.0 * (x ** 7 + 42.0 * x ** 6 + 420.0 * x ** 5
                       + 840.0 * x ** 4) / 40320.0)
        return 1.0 - t
    if x < 10.0:
        v = np.exp(0.0218 - 0.4527 * x ** 0.86)
        return v if v < 1.0 else 1.0
    v = np.sqrt(np.pi / x) * np.exp(-x / 4.0) * (1.0 - 10.0 / (7.0 * x))
    return v if v < _PHI_SEAM else _PHI_SEAM


@njit(cache=True)
def phi_ga_inv(y):
    """Inverse of phi_ga by bisection to 1e-9 absolute accuracy."""
    if y >= 1.0:
        return 0.0
    if y <= 0.0:
        return GA_MEAN_CLAMP
    lo = 0.0
    hi = GA_MEAN_CLAMP
    if phi_ga(hi) >= y:
        return hi
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if phi_ga(mid) > y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@njit(cache=True)
def ga_evolve_kernel(m0, n_levels):
    """LLR means of the 2**n_levels synthesized channels, natural order.

    Check-node children land at even offsets, variable-node (doubling)
    children at odd offsets, so index 0 is the least reliable channel and
    index N-1 the most reliable.
    """
    size = 1 << n_levels
    out = np.empty(size, dtype=np.float64)
    out[0] = m0 if m0 < GA_MEAN_CLAMP else GA_MEAN_CLAMP
    width = 1
    for _ in range(n_levels):
        for k in range(width - 1, -1, -1):
            m = out[k]
            y = phi_ga(m)
            minus = phi_ga_inv(y * (2.0 - y))
            plus = 2.0 * m
            if plus > GA_MEAN_CLAMP:
                plus = GA_MEAN_CLAMP
            out[2 * k] = minus
            out[2 * k + 1] = plus
        width <<= 1
    return out


@njit(cache=True)
def polar_transform_kernel(u):
    """v = u F^{x n} over GF(2); the butterfly stages commute."""
    v = u.copy()
    size = v.shape[0]
    h = 1
    while h < size:
        for i in range(0, size, 2 * h):
            for j in range(i, i + h):
                v[j] ^= v[j + h]
        h <<= 1
    return v


@njit(cache=True)
def crc_remainder_kernel(bits, poly):
    """Remainder of bits * x^deg divided by poly (both MSB-first bit arrays)."""
    deg = poly.shape[0] - 1
    msg_len = bits.shape[0]
    work = np.zeros(msg_len + deg, dtype=np.int8)
    work[:msg_len] = bits
    for i in range(msg_len):
        if work[i]:
            for j in range(deg + 1):
                work[i + j] ^= poly[j]
    return work[msg_len:]


@njit(cache=True, inline="always")
def _boxplus(a, b):
    # Exact check-node LLR combination in a numerically stable form.
    s = min(abs(a), abs(b))
    if (a > 0.0) != (b > 0.0):
        s = -s
    if a == 0.0 or b == 0.0:
        s = 0.0
    return s + np.log1p(np.exp(-abs(a + b))) - np.log1p(np.exp(-abs(a - b)))


@njit(cache=True, inline="always")
def _softplus(x):
    if x > 0.0:
        return x + np.log1p(np.exp(-x))
    return np.log1p(np.exp(x))


@njit(cache=True)
def _descend(ch, llr, cw, i, n):
    """Refresh the LLR tree segments needed at leaf i; return the leaf LLR."""
    size = 1 << n
    if i == 0:
        d_start = 1
    else:
        s = 0
        j = i
        while j & 1 == 0:
            s += 1
            j >>= 1
        d0 = n - s
        w = size >> d0
        o = size - (size >> (d0 - 1))
        co = size - (size >> (d0 - 1))
        if d0 == 1:
            for k in range(w):
                sign = 1.0 - 2.0 * cw[co + k]
                llr[o + k] = sign * ch[k] + ch[k + w]
        else:
            po = size - (size >> (d0 - 2))
            for k in range(w):
                sign = 1.0 - 2.0 * cw[co + k]
                llr[o + k] = sign * llr[po + k] + llr[po + k + w]
        d_start = d0 + 1
    for d in range(d_start, n + 1):
        w = size >> d
        o = size - (size >> (d - 1))
        if d == 1:
            for k in range(w):
                llr[o + k] = _boxplus(ch[k], ch[k + w])
        else:
            po = size - (size >> (d - 2))
            for k in range(w):
                llr[o + k] = _boxplus(llr[po + k], llr[po + k + w])
    return llr[size - 2]


@njit(cache=True)
def _propagate(cw, scratch, bit, i, n):
    """Fold the decision for leaf i into the saved partial-sum codewords."""
    size = 1 << n
    scratch[0] = bit
    width = 1
    d = n
    j = i
    while j & 1:
        co = size - (size >> (d - 1))
        for k in range(width):
            scratch[width + k] = scratch[k]
        for k in range(width):
            scratch[k] = cw[co + k] ^ scratch[width + k]
        width <<= 1
        d -= 1
        j >>= 1
    if d > 0:
        co = size - (size >> (d - 1))
        for k in range(width):
            cw[co + k] = scratch[k]


@njit(cache=True)
def sc_decode_kernel(ch, frozen):
    """Successive-cancellation decode; returns the full length-N u estimate."""
    size = ch.shape[0]
    n = 0
    t = size
    while t > 1:
        t >>= 1
        n += 1
    llr = np.empty(size - 1, dtype=np.float64)
    cw = np.zeros(size - 1, dtype=np.int8)
    scratch = np.empty(size, dtype=np.int8)
    u = np.zeros(size, dtype=np.int8)
    for i in range(size):
        leaf = _descend(ch, llr, cw, i, n)
        if frozen[i]:
            b = 0
        else:
            b = 1 if leaf < 0.0 else 0
        u[i] = b
        _propagate(cw, scratch, b, i, n)
    return u


@njit(cache=True)
def scl_decode_kernel(ch, frozen, list_size):
    """List decode with the exact LLR-domain path metric.

    Returns (u, pm, n_active): u holds one full-length decision vector per
    surviving path, pm the path metrics.  Path slots are not metric-sorted on
    exit; callers rank by (pm, slot).  With list_size 1 the output is
    bit-identical to sc_decode_kernel.
    """
    size = ch.shape[0]
    n = 0
    t = size
    while t > 1:
        t >>= 1
        n += 1
    llr = np.empty((list_size, size - 1), dtype=np.float64)
    llr_nxt = np.empty((list_size, size - 1), dtype=np.float64)
    cw = np.zeros((list_size, size - 1), dtype=np.int8)
    cw_nxt = np.empty((list_size, size - 1), dtype=np.int8)
    u = np.zeros((list_size, size), dtype=np.int8)
    u_nxt = np.empty((list_size, size), dtype=np.int8)
    pm = np.zeros(list_size, dtype=np.float64)
    pm_nxt = np.empty(list_size, dtype=np.float64)
    scratch = np.empty(size, dtype=np.int8)
    leaf = np.empty(list_size, dtype=np.float64)
    pref = np.empty(list_size, dtype=np.int8)
    cand_pm = np.empty(2 * list_size, dtype=np.float64)
    used = np.empty(2 * list_size, dtype=np.bool_)
    n_active = 1
    for i in range(size):
        for p in range(n_active):
            leaf[p] = _descend(ch, llr[p], cw[p], i, n)
        if frozen[i]:
            for p in range(n_active):
                pm[p] += _softplus(-leaf[p])
                u[p, i] = 0
                _propagate(cw[p], scratch, 0, i, n)
        else:
            n_cand = 2 * n_active
            for p in range(n_active):
                cand_pm[p] = pm[p] + _softplus(-leaf[p])
                cand_pm[n_active + p] = pm[p] + _softplus(leaf[p])
                pref[p] = 1 if leaf[p] < 0.0 else 0
            n_keep = min(n_cand, list_size)
            # Smallest metrics first.  A tiny leaf LLR can be absorbed when
            # added to a large path metric, leaving both children with equal
            # metrics; ties therefore fall back to the leaf-sign decision of
            # plain SC (same parent), then to the lower parent index.
            for c in range(n_cand):
                used[c] = False
            for slot in range(n_keep):
                best = -1
                for c in range(n_cand):
                    if used[c]:
                        continue
                    if best < 0 or cand_pm[c] < cand_pm[best]:
                        best = c
                    elif cand_pm[c] == cand_pm[best]:
                        pc = c % n_active
                        pb = best % n_active
                        if pc < pb:
                            best = c
                        elif pc == pb and (c // n_active) == pref[pc] \
                                and (best // n_active) != pref[pb]:
                            best = c
                used[best] = True
                parent = best % n_active
                bit = best // n_active
                llr_nxt[slot, :] = llr[parent, :]
                cw_nxt[slot, :] = cw[parent, :]
                u_nxt[slot, :] = u[parent, :]
                u_nxt[slot, i] = bit
                pm_nxt[slot] = cand_pm[best]
            llr, llr_nxt = llr_nxt, llr
            cw, cw_nxt = cw_nxt, cw
            u, u_nxt = u_nxt, u
            pm, pm_nxt = pm_nxt, pm
            n_active = n_keep
            for p in range(n_active):
                _propagate(cw[p], scratch, u[p, i], i, n)
    return u, pm, n_active
