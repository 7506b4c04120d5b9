"""Polar component codes: construction, encoding, CRC handling, decoding.

A frame carries M parallel component codes of common length ``code_len``
(= 2N for N QPSK slots per stream).  The information set is chosen jointly
across the M streams from their density-evolution reliability profiles, so a
strongly polarized stream may carry many more payload bits than a weak one.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from . import _kernels
from .constants import GA_MEAN_CLAMP

# CRC-6 generator x^6 + x^5 + 1 (the 5G NR CRC6), MSB first.
CRC6_POLY = (1, 1, 0, 0, 0, 0, 1)


def _as_bits(bits):
    arr = np.asarray(bits, dtype=np.int8)
    if arr.ndim != 1 or not np.all((arr == 0) | (arr == 1)):
        raise ValueError("expected a 1-D 0/1 bit vector")
    return arr


def _check_power_of_two(n, name):
    if n < 2 or n & (n - 1):
        raise ValueError(f"{name} must be a power of two >= 2, got {n}")


@dataclass(frozen=True)
class ReliabilityProfile:
    """Per-stream density-evolution LLR means of the synthesized channels."""

    llr_means: np.ndarray  # shape (streams, code_len), non-negative

    def __post_init__(self):
        means = np.asarray(self.llr_means, dtype=float)
        if means.ndim != 2:
            raise ValueError("llr_means must be 2-D (streams x code_len)")
        if not np.all(np.isfinite(means)) or np.any(means < 0):
            raise ValueError("llr_means must be finite and non-negative")
        object.__setattr__(self, "llr_means", means)


@dataclass(frozen=True)
class PolarSpec:
    """Code parameters shared by encoder and decoders.

    ``info_sets[i]`` holds the ascending info-bit positions of stream i.  When
    ``crc_len`` > 0 the last ``crc_len`` positions of each non-empty stream
    carry that stream's CRC, appended after its payload bits; ``total_info``
    counts payload bits only.
    """

    code_len: int
    streams: int
    total_info: int
    info_sets: tuple
    crc_poly: tuple = CRC6_POLY
    crc_len: int = 0
    list_size: int = 1

    def __post_init__(self):
        _check_power_of_two(self.code_len, "code_len")
        if self.streams < 1 or len(self.info_sets) != self.streams:
            raise ValueError("info_sets must hold one index set per stream")
        sets = []
        total = 0
        for idx in self.info_sets:
            arr = np.asarray(idx, dtype=np.int64)
            if arr.size and (arr.min() < 0 or arr.max() >= self.code_len):
                raise ValueError("info-set index out of range")
            if arr.size != np.unique(arr).size:
                raise ValueError("info-set indices must be unique")
            if self.crc_len and 0 < arr.size <= self.crc_len:
                raise ValueError(
                    "stream allocation smaller than its CRC; construction unusable")
            arr = np.sort(arr)
            arr.setflags(write=False)
            sets.append(arr)
            total += arr.size
        n_crc = sum(self.crc_len for s in sets if s.size) if self.crc_len else 0
        if total != self.total_info + n_crc:
            raise ValueError(
                f"info sets hold {total} positions, expected "
                f"{self.total_info} payload + {n_crc} CRC bits")
        if self.crc_len and len(self.crc_poly) != self.crc_len + 1:
            raise ValueError("crc_poly degree must equal crc_len")
        if self.list_size < 1:
            raise ValueError("list_size must be >= 1")
        object.__setattr__(self, "info_sets", tuple(sets))

    def payload_size(self, stream):
        """Number of payload bits on one stream (CRC excluded)."""
        n = self.info_sets[stream].size
        return n - self.crc_len if (self.crc_len and n) else n

    def frozen_mask(self, stream):
        mask = np.ones(self.code_len, dtype=np.uint8)
        mask[self.info_sets[stream]] = 0
        return mask


def ga_evolve(initial_llr_mean, code_len):
    """Density-evolution LLR means of the synthesized channels.

    Tracks only the Gaussian mean through the polar transform: check-node
    update m- = phi^-1(1 - (1 - phi(m))^2), variable-node update m+ = 2m,
    natural bit order.  Means are clamped at a large ceiling.

    Parameters
    ----------
    initial_llr_mean : float
        LLR mean of the underlying channel, >= 0.
    code_len : int
        Power of two.

    Returns
    -------
    ndarray, shape (code_len,)
        Non-negative synthesized-channel means; index code_len - 1 is the most
        reliable channel.
    """
    if initial_llr_mean < 0:
        raise ValueError("initial_llr_mean must be non-negative")
    _check_power_of_two(code_len, "code_len")
    return _kernels.ga_evolve_kernel(float(initial_llr_mean),
                                     int(np.log2(code_len)))


def select_info_sets(profile, total_info_plus_crc):
    """Pick the most reliable synthesized channels jointly across streams.

    Ties are broken by (stream index, bit index) ascending so the selection is
    deterministic.  Returns one ascending index array per stream.
    """
    means = profile.llr_means
    streams, code_len = means.shape
    if total_info_plus_crc > streams * code_len:
        raise ValueError("cannot select more channels than exist")
    stream_idx, bit_idx = np.divmod(np.arange(means.size), code_len)
    # lexsort: last key is primary.
    order = np.lexsort((bit_idx, stream_idx, -means.ravel()))
    chosen = order[:total_info_plus_crc]
    return [np.sort(bit_idx[chosen[stream_idx[chosen] == s]])
            for s in range(streams)]


def polar_encode(info_bits, spec, stream):
    """Encode one stream: place bits on its info set, apply the transform."""
    info_bits = _as_bits(info_bits)
    positions = spec.info_sets[stream]
    if info_bits.size != positions.size:
        raise ValueError(
            f"stream {stream} expects {positions.size} bits, got {info_bits.size}")
    u = np.zeros(spec.code_len, dtype=np.int8)
    u[positions] = info_bits
    return _kernels.polar_transform_kernel(u)


def crc_attach(bits, poly):
    """Append the CRC remainder of ``bits`` under the generator ``poly``."""
    bits = _as_bits(bits)
    poly_arr = _as_bits(poly)
    if poly_arr.size < 2 or poly_arr[0] != 1:
        raise ValueError("CRC polynomial must start with its leading 1")
    rem = _kernels.crc_remainder_kernel(bits, poly_arr)
    return np.concatenate([bits, rem])


def crc_check(bits_with_crc, poly):
    """True iff the trailing CRC is consistent with the leading payload."""
    bits = _as_bits(bits_with_crc)
    poly_arr = _as_bits(poly)
    crc_len = poly_arr.size - 1
    if bits.size < crc_len:
        raise ValueError("message shorter than the CRC itself")
    rem = _kernels.crc_remainder_kernel(bits[:bits.size - crc_len], poly_arr)
    return bool(np.array_equal(rem, bits[bits.size - crc_len:]))


def sc_decode(llrs, spec, stream):
    """Successive-cancellation decode of one stream.

    LLRs follow the ln(P(bit=0)/P(bit=1)) convention; an LLR of exactly zero
    decides bit 0.  Returns the estimated info bits (payload + CRC positions).
    """
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    if llrs.shape != (spec.code_len,):
        raise ValueError(f"expected {spec.code_len} LLRs, got {llrs.shape}")
    u = _kernels.sc_decode_kernel(llrs, spec.frozen_mask(stream))
    return u[spec.info_sets[stream]]


def ca_scl_decode(llrs, spec, stream):
    """CRC-aided list decode of one stream.

    Returns ``(info_bits, success)``.  Among CRC-passing paths the one with
    the lowest path metric wins; if none passes, the overall lowest-metric
    path is returned with ``success`` False.  With ``list_size`` 1 and no CRC
    the output equals :func:`sc_decode` bit for bit.
    """
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    if llrs.shape != (spec.code_len,):
        raise ValueError(f"expected {spec.code_len} LLRs, got {llrs.shape}")
    u, pm, n_active = _kernels.scl_decode_kernel(
        llrs, spec.frozen_mask(stream), spec.list_size)
    positions = spec.info_sets[stream]
    order = sorted(range(n_active), key=lambda p: (pm[p], p))
    if spec.crc_len == 0 or positions.size == 0:
        return u[order[0]][positions], True
    poly_arr = np.asarray(spec.crc_poly, dtype=np.int8)
    for p in order:
        cand = u[p][positions]
        if crc_check(cand, poly_arr):
            return cand, True
    return u[order[0]][positions], False


def ga_block_error_bound(profile, info_sets):
    """Union-style block-error estimate 1 - prod(1 - Q(sqrt(m_i / 2))).

    The product runs over the selected synthesized channels of every stream;
    ``m_i`` are the density-evolution LLR means in ``profile``.
    """
    log_ok = 0.0
    for s, positions in enumerate(info_sets):
        means = profile.llr_means[s][np.asarray(positions, dtype=np.int64)]
        p_err = 0.5 * erfc(np.sqrt(means) / 2.0)
        log_ok += np.sum(np.log1p(-p_err))
    return float(-np.expm1(log_ok))


def write_info_sets(path, spec):
    """Export the per-stream info sets as text, one line per stream."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# code_len={spec.code_len} streams={spec.streams} "
                 f"total_info={spec.total_info} crc_len={spec.crc_len} "
                 f"list_size={spec.list_size} "
                 f"crc_poly={''.join(str(b) for b in spec.crc_poly)}\n")
        for positions in spec.info_sets:
            fh.write(" ".join(str(int(i)) for i in positions) + "\n")


def read_info_sets(path):
    """Load a spec previously written by :func:`write_info_sets`."""
    with open(path, encoding="ascii") as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError("missing info-set header line")
        fields = dict(tok.split("=") for tok in header[1:].split())
        sets = [np.array([int(t) for t in line.split()], dtype=np.int64)
                for line in fh if line.strip()]
    return PolarSpec(
        code_len=int(fields["code_len"]),
        streams=int(fields["streams"]),
        total_info=int(fields["total_info"]),
        info_sets=tuple(sets),
        crc_poly=tuple(int(c) for c in fields["crc_poly"]),
        crc_len=int(fields["crc_len"]),
        list_size=int(fields["list_size"]),
    )
