"""QPSK mapping and the exact ML-SIC soft demodulator.

Bit packing convention, fixed once for the whole pipeline: codeword bits
(2t, 2t+1) of a stream become symbol t, with bit 2t on the real axis and bit
2t+1 on the imaginary axis of the Gray-mapped unit-energy constellation.
"""

import numpy as np

from . import polar

_SQRT_HALF = 1.0 / np.sqrt(2.0)


def qpsk_map(b0, b1):
    """Gray-mapped unit-energy QPSK symbol ((1 - 2 b0) + 1j (1 - 2 b1)) / sqrt(2)."""
    return ((1.0 - 2.0 * b0) + 1j * (1.0 - 2.0 * b1)) * _SQRT_HALF


def bits_to_symbols(bits):
    """Map a length-2N bit vector to N QPSK symbols (bit 2t real, 2t+1 imag)."""
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size % 2:
        raise ValueError("expected an even-length bit vector")
    return qpsk_map(bits[0::2].astype(float), bits[1::2].astype(float))


def joint_qpsk_hypotheses(n_streams):
    """All 4**n_streams joint symbol vectors, shape (n_streams, 4**n_streams).

    Hypothesis h assigns stream j the bits b0 = (h >> 2j) & 1 (real axis) and
    b1 = (h >> (2j + 1)) & 1 (imaginary axis).
    """
    h = np.arange(4 ** n_streams)
    j = np.arange(n_streams)[:, None]
    b0 = (h[None, :] >> (2 * j)) & 1
    b1 = (h[None, :] >> (2 * j + 1)) & 1
    return qpsk_map(b0.astype(float), b1.astype(float))


def _logsumexp(a, axis):
    # Max-subtraction stabilization; results are invariant to the shift.
    m = np.max(a, axis=axis, keepdims=True)
    return (m + np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True))
            ).squeeze(axis)


def mlsic_llrs_block(y, g_tail, es, n0, m_total):
    """Bit LLRs of the first undetected stream for every time slot at once.

    Exact marginalization over all joint QPSK assignments of the remaining
    streams: for each bit b of the first column's stream,

        LLR = logsum_{s: b=0} exp(-||y - sqrt(es/M) g_tail s||^2 / n0)
            - logsum_{s: b=1} exp(same),

    with the sum over all 4**(tail size) hypotheses.

    Parameters
    ----------
    y : ndarray, shape (m_r, n_slots)
        Received block after cancelling the already-detected streams.
    g_tail : ndarray, shape (m_r, tail)
        Effective-channel columns of the undetected streams, first column
        belonging to the stream being demodulated.
    es, n0 : float
        Total symbol energy and total complex noise variance per entry.
    m_total : int
        Total stream count (power normalization uses es / m_total).

    Returns
    -------
    ndarray, shape (2, n_slots)
        Row 0: LLRs of the real-axis bits; row 1: imaginary-axis bits.
    """
    y = np.asarray(y, dtype=complex)
    g_tail = np.asarray(g_tail, dtype=complex)
    if g_tail.ndim != 2 or g_tail.shape[1] == 0:
        raise ValueError("g_tail must have at least one column")
    if y.ndim != 2 or y.shape[0] != g_tail.shape[0]:
        raise ValueError("y and g_tail row counts differ")
    if n0 <= 0:
        raise ValueError("n0 must be positive")
    tail = g_tail.shape[1]
    hyp = joint_qpsk_hypotheses(tail)                   # (tail, 4**tail)
    means = np.sqrt(es / m_total) * (g_tail @ hyp)      # (m_r, 4**tail)
    # ||y_t - mean_h||^2 expanded; the |y|^2 term cancels in the LLR.
    metric = (2.0 * np.real(means.conj().T @ y)
              - np.sum(np.abs(means) ** 2, axis=0)[:, None]) / n0
    h_idx = np.arange(4 ** tail)
    out = np.empty((2, y.shape[1]))
    for bit in (0, 1):
        mask = ((h_idx >> bit) & 1).astype(bool)
        out[bit] = _logsumexp(metric[~mask], axis=0) - _logsumexp(metric[mask], axis=0)
    return out


def mlsic_llrs(y_col, g_tail, es, n0, m_total):
    """LLRs (real-axis bit, imag-axis bit) for one time slot; see the block form."""
    y_col = np.asarray(y_col, dtype=complex).reshape(-1, 1)
    block = mlsic_llrs_block(y_col, g_tail, es, n0, m_total)
    return float(block[0, 0]), float(block[1, 0])


def remap_stream(decoded_info, spec, stream):
    """Re-encode a decoded stream and return its N QPSK symbols for cancellation."""
    codeword = polar.polar_encode(decoded_info, spec, stream)
    return bits_to_symbols(codeword)
