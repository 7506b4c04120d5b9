"""Block-fading Rayleigh MIMO channel, the transmit equation, and the fixed
test channel used for the deterministic experiments.

Noise convention: ``n0`` is the total complex variance of one received entry,
z ~ CN(0, n0).  SNR axes everywhere in the package are Es/N0 in dB.  Channels
stay constant over the N slots of a frame; the receiver has perfect CSI and
feeds back codebook indices without error or delay.
"""

import numpy as np

_SQRT_HALF = 1.0 / np.sqrt(2.0)


def rng_for(master_seed, *path):
    """Counter-style RNG derivation: one generator per (seed, purpose, frame).

    The stream depends only on the integers in ``path``, never on execution
    order, so results are reproducible for any worker partitioning.
    """
    return np.random.default_rng(
        np.random.SeedSequence((int(master_seed),) + tuple(int(p) for p in path)))


def draw_channel(m_r, m_t, rng):
    """Channel matrix with i.i.d. CN(0, 1) entries (real/imag variance 1/2 each)."""
    return _SQRT_HALF * (rng.standard_normal((m_r, m_t))
                         + 1j * rng.standard_normal((m_r, m_t)))


def draw_noise(m_r, n_slots, n0, rng):
    """Noise block with i.i.d. CN(0, n0) entries."""
    return np.sqrt(n0 / 2.0) * (rng.standard_normal((m_r, n_slots))
                                + 1j * rng.standard_normal((m_r, n_slots)))


def transmit(h, f, s, es, n0, rng):
    """Received block Y = sqrt(es/M) H F S + Z with Z ~ CN(0, n0) entrywise.

    M is the stream count (rows of ``s``); with a semi-unitary precoder and
    unit-energy symbols the average transmit power per slot equals ``es``.
    Passing ``n0`` = 0 disables the noise (exact noiseless output).
    """
    h = np.asarray(h, dtype=complex)
    f = np.asarray(f, dtype=complex)
    s = np.asarray(s, dtype=complex)
    if h.shape[1] != f.shape[0] or f.shape[1] != s.shape[0]:
        raise ValueError(
            f"dimension mismatch: h {h.shape}, f {f.shape}, s {s.shape}")
    m = s.shape[0]
    y = np.sqrt(es / m) * (h @ (f @ s))
    if n0 > 0:
        y = y + draw_noise(h.shape[0], s.shape[1], n0, rng)
    return y


def fixed_test_channel():
    """The constant 3x3 channel used for the reproducible experiments."""
    return np.array([
        [0.61 - 0.92j, -0.93 + 0.56j, -1.24 + 0.35j],
        [0.93 - 1.30j, -0.21 - 0.15j, -0.51 - 0.60j],
        [0.01 + 0.35j, -0.64 - 0.44j, 0.78 + 0.04j],
    ])
