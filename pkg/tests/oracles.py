"""Independent reference implementations used as test oracles.

These deliberately avoid the library's code paths: the SVD is a one-sided
Jacobi iteration, the SC reference is a plain recursion, the ML decoder
enumerates every codeword, the CRC reference divides integers, and the
density-evolution oracle combines sampled LLRs exactly and re-projects onto
consistent Gaussians through quadrature.
"""

import numpy as np
from scipy.optimize import brentq

from polarmimo._kernels import _boxplus

# ---------------------------------------------------------------------------
# one-sided Jacobi SVD

def jacobi_singular_values(a, sweeps=100, tol=1e-28):
    """Singular values (ascending) by one-sided Jacobi column orthogonalization."""
    a = np.array(a, dtype=complex)
    if a.shape[1] > a.shape[0]:
        a = a.conj().T
    n = a.shape[1]
    for _ in range(sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                app = np.vdot(a[:, p], a[:, p]).real
                aqq = np.vdot(a[:, q], a[:, q]).real
                apq = np.vdot(a[:, p], a[:, q])
                if abs(apq) ** 2 <= tol * app * aqq:
                    continue
                off += abs(apq) ** 2
                alpha = apq / abs(apq)
                tau = (aqq - app) / (2.0 * abs(apq))
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau else 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * np.conj(alpha) * aq
                a[:, q] = s * alpha * ap + c * aq
        if off == 0.0:
            break
    return np.sort(np.sqrt(np.sum(np.abs(a) ** 2, axis=0)))


# ---------------------------------------------------------------------------
# polar code references

def sc_reference(llrs, frozen):
    """Plain recursive SC decode (natural order); returns the u vector.

    Shares only the scalar check-node primitive with the library so that the
    tree wiring and scheduling are validated independently.
    """
    def rec(llr, fr):
        size = len(llr)
        if size == 1:
            u = 0 if (fr[0] or llr[0] >= 0) else 1
            return [u], [u]
        half = size // 2
        l_minus = [_boxplus(llr[k], llr[k + half]) for k in range(half)]
        u_l, x_l = rec(l_minus, fr[:half])
        l_plus = [(1 - 2 * x_l[k]) * llr[k] + llr[k + half] for k in range(half)]
        u_r, x_r = rec(l_plus, fr[half:])
        return u_l + u_r, [a ^ b for a, b in zip(x_l, x_r)] + x_r

    u, _ = rec(list(np.asarray(llrs, dtype=float)), list(frozen))
    return np.array(u, dtype=np.int8)


def encode_reference(u):
    """v = u G with G built by the explicit [[G,0],[G,G]] recursion."""
    u = np.asarray(u, dtype=np.int8)
    size = u.shape[0]
    g = np.array([[1]], dtype=np.int8)
    while g.shape[0] < size:
        z = np.zeros_like(g)
        g = np.block([[g, z], [g, g]])
    return (u @ g) % 2


def ml_codeword_decode(llrs, info_positions, code_len):
    """Maximum-likelihood decode by enumerating all 2^k codewords.

    Returns (info bits, correlation metric).  Under the ln(P0/P1) convention
    the ML codeword maximizes sum((1 - 2 v_j) llr_j).
    """
    k = len(info_positions)
    best_bits, best_metric = None, -np.inf
    for idx in range(2 ** k):
        bits = np.array([(idx >> j) & 1 for j in range(k)], dtype=np.int8)
        u = np.zeros(code_len, dtype=np.int8)
        u[info_positions] = bits
        v = encode_reference(u)
        metric = float(np.sum((1 - 2 * v) * llrs))
        if metric > best_metric:
            best_metric = metric
            best_bits = bits
    return best_bits, best_metric


def crc_remainder_int(bits, poly_bits):
    """CRC remainder via integer arithmetic (independent of the array version)."""
    deg = len(poly_bits) - 1
    poly = 0
    for b in poly_bits:
        poly = (poly << 1) | int(b)
    reg = 0
    for b in bits:
        reg = (reg << 1) | int(b)
    for _ in range(deg):
        reg <<= 1
    nbits = len(bits) + deg
    for shift in range(nbits - deg - 1, -1, -1):
        if reg >> (shift + deg) & 1:
            reg ^= poly << shift
    return np.array([(reg >> (deg - 1 - j)) & 1 for j in range(deg)],
                    dtype=np.int8)


# ---------------------------------------------------------------------------
# Gaussian density-evolution oracle

_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(201)


def phi_exact(m):
    """1 - E[tanh(L/2)] for L ~ N(m, 2m), by Gauss-Hermite quadrature."""
    if m <= 0:
        return 1.0
    llr = m + np.sqrt(2.0 * m) * np.sqrt(2.0) * _GH_NODES
    return float(1.0 - np.sum(_GH_WEIGHTS * np.tanh(llr / 2.0)) / np.sqrt(np.pi))


def phi_exact_inv(y):
    if y >= 1.0:
        return 0.0
    return brentq(lambda m: phi_exact(m) - y, 1e-12, 1e5, xtol=1e-12, rtol=1e-14)


def mc_density_evolution(m0, n_levels, n_samples, seed):
    """Monte Carlo Gaussian density evolution, natural channel order.

    Check-node outputs are combined exactly on sampled LLR pairs, then
    re-projected onto the consistent Gaussian matching E[tanh(L/2)];
    variable nodes double the mean exactly.
    """
    rng = np.random.default_rng(seed)

    def check(m):
        a = rng.normal(m, np.sqrt(2.0 * m), n_samples)
        b = rng.normal(m, np.sqrt(2.0 * m), n_samples)
        t = np.tanh(a / 2.0) * np.tanh(b / 2.0)
        combined = 2.0 * np.arctanh(np.clip(t, -1 + 1e-16, 1 - 1e-16))
        return phi_exact_inv(1.0 - float(np.mean(np.tanh(combined / 2.0))))

    means = [m0]
    for _ in range(n_levels):
        means = [v for m in means
                 for v in ((check(m) if m > 0 else 0.0), 2.0 * m)]
    return np.array(means)


# ---------------------------------------------------------------------------
# demodulation oracle

def mlsic_llrs_direct(y_col, g_tail, es, n0, m_total):
    """ML-SIC bit LLRs by direct summation (no log-sum-exp stabilization)."""
    tail = g_tail.shape[1]
    sqrt_half = 1.0 / np.sqrt(2.0)
    out = []
    for bit in (0, 1):
        num = den = 0.0
        for h in range(4 ** tail):
            sym = np.array([((1 - 2 * ((h >> (2 * j)) & 1))
                             + 1j * (1 - 2 * ((h >> (2 * j + 1)) & 1))) * sqrt_half
                            for j in range(tail)])
            dist = np.linalg.norm(y_col - np.sqrt(es / m_total) * g_tail @ sym) ** 2
            w = np.exp(-dist / n0)
            if (h >> bit) & 1:
                den += w
            else:
                num += w
        out.append(np.log(num) - np.log(den))
    return out


def random_semi_unitary(rows, cols, rng):
    """Haar-ish random semi-unitary via QR of a Gaussian matrix."""
    z = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_unitary(n, rng):
    return random_semi_unitary(n, n, rng)
