"""Complex linear-algebra primitives shared by the precoding and harness code.

The singular-value ordering convention used throughout the package is
ASCENDING: ``sigma[k]`` is the (k+1)-th smallest singular value and column k of
``V`` pairs with it.  Selecting "the columns of the largest singular values"
is then literally ``V[:, -m:]``.
"""

from dataclasses import dataclass

import numpy as np

from .constants import RECON_RTOL, UNITARY_ATOL


class NumericalFailure(RuntimeError):
    """Raised when a numerical routine cannot produce a trustworthy result."""


@dataclass(frozen=True)
class SvdResult:
    """Economy SVD ``a = u @ diag(sigma) @ v.conj().T`` with ascending sigma."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray


def is_semi_unitary(f, tol=UNITARY_ATOL):
    """True iff the columns of ``f`` are orthonormal to within ``tol``."""
    f = np.asarray(f)
    gram = f.conj().T @ f
    return np.linalg.norm(gram - np.eye(f.shape[1])) <= tol


def svd(a):
    """Economy SVD with singular values sorted ascending.

    Parameters
    ----------
    a : ndarray, shape (rows, cols)
        Complex matrix with finite entries.

    Returns
    -------
    SvdResult
        ``u`` (rows x k), ``sigma`` (k,) ascending, ``v`` (cols x k) with
        k = min(rows, cols).  Columns of zero singular values are an arbitrary
        orthonormal completion; callers must not rely on their direction.

    Raises
    ------
    NumericalFailure
        If the input contains non-finite entries or the iteration fails to
        converge.  Never returns silent NaNs.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericalFailure("svd input contains non-finite entries")
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"svd did not converge: {exc}") from exc
    # LAPACK returns descending order; flip to the ascending convention.
    return SvdResult(u=u[:, ::-1].copy(), sigma=s[::-1].copy(),
                     v=vh.conj().T[:, ::-1].copy())


def svd_reconstruction_error(a, res):
    """Relative Frobenius reconstruction error of an :func:`svd` result."""
    a = np.asarray(a, dtype=complex)
    recon = res.u @ np.diag(res.sigma) @ res.v.conj().T
    denom = max(np.linalg.norm(a), np.finfo(float).tiny)
    return np.linalg.norm(a - recon) / denom


def logdet_capacity(g, es_over_n0, m):
    """Capacity log2 det(I + (es_over_n0 / m) g*g) in bits per channel use.

    ``m`` is the total number of spatial streams of the system; the power
    normalization stays 1/m even when ``g`` holds only a subset of the stream
    columns, because each stream always transmits with energy es/m.

    Parameters
    ----------
    g : ndarray, shape (rows, cols)
        Effective channel (or a trailing column subset of it).
    es_over_n0 : float
        Linear SNR, > 0.
    m : int
        Total stream count used for the power normalization.

    Returns
    -------
    float
        Capacity in bits; 0.0 for a matrix with zero columns.
    """
    g = np.asarray(g, dtype=complex)
    if g.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {g.shape}")
    if es_over_n0 <= 0:
        raise ValueError("es_over_n0 must be positive")
    if g.shape[1] == 0:
        return 0.0
    gram = np.eye(g.shape[1]) + (es_over_n0 / m) * (g.conj().T @ g)
    sign, logdet = np.linalg.slogdet(gram)
    if sign.real <= 0:
        raise NumericalFailure("capacity Gram matrix lost positive definiteness")
    return float(logdet / np.log(2.0))


def chordal_distance(a, b):
    """Chordal subspace distance (1/sqrt(2)) ||a a* - b b*||_F.

    Both arguments must be semi-unitary with the same row count.  The distance
    depends only on the column spans, so right-multiplying either argument by
    a unitary matrix leaves it unchanged.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] != b.shape[0]:
        raise ValueError(f"row-count mismatch: {a.shape} vs {b.shape}")
    diff = a @ a.conj().T - b @ b.conj().T
    return float(np.linalg.norm(diff) / np.sqrt(2.0))
