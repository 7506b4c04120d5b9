"""Codebook construction and precoder selection.

Two selection criteria are implemented.  The capacity criterion picks the
codebook member maximizing log-det capacity.  The polarization criterion
works in two steps: pick a basic matrix W for capacity, then pick a square
unitary Q that maximizes the spread of the per-substream SIC capacities
around their mean; right-multiplying by a unitary leaves the total capacity
unchanged, so the second step is free in rate.  Closed-form optimal choices
for both steps follow from the SVD of the effective channel.
"""

import hashlib
import io
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import rng_for
from .numerics import chordal_distance, logdet_capacity, svd

DEFAULT_TRAIN_TRIALS = 10_000

_CODEBOOK_RNG_TAG = 0xC0DE


@dataclass
class SelectionCounters:
    """Instrumented operation counts for selection-complexity accounting."""

    capacity_evals: int = 0
    profile_evals: int = 0


@dataclass(frozen=True)
class Codebook:
    """Ordered set of semi-unitary precoders plus generation metadata."""

    matrices: tuple
    feedback_bits: int
    kind: str                 # "DFT" | "W" | "Q"
    rotation: tuple           # integer phase exponents of the diagonal rotation
    trials: int
    seed: int

    def __post_init__(self):
        if len(self.matrices) != 2 ** self.feedback_bits:
            raise ValueError("codebook size must be 2**feedback_bits")

    def __len__(self):
        return len(self.matrices)

    def __getitem__(self, idx):
        return self.matrices[idx]


@dataclass(frozen=True)
class SubstreamProfile:
    """Per-substream SIC capacities, their mean, and the spread measure."""

    capacities: np.ndarray
    mean: float
    polarization: float


def dft_base(m_t, m):
    """First m columns of the m_t-point DFT matrix, scaled to orthonormal columns."""
    if not 1 <= m <= m_t:
        raise ValueError("need 1 <= m <= m_t")
    k = np.arange(m_t)[:, None]
    l = np.arange(m)[None, :]
    return np.exp(2j * np.pi / m_t * k * l) / np.sqrt(m_t)


def _rotation_matrix(exponents, order, power):
    """diag(exp(i 2 pi / order * a_k * power)) for integer exponents a."""
    phases = np.exp(2j * np.pi / order * np.asarray(exponents) * power)
    return np.diag(phases)


def train_rotation(base, feedback_bits, trials, rng):
    """Pick diagonal-rotation exponents maximizing the codebook spread.

    Samples ``trials`` integer vectors a in {0..2^B-1}^rows uniformly and
    keeps the one maximizing min_{1<=l<2^B} d(base, Theta^l base), where
    Theta = diag(exp(i 2 pi a_k / 2^B)) and d is the chordal distance.  Ties
    keep the first candidate encountered.
    """
    if feedback_bits == 0:
        return tuple(0 for _ in range(base.shape[0]))
    if trials < 1:
        raise ValueError("trials must be >= 1")
    order = 2 ** feedback_bits
    candidates = rng.integers(0, order, size=(trials, base.shape[0]))
    best_a = None
    best_obj = -1.0
    for a in candidates:
        obj = min(
            chordal_distance(base, _rotation_matrix(a, order, l) @ base)
            for l in range(1, order))
        if obj > best_obj:
            best_obj = obj
            best_a = a
    return tuple(int(x) for x in best_a)


def _build_rotated_codebook(base, feedback_bits, kind, trials, seed):
    rng = rng_for(seed, _CODEBOOK_RNG_TAG, feedback_bits, base.shape[0],
                  base.shape[1])
    rotation = train_rotation(base, feedback_bits, trials, rng)
    order = 2 ** feedback_bits
    matrices = tuple((_rotation_matrix(rotation, order, l) @ base)
                     for l in range(order))
    return Codebook(matrices=matrices, feedback_bits=feedback_bits, kind=kind,
                    rotation=rotation, trials=trials, seed=seed)


def build_dft_codebook(m_t, m, feedback_bits, trials=DEFAULT_TRAIN_TRIALS, seed=0):
    """DFT codebook: base matrix plus its 2^B - 1 trained diagonal rotations."""
    return _build_rotated_codebook(dft_base(m_t, m), feedback_bits, "DFT",
                                   trials, seed)


def build_w_codebook(m_t, m, b1, trials=DEFAULT_TRAIN_TRIALS, seed=0):
    """Basic-matrix codebook for the two-step criterion (same DFT construction)."""
    return _build_rotated_codebook(dft_base(m_t, m), b1, "W", trials, seed)


def build_q_codebook(m, b2):
    """Square unitary codebook with the fixed rotation exponents 0..m-1.

    No training is involved: the rotation is diag(1, w, ..., w^(m-1)) with
    w = exp(i 2 pi / 2^B2).
    """
    base = dft_base(m, m)
    rotation = tuple(range(m))
    order = 2 ** b2
    matrices = tuple((_rotation_matrix(rotation, order, l) @ base)
                     for l in range(order))
    return Codebook(matrices=matrices, feedback_bits=b2, kind="Q",
                    rotation=rotation, trials=0, seed=0)


def substream_capacities(g, es_over_n0, m):
    """SIC substream capacities of the effective channel ``g``.

    Substream i sees the interference of streams i+1..M only, so its capacity
    is the log-det capacity of the trailing column block i..M minus that of
    the block i+1..M (empty block contributing zero).  The capacities sum to
    the total capacity of ``g`` by construction.
    """
    g = np.asarray(g, dtype=complex)
    if g.ndim != 2 or g.shape[1] != m:
        raise ValueError(f"expected m_r x {m} effective channel, got {g.shape}")
    tail_caps = [logdet_capacity(g[:, i:], es_over_n0, m) for i in range(m)]
    tail_caps.append(0.0)
    caps = np.array([tail_caps[i] - tail_caps[i + 1] for i in range(m)])
    mean = float(np.sum(caps) / m)
    return SubstreamProfile(capacities=caps, mean=mean,
                            polarization=float(np.sum((caps - mean) ** 2)))


def select_capacity(h, codebook, es_over_n0, m, counters=None):
    """Index of the codebook member maximizing total capacity (ties: lowest)."""
    if len(codebook) == 0:
        raise ValueError("empty codebook")
    best_idx = 0
    best_cap = -np.inf
    for idx, f in enumerate(codebook.matrices):
        cap = logdet_capacity(h @ f, es_over_n0, m)
        if counters is not None:
            counters.capacity_evals += 1
        if cap > best_cap:
            best_cap = cap
            best_idx = idx
    return best_idx


def select_polar(h, w_book, q_book, es_over_n0, m, counters=None):
    """Two-step selection: W by capacity, then Q by polarization spread.

    Returns (w index, q index).  The total capacity of the selected pair
    equals the capacity of step 1 because Q is unitary.
    """
    if len(q_book) == 0:
        raise ValueError("empty codebook")
    w_idx = select_capacity(h, w_book, es_over_n0, m, counters=counters)
    hw = h @ w_book[w_idx]
    best_q = 0
    best_pol = -np.inf
    for idx, q in enumerate(q_book.matrices):
        profile = substream_capacities(hw @ q, es_over_n0, m)
        if counters is not None:
            counters.profile_evals += 1
        if profile.polarization > best_pol:
            best_pol = profile.polarization
            best_q = idx
    return w_idx, best_q


def optimal_q(h, w):
    """Polarization-optimal square unitary for a fixed basic matrix.

    The right-singular basis of H W (ascending singular-value order)
    simultaneously maximizes every trailing partial sum of the substream
    capacities, hence also the spread around the mean.
    """
    return svd(np.asarray(h) @ np.asarray(w)).v


def optimal_f(h, m):
    """Unquantized optimal precoder: right-singular vectors of the m largest
    singular values of ``h`` (the last m columns in ascending order).

    A nearly degenerate spread at the cut makes the column choice
    ill-conditioned; that is reported as a warning, not an error.
    """
    res = svd(h)
    if m > res.sigma.size:
        raise ValueError(f"m={m} exceeds the channel rank bound {res.sigma.size}")
    if m < res.sigma.size:
        gap = res.sigma[-m] - res.sigma[-m - 1]
        scale = max(res.sigma[-1], np.finfo(float).tiny)
        if gap / scale < 1e-9:
            warnings.warn("singular-value spread at the selection cut is "
                          "nearly degenerate; precoder columns ill-conditioned",
                          RuntimeWarning, stacklevel=2)
    return res.v[:, -m:]


def _format_entry(x):
    return f"{x.real:.17g} {x.imag:.17g}"


def save_codebook(path_or_file, book):
    """Serialize a codebook as text; round-trips float64 entries exactly."""
    own = not hasattr(path_or_file, "write")
    fh = open(path_or_file, "w", encoding="ascii") if own else path_or_file
    try:
        rows, cols = book.matrices[0].shape
        fh.write(f"{book.kind} {rows} {cols} {book.feedback_bits} "
                 f"{book.seed} {book.trials} "
                 f"{','.join(str(a) for a in book.rotation)}\n")
        for mat in book.matrices:
            fh.write("\n")
            for r in range(rows):
                fh.write(" ".join(_format_entry(mat[r, c])
                                  for c in range(cols)) + "\n")
    finally:
        if own:
            fh.close()


def load_codebook(path_or_file):
    """Inverse of :func:`save_codebook`."""
    own = not hasattr(path_or_file, "read")
    fh = open(path_or_file, encoding="ascii") if own else path_or_file
    try:
        kind, rows, cols, bits, seed, trials, rotation = fh.readline().split()
        rows, cols, bits = int(rows), int(cols), int(bits)
        values = [float(tok) for line in fh for tok in line.split()]
    finally:
        if own:
            fh.close()
    flat = np.asarray(values).reshape(2 ** bits, rows, cols, 2)
    matrices = tuple(flat[k, :, :, 0] + 1j * flat[k, :, :, 1]
                     for k in range(2 ** bits))
    return Codebook(matrices=matrices, feedback_bits=bits, kind=kind,
                    rotation=tuple(int(a) for a in rotation.split(",")),
                    trials=int(trials), seed=int(seed))


def codebook_digest(book):
    """Stable content hash of a codebook's serialized form."""
    buf = io.StringIO()
    save_codebook(buf, book)
    return hashlib.sha256(buf.getvalue().encode("ascii")).hexdigest()
