"""End-to-end receiver pipeline and the Monte Carlo experiment runner.

A frame is one block-fading realization: the channel (drawn or fixed) stays
constant over the N slots, the receiver selects a precoder index from the
configured codebook, the code construction adapts to the resulting effective
channel, and the joint detection-decoding receiver runs stream by stream.

All randomness derives from ``(master_seed, purpose, snr index, frame index)``
so two runs with the same configuration and seed are identical byte for byte,
independent of how frames would be partitioned across workers.
"""

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from . import modem, polar, precoding
from .channel import draw_channel, fixed_test_channel, rng_for, transmit
from .constants import LLR_CLAMP
from .numerics import logdet_capacity

TPC_MODES = ("none", "dft", "polar", "f_opt", "polar_qopt")
CHANNEL_MODES = ("fading", "fixed")
DECODERS = ("sc", "cascl")

_TAG_FRAME = 2
_TAG_PROFILE = 3


@dataclass(frozen=True)
class SystemConfig:
    """Full description of one simulated system."""

    m_t: int
    m_r: int
    m: int
    n_slots: int
    rate: float
    snr_db: tuple
    tpc_mode: str = "none"
    b: int = 4
    b1: int = 3
    b2: int = 1
    decoder: str = "sc"
    list_size: int = 8
    crc_len: int = 0
    frames: int = 1000
    master_seed: int = 0
    channel_mode: str = "fading"
    train_trials: int = precoding.DEFAULT_TRAIN_TRIALS

    def __post_init__(self):
        code_len = 2 * self.n_slots
        if code_len < 2 or code_len & (code_len - 1):
            raise ValueError("2 * n_slots must be a power of two")
        if not 1 <= self.m <= min(self.m_t, self.m_r):
            raise ValueError("need 1 <= m <= min(m_t, m_r)")
        if self.k_payload < 1:
            raise ValueError("rate too low: zero payload bits")
        if self.tpc_mode not in TPC_MODES:
            raise ValueError(f"unknown tpc_mode {self.tpc_mode!r}")
        if self.channel_mode not in CHANNEL_MODES:
            raise ValueError(f"unknown channel_mode {self.channel_mode!r}")
        if self.decoder not in DECODERS:
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.channel_mode == "fixed" and (self.m_t != 3 or self.m_r != 3):
            raise ValueError("the fixed test channel is 3x3")
        if self.decoder == "sc" and self.crc_len:
            raise ValueError("plain SC decoding carries no CRC")
        if self.decoder == "cascl" and self.list_size < 1:
            raise ValueError("list_size must be >= 1")
        budgets = {"dft": self.b, "polar": self.b1, "polar_qopt": self.b1}
        if self.tpc_mode in budgets and budgets[self.tpc_mode] < 0:
            raise ValueError("feedback budget must be non-negative")
        if self.tpc_mode == "polar" and self.b2 < 0:
            raise ValueError("b2 must be non-negative")
        if self.frames < 0:
            raise ValueError("frames must be non-negative")
        if not self.snr_db:
            raise ValueError("need at least one SNR point")

    @property
    def code_len(self):
        return 2 * self.n_slots

    @property
    def k_payload(self):
        return int(round(self.rate * 2 * self.m * self.n_slots))


@dataclass(frozen=True)
class SnrRecord:
    snr_db: float
    frames: int
    block_errs: int
    bit_errs: int
    bler: float          # NaN when frames == 0
    ber: float
    ga_bound: float
    capacity_mean: float
    polarization_mean: float


@dataclass(frozen=True)
class SimResult:
    config: SystemConfig
    records: tuple
    codebook_digests: dict = field(default_factory=dict)

    def csv_text(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["snr_db", "frames", "block_errs", "bler", "ber",
                         "ga_bound", "capacity_mean", "polarization_mean"])
        for r in self.records:
            writer.writerow([
                f"{r.snr_db:g}", r.frames, r.block_errs,
                "" if np.isnan(r.bler) else f"{r.bler:.10g}",
                "" if np.isnan(r.ber) else f"{r.ber:.10g}",
                f"{r.ga_bound:.10g}",
                f"{r.capacity_mean:.10g}", f"{r.polarization_mean:.10g}"])
        return buf.getvalue()

    def to_csv(self, path):
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.csv_text())


class PrecoderContext:
    """Per-run precoding state: codebooks built once, selection per channel.

    ``books`` may supply pre-built codebooks keyed by kind ("DFT", "W", "Q");
    anything the mode needs but is not supplied gets trained here.
    """

    def __init__(self, config, books=None):
        self.config = config
        self.books = {}
        cfg = config
        books = books or {}
        if cfg.tpc_mode == "dft":
            self.books["DFT"] = books.get("DFT") or precoding.build_dft_codebook(
                cfg.m_t, cfg.m, cfg.b, cfg.train_trials, seed=cfg.master_seed)
        elif cfg.tpc_mode in ("polar", "polar_qopt"):
            self.books["W"] = books.get("W") or precoding.build_w_codebook(
                cfg.m_t, cfg.m, cfg.b1, cfg.train_trials, seed=cfg.master_seed)
            if cfg.tpc_mode == "polar":
                self.books["Q"] = books.get("Q") or precoding.build_q_codebook(
                    cfg.m, cfg.b2)
        for kind, book in self.books.items():
            rows = cfg.m if kind == "Q" else cfg.m_t
            if book.matrices[0].shape != (rows, cfg.m):
                raise ValueError(f"{kind} codebook shape "
                                 f"{book.matrices[0].shape} does not match "
                                 f"the configuration")
        self._identity = np.eye(cfg.m_t, dtype=complex)[:, :cfg.m]

    def digests(self):
        return {kind: precoding.codebook_digest(book)
                for kind, book in self.books.items()}

    def select(self, h, es_over_n0, counters=None):
        """Precoder for one channel realization under the configured mode."""
        mode = self.config.tpc_mode
        if mode == "none":
            return self._identity
        if mode == "dft":
            idx = precoding.select_capacity(
                h, self.books["DFT"], es_over_n0, self.config.m, counters)
            return self.books["DFT"][idx]
        if mode == "polar":
            wi, qi = precoding.select_polar(
                h, self.books["W"], self.books["Q"], es_over_n0,
                self.config.m, counters)
            return self.books["W"][wi] @ self.books["Q"][qi]
        if mode == "polar_qopt":
            wi = precoding.select_capacity(
                h, self.books["W"], es_over_n0, self.config.m, counters)
            w = self.books["W"][wi]
            return w @ precoding.optimal_q(h, w)
        return precoding.optimal_f(h, self.config.m)


def equivalent_stream_llr_means(h, f, es_over_n0, m):
    """Map each substream to a scalar-channel LLR mean via capacity matching.

    Substream i with SIC capacity I_i behaves like a scalar complex AWGN
    channel of SNR 2^I_i - 1; unit-energy Gray-mapped QPSK on that channel
    has per-bit LLR mean twice the SNR.  The mapping is exact whenever the
    precoder diagonalizes the channel.
    """
    profile = precoding.substream_capacities(h @ f, es_over_n0, m)
    snr = np.exp2(profile.capacities) - 1.0
    return 2.0 * snr, profile


def ga_profile_for(h, f, es_over_n0, spec):
    """Density-evolution reliability profile of every stream for (h, f)."""
    means, _ = equivalent_stream_llr_means(h, f, es_over_n0, spec.streams)
    return polar.ReliabilityProfile(np.stack(
        [polar.ga_evolve(m_i, spec.code_len) for m_i in means]))


def construct_spec(h, f, es_over_n0, config):
    """Build the joint polar construction for one effective channel."""
    means, profile = equivalent_stream_llr_means(h, f, es_over_n0, config.m)
    rel = polar.ReliabilityProfile(np.stack(
        [polar.ga_evolve(m_i, config.code_len) for m_i in means]))
    n_crc = config.crc_len * config.m if config.decoder == "cascl" else 0
    sets = polar.select_info_sets(rel, config.k_payload + n_crc)
    spec = polar.PolarSpec(
        code_len=config.code_len, streams=config.m,
        total_info=config.k_payload, info_sets=tuple(sets),
        crc_len=config.crc_len if config.decoder == "cascl" else 0,
        list_size=config.list_size if config.decoder == "cascl" else 1)
    return spec, rel, profile


def encode_frame(payload, spec):
    """Split payload across streams, attach CRCs, encode, map to symbols."""
    symbols = np.empty((spec.streams, spec.code_len // 2), dtype=complex)
    offset = 0
    for i in range(spec.streams):
        size = spec.payload_size(i)
        bits = payload[offset:offset + size]
        offset += size
        if spec.crc_len and spec.info_sets[i].size:
            bits = polar.crc_attach(bits, spec.crc_poly)
        symbols[i] = modem.bits_to_symbols(polar.polar_encode(bits, spec, i))
    if offset != payload.size:
        raise ValueError("payload length does not match the construction")
    return symbols


def receive_frame(y, h, f, spec, es, n0, genie_symbols=None):
    """Joint multistage detection and decoding of one frame.

    Streams are detected in order 1..M; each decoded stream is re-encoded,
    re-modulated, and cancelled from the received block before the next
    stream is demodulated (pass ``genie_symbols`` to cancel the true symbols
    instead, for bounding experiments).  Decoding failures are data, not
    errors.

    Returns
    -------
    (payloads, flags)
        Decoded payload bits per stream and per-stream CRC success flags
        (always True for constructions without CRC).
    """
    g = h @ f
    m = g.shape[1]
    n_slots = y.shape[1]
    n0_eff = n0 if n0 > 0 else es * 1e-12
    scale = np.sqrt(es / m)
    residual = np.array(y, dtype=complex)
    payloads = []
    flags = []
    use_list = spec.list_size > 1 or spec.crc_len > 0
    for i in range(m):
        block = modem.mlsic_llrs_block(residual, g[:, i:], es, n0_eff, m)
        llrs = np.empty(2 * n_slots)
        llrs[0::2] = block[0]
        llrs[1::2] = block[1]
        np.clip(llrs, -LLR_CLAMP, LLR_CLAMP, out=llrs)
        if use_list:
            info, ok = polar.ca_scl_decode(llrs, spec, i)
        else:
            info, ok = polar.sc_decode(llrs, spec, i), True
        size = spec.payload_size(i)
        payloads.append(info[:size])
        flags.append(ok)
        if genie_symbols is not None:
            symbols = genie_symbols[i]
        else:
            symbols = modem.remap_stream(info, spec, i)
        residual -= scale * np.outer(g[:, i], symbols)
    return payloads, flags


def _simulate_point(config, ctx, snr_idx, snr_db):
    rho = 10.0 ** (snr_db / 10.0)
    es, n0 = 1.0, 1.0 / rho
    cfg = config
    fixed = cfg.channel_mode == "fixed"
    ga_bound = capacity = polarization = float("nan")
    if fixed:
        h = fixed_test_channel()
        f = ctx.select(h, rho)
        spec, rel, profile = construct_spec(h, f, rho, cfg)
        ga_bound = polar.ga_block_error_bound(rel, spec.info_sets)
        capacity = logdet_capacity(h @ f, rho, cfg.m)
        polarization = profile.polarization
    block_errs = 0
    bit_errs = 0
    cap_sum = 0.0
    pol_sum = 0.0
    ga_sum = 0.0
    for frame in range(cfg.frames):
        rng = rng_for(cfg.master_seed, _TAG_FRAME, snr_idx, frame)
        if not fixed:
            h = draw_channel(cfg.m_r, cfg.m_t, rng)
            f = ctx.select(h, rho)
            spec, rel, profile = construct_spec(h, f, rho, cfg)
            ga_bound = polar.ga_block_error_bound(rel, spec.info_sets)
            capacity = logdet_capacity(h @ f, rho, cfg.m)
            polarization = profile.polarization
        payload = rng.integers(0, 2, cfg.k_payload).astype(np.int8)
        symbols = encode_frame(payload, spec)
        y = transmit(h, f, symbols, es, n0, rng)
        decoded, _ = receive_frame(y, h, f, spec, es, n0)
        errors = int(sum(np.count_nonzero(d != t) for d, t in
                         zip(decoded, _split_payload(payload, spec))))
        bit_errs += errors
        block_errs += errors > 0
        cap_sum += capacity
        pol_sum += polarization
        ga_sum += ga_bound
    frames = cfg.frames
    return SnrRecord(
        snr_db=snr_db, frames=frames, block_errs=block_errs, bit_errs=bit_errs,
        bler=block_errs / frames if frames else float("nan"),
        ber=bit_errs / (frames * cfg.k_payload) if frames else float("nan"),
        ga_bound=ga_sum / frames if frames else ga_bound,
        capacity_mean=cap_sum / frames if frames else capacity,
        polarization_mean=pol_sum / frames if frames else polarization,
    )


def _split_payload(payload, spec):
    parts = []
    offset = 0
    for i in range(spec.streams):
        size = spec.payload_size(i)
        parts.append(payload[offset:offset + size])
        offset += size
    return parts


def run_bler(config, books=None):
    """Monte Carlo BLER/BER sweep over the configured SNR points.

    A block error is any payload-bit mismatch on any stream.  Deterministic
    for a given configuration and master seed.
    """
    ctx = PrecoderContext(config, books=books)
    records = tuple(_simulate_point(config, ctx, i, s)
                    for i, s in enumerate(config.snr_db))
    return SimResult(config=config, records=records,
                     codebook_digests=ctx.digests())


def run_capacity_profile(config, modes=None):
    """Substream-capacity profiles vs SNR for one or more TPC modes.

    For the fixed channel the profile is exact; under fading, capacities are
    averaged over ``config.frames`` independent draws (the spread measure is
    recomputed from the averaged capacities).  Returns
    ``{mode: [SubstreamProfile per SNR point]}``.
    """
    modes = tuple(modes) if modes is not None else (config.tpc_mode,)
    out = {}
    for mode in modes:
        cfg = replace(config, tpc_mode=mode)
        ctx = PrecoderContext(cfg)
        per_snr = []
        for snr_idx, snr_db in enumerate(cfg.snr_db):
            rho = 10.0 ** (snr_db / 10.0)
            if cfg.channel_mode == "fixed":
                h = fixed_test_channel()
                f = ctx.select(h, rho)
                per_snr.append(precoding.substream_capacities(h @ f, rho, cfg.m))
            else:
                caps = np.zeros(cfg.m)
                for draw in range(cfg.frames):
                    rng = rng_for(cfg.master_seed, _TAG_PROFILE, snr_idx, draw)
                    h = draw_channel(cfg.m_r, cfg.m_t, rng)
                    f = ctx.select(h, rho)
                    caps += precoding.substream_capacities(h @ f, rho, cfg.m).capacities
                caps /= cfg.frames
                mean = float(caps.sum() / cfg.m)
                per_snr.append(precoding.SubstreamProfile(
                    capacities=caps, mean=mean,
                    polarization=float(np.sum((caps - mean) ** 2))))
        out[mode] = per_snr
    return out
