"""Polar-coded MIMO link simulator with finite-feedback unitary precoding."""

from .channel import draw_channel, fixed_test_channel, rng_for, transmit
from .harness import (
    PrecoderContext,
    SimResult,
    SnrRecord,
    SystemConfig,
    construct_spec,
    encode_frame,
    ga_profile_for,
    receive_frame,
    run_bler,
    run_capacity_profile,
)
from .modem import mlsic_llrs, mlsic_llrs_block, qpsk_map, remap_stream
from .numerics import (
    NumericalFailure,
    SvdResult,
    chordal_distance,
    is_semi_unitary,
    logdet_capacity,
    svd,
)
from .polar import (
    CRC6_POLY,
    PolarSpec,
    ReliabilityProfile,
    ca_scl_decode,
    crc_attach,
    crc_check,
    ga_block_error_bound,
    ga_evolve,
    polar_encode,
    read_info_sets,
    sc_decode,
    select_info_sets,
    write_info_sets,
)
from .precoding import (
    Codebook,
    SelectionCounters,
    SubstreamProfile,
    build_dft_codebook,
    build_q_codebook,
    build_w_codebook,
    codebook_digest,
    dft_base,
    load_codebook,
    optimal_f,
    optimal_q,
    save_codebook,
    select_capacity,
    select_polar,
    substream_capacities,
    train_rotation,
)

__version__ = "0.1.0"
