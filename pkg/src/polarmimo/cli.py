"""Command-line front end: BLER sweeps, capacity profiles, codebook files."""

import argparse
import sys

import numpy as np

from . import precoding
from .harness import SimResult, SystemConfig, run_bler, run_capacity_profile

_TPC_FLAGS = {"none": "none", "dft": "dft", "polar": "polar",
              "fopt": "f_opt", "polar-qopt": "polar_qopt"}


def parse_snr(text):
    """Parse '--snr' values: 'start:step:stop' (inclusive) or a comma list."""
    if ":" in text:
        start, step, stop = (float(t) for t in text.split(":"))
        if step <= 0:
            raise ValueError("SNR step must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + step * k for k in range(max(count, 1)))
    return tuple(float(t) for t in text.split(","))


def _add_common(p):
    p.add_argument("--mt", type=int, default=3, help="transmit antennas")
    p.add_argument("--mr", type=int, default=3, help="receive antennas")
    p.add_argument("--streams", type=int, default=2, help="spatial streams M")
    p.add_argument("--slots", type=int, default=64, help="time slots per frame N")
    p.add_argument("--rate", type=float, default=0.25, help="code rate K/(2MN)")
    p.add_argument("--snr", type=parse_snr, default=(0.0,),
                   help="Es/N0 grid in dB: start:step:stop or comma list")
    p.add_argument("--tpc", choices=sorted(_TPC_FLAGS), default="none")
    p.add_argument("--b", type=int, default=4, help="DFT feedback bits")
    p.add_argument("--b1", type=int, default=3, help="basic-matrix feedback bits")
    p.add_argument("--b2", type=int, default=1, help="unitary-rotation feedback bits")
    p.add_argument("--decoder", choices=["sc", "cascl"], default="sc")
    p.add_argument("--list", dest="list_size", type=int, default=8,
                   help="list size for the CA-SCL decoder")
    p.add_argument("--crc-len", type=int, default=0)
    p.add_argument("--frames", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--channel", choices=["fading", "fixed"], default="fading")
    p.add_argument("--trials", type=int, default=precoding.DEFAULT_TRAIN_TRIALS,
                   help="rotation-training trials")
    p.add_argument("--codebook-file", default=None,
                   help="use a pre-built codebook instead of training one")
    p.add_argument("--out", default=None, help="output CSV path (default stdout)")


def _config_from(args):
    return SystemConfig(
        m_t=args.mt, m_r=args.mr, m=args.streams, n_slots=args.slots,
        rate=args.rate, snr_db=tuple(args.snr), tpc_mode=_TPC_FLAGS[args.tpc],
        b=args.b, b1=args.b1, b2=args.b2, decoder=args.decoder,
        list_size=args.list_size, crc_len=args.crc_len, frames=args.frames,
        master_seed=args.seed, channel_mode=args.channel,
        train_trials=args.trials)


def _emit(text, out):
    if out:
        with open(out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_books(args):
    if not args.codebook_file:
        return None
    book = precoding.load_codebook(args.codebook_file)
    return {book.kind: book}


def cmd_bler(args):
    result = run_bler(_config_from(args), books=_load_books(args))
    _emit(result.csv_text(), args.out)
    return 0


def cmd_capacity_profile(args):
    config = _config_from(args)
    profiles = run_capacity_profile(config)[config.tpc_mode]
    lines = ["snr_db," + ",".join(f"i_{k + 1}" for k in range(config.m))
             + ",mean,polarization"]
    for snr, prof in zip(config.snr_db, profiles):
        caps = ",".join(f"{c:.10g}" for c in prof.capacities)
        lines.append(f"{snr:g},{caps},{prof.mean:.10g},{prof.polarization:.10g}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_make_codebook(args):
    if not args.codebook_file:
        raise ValueError("make-codebook requires --codebook-file")
    if args.kind == "dft":
        book = precoding.build_dft_codebook(args.mt, args.streams, args.b,
                                            args.trials, seed=args.seed)
    elif args.kind == "w":
        book = precoding.build_w_codebook(args.mt, args.streams, args.b1,
                                          args.trials, seed=args.seed)
    else:
        book = precoding.build_q_codebook(args.streams, args.b2)
    precoding.save_codebook(args.codebook_file, book)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="polarmimo",
        description="Polar-coded MIMO link simulator with unitary precoding")
    sub = parser.add_subparsers(dest="command", required=True)
    p_bler = sub.add_parser("bler", help="Monte Carlo BLER/BER sweep")
    _add_common(p_bler)
    p_bler.set_defaults(func=cmd_bler)
    p_cap = sub.add_parser("capacity-profile",
                           help="substream capacities vs SNR")
    _add_common(p_cap)
    p_cap.set_defaults(func=cmd_capacity_profile)
    p_mk = sub.add_parser("make-codebook", help="train and save a codebook")
    _add_common(p_mk)
    p_mk.add_argument("--kind", choices=["dft", "w", "q"], default="dft")
    p_mk.set_defaults(func=cmd_make_codebook)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
