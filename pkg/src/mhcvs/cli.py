"""Command line entry point: ``mhcvs sweep|encode|decode``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from mhcvs.bench.ingest import FORMATS, write_pgm
from mhcvs.bench.metrics import format_psnr
from mhcvs.decoder import DecodeConfig, Solver, decode_sequence
from mhcvs.encoder import deserialize_stream, encode_sequence, plan_gops, serialize
from mhcvs.solvers import SolverConfig
from mhcvs.bench.sweep import RunSpec, aggregate, load_frames, run_sweep


def _floats(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _ints(text):
    return tuple(int(t) for t in text.split(",") if t.strip())


def _solvers(text):
    return tuple(Solver(t.strip()) for t in text.split(",") if t.strip())


def _add_input(p):
    p.add_argument("--input", required=True, help="video file, PGM directory, or synthetic sequence name")
    p.add_argument("--format", default="y4m", choices=FORMATS + ("synthetic",))
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--frames", type=int, help="use only the first N frames")
    p.add_argument("--block-size", type=int, default=16)
    p.add_argument("--group-size", type=int, default=9)
    p.add_argument("--seed", type=int, default=1)


def _add_solver(p):
    p.add_argument("--lambda1", type=float, default=1.0)
    p.add_argument("--lambda2", type=float, default=1000.0)
    p.add_argument("--rho", type=float, default=0.01)
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--no-residual", action="store_true", help="skip residual refinement")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mhcvs", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="PSNR/time sweep over rates, p and solvers")
    _add_input(sw)
    _add_solver(sw)
    sw.add_argument("--rates", type=_floats, default=(0.1, 0.3, 0.5, 0.7, 0.9))
    sw.add_argument("--p", type=_ints, default=(20, 400), dest="p_values")
    sw.add_argument("--solver", type=_solvers, default=(Solver.MH_ST, Solver.MH_TIKHONOV), dest="solvers")
    sw.add_argument("--ref-rate", type=float, default=0.7)
    sw.add_argument("--only-frames", type=_ints, help="decode/score only these 0-based frame indices")
    sw.add_argument("--name", help="sequence label in the CSV (default: input stem)")
    sw.add_argument("--out-dir", default="results")

    enc = sub.add_parser("encode", help="write a .cvs measurement stream")
    _add_input(enc)
    enc.add_argument("--rate", type=float, required=True, help="non-reference sampling rate")
    enc.add_argument("--ref-rate", type=float, default=0.7)
    enc.add_argument("--output", required=True)

    dec = sub.add_parser("decode", help="decode a .cvs stream to PGM frames")
    dec.add_argument("stream")
    dec.add_argument("--solver", type=Solver, default=Solver.MH_ST)
    dec.add_argument("--p", type=int, default=20)
    _add_solver(dec)
    dec.add_argument("--out-dir", required=True)
    return ap


def _solver_config(args) -> SolverConfig:
    return SolverConfig(args.lambda1, args.lambda2, args.rho, args.iters)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.command == "sweep":
        spec = RunSpec(
            input=args.input, format=args.format, rates=args.rates, p_values=args.p_values,
            solvers=args.solvers, frames=args.frames, seed=args.seed, out_dir=args.out_dir,
            group_size=args.group_size, ref_rate=args.ref_rate, block_size=args.block_size,
            width=args.width, height=args.height, solver_config=_solver_config(args),
            residual_refinement=not args.no_residual, only_frames=args.only_frames, name=args.name,
        )
        rows = run_sweep(spec)
        for (solver, rate, p), mean in sorted(aggregate(rows).items()):
            print(f"{solver:12s} rate={rate:<5} p={p:<4d} mean PSNR {format_psnr(mean)} dB")
        print(f"wrote {Path(args.out_dir).resolve()}")
        return 0

    if args.command == "encode":
        spec = RunSpec(input=args.input, format=args.format, frames=args.frames, seed=args.seed,
                       group_size=args.group_size, block_size=args.block_size, width=args.width,
                       height=args.height)
        frames = load_frames(spec)
        frames = frames[:len(frames) - len(frames) % args.group_size]
        layout = plan_gops(len(frames), args.group_size)
        stream = encode_sequence(frames, layout, args.ref_rate, args.rate, args.block_size, args.seed)
        with open(args.output, "wb") as fh:
            serialize(stream, fh, args.group_size)
        print(f"encoded {len(stream)} frames to {args.output}")
        return 0

    if args.command == "decode":
        with open(args.stream, "rb") as fh:
            header, stream = deserialize_stream(fh)
        layout = plan_gops(header.frame_count, header.group_size)
        cfg = DecodeConfig(solver=args.solver, solver_config=_solver_config(args), p=args.p,
                           residual_refinement=not args.no_residual)
        decoded = decode_sequence(stream, layout, cfg)
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for i, f in enumerate(decoded.frames):
            write_pgm(out / f"frame_{i:04d}.pgm", f.luma)
        print(f"decoded {len(decoded.frames)} frames to {out}")
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
