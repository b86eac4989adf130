#!/usr/bin/env python3
"""Sensitivity of MH-ST to lambda2, rho and the hypothesis count p, with and without
residual refinement, on a synthetic translating texture.

    python3 scripts/parameter_study.py --rate 0.3
"""

import argparse
import itertools

import numpy as np

from mhcvs.decoder import DecodeConfig, decode_sequence
from mhcvs.encoder import encode_sequence, plan_gops
from mhcvs.solvers import SolverConfig
from mhcvs.synthetic import translating_sequence


def mean_psnr(frames, stream, layout, cfg):
    dec = decode_sequence(stream, layout, cfg, originals=frames)
    return float(np.mean([m.psnr for m in dec.per_frame_metrics[1:-1]]))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--rate", type=float, default=0.3)
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--lambda2", default="10,100,1000,10000")
    ap.add_argument("--rho", default="0.001,0.01,0.1")
    ap.add_argument("--p", default="9,20,49")
    args = ap.parse_args()

    frames = translating_sequence(9, args.size, args.size, seed=args.seed)
    layout = plan_gops(9, 9)
    stream = encode_sequence(frames, layout, 0.7, args.rate, 16, args.seed)

    print(f"rate {args.rate}, {args.size}x{args.size} translating texture, mean non-reference PSNR (dB)")
    print(f"{'lambda2':>8} {'rho':>7} {'p':>4} {'refined':>9} {'first stage':>12}")
    grid = itertools.product(
        (float(v) for v in args.lambda2.split(",")),
        [float(v) for v in args.rho.split(",")],
        [int(v) for v in args.p.split(",")],
    )
    for lam2, rho, p in grid:
        sc = SolverConfig(lambda2=lam2, rho=rho)
        on = mean_psnr(frames, stream, layout, DecodeConfig(solver_config=sc, p=p))
        off = mean_psnr(frames, stream, layout, DecodeConfig(solver_config=sc, p=p, residual_refinement=False))
        print(f"{lam2:>8g} {rho:>7g} {p:>4d} {on:>9.2f} {off:>12.2f}")


if __name__ == "__main__":
    main()
