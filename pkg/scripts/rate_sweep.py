#!/usr/bin/env python3
"""Rate-distortion sweep: mean non-reference PSNR vs sampling rate for both solvers.

Runs on a synthetic translating texture by default; pass --input/--format for real
video (e.g. a CIF .y4m file). Writes the usual sweep CSVs and plot-data files.

    python3 scripts/rate_sweep.py --out-dir results/translate
    python3 scripts/rate_sweep.py --input foreman_cif.y4m --format y4m --frames 36
"""

import argparse
import logging

from mhcvs.bench.metrics import format_psnr
from mhcvs.bench.sweep import RunSpec, aggregate, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--input", default="translate")
    ap.add_argument("--format", default="synthetic")
    ap.add_argument("--frames", type=int, default=9)
    ap.add_argument("--rates", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7")
    ap.add_argument("--p", default="20")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out-dir", default="results/rate_sweep")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    spec = RunSpec(
        input=args.input,
        format=args.format,
        frames=args.frames,
        rates=tuple(float(r) for r in args.rates.split(",")),
        p_values=tuple(int(p) for p in args.p.split(",")),
        seed=args.seed,
        out_dir=args.out_dir,
    )
    agg = aggregate(run_sweep(spec))
    solvers = sorted({k[0] for k in agg})
    print(f"{'rate':>6} {'p':>5} " + " ".join(f"{s:>12}" for s in solvers))
    for rate in spec.rates:
        for p in spec.p_values:
            print(f"{rate:>6} {p:>5} " + " ".join(f"{format_psnr(agg[s, rate, p]):>12.12}" for s in solvers))


if __name__ == "__main__":
    main()
