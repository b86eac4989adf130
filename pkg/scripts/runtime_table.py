#!/usr/bin/env python3
"""Single-threaded per-frame decode time of each solver on a CIF-size frame.

    python3 scripts/runtime_table.py --p 20,400
"""

import argparse
import time

from mhcvs.decoder import DecodeConfig, Solver, decode_non_reference, decode_reference
from mhcvs.encoder import encode_sequence, plan_gops
from mhcvs.synthetic import translating_sequence
from mhcvs.tensor import dct_basis


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--p", default="20,400")
    ap.add_argument("--rate", type=float, default=0.5)
    ap.add_argument("--height", type=int, default=288)
    ap.add_argument("--width", type=int, default=352)
    args = ap.parse_args()

    frames = translating_sequence(3, args.height, args.width)
    enc = encode_sequence(frames, plan_gops(3, 3), 0.7, args.rate, 16, seed=1)
    dct = dct_basis(16)
    refs = [decode_reference(e, e.phi(), dct) for e in (enc[0], enc[2])]
    phi = enc[1].phi()
    print(f"{'p':>5} {'solver':>12} {'seconds':>9}")
    for p in (int(v) for v in args.p.split(",")):
        times = {}
        for solver in Solver:
            t0 = time.perf_counter()
            decode_non_reference(enc[1], refs, DecodeConfig(solver, p=p, threads=1), phi, dct)
            times[solver] = time.perf_counter() - t0
            print(f"{p:>5} {solver.value:>12} {times[solver]:>9.2f}")
        print(f"{p:>5} {'ratio':>12} {times[Solver.MH_ST] / times[Solver.MH_TIKHONOV]:>9.2f}")


if __name__ == "__main__":
    main()
