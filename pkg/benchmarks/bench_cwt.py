"""Time the compiled and numpy CWT kernels on the same batch of A-scans.

    python3 benchmarks/bench_cwt.py [--columns 2400] [--length 512] [--repeat 3]
"""
import argparse
import time

import numpy as np

from thzcwt import cwt
from thzcwt.cwt import CwtParams, WaveletKind, cwt_batch, default_scales


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--columns", type=int, default=2400, help="number of A-scans (40x60 grid by default)")
    ap.add_argument("--length", type=int, default=512, help="samples per A-scan")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rows = np.random.default_rng(args.seed).standard_normal((args.columns, args.length))
    setups = {
        "fixed scale a=4": CwtParams((4.0,)),
        "16-scale grid": CwtParams(default_scales()),
    }
    print(f"{args.columns} x {args.length} samples, best of {args.repeat}; backends: {', '.join(cwt.BACKENDS)}")
    print(f"{'case':<18}{'backend':<9}{'seconds':>10}{'speed-up':>10}")
    for label, params in setups.items():
        ref_time = ref_out = None
        for name in ("python", "cython"):
            if name not in cwt.BACKENDS:
                print(f"{label:<18}{name:<9}{'n/a':>10}")
                continue
            secs, out = best_of(lambda: cwt_batch(rows, WaveletKind.MEXICAN_HAT, params, name), args.repeat)
            if ref_out is None:
                ref_time, ref_out = secs, out
                speed = ""
            else:
                if not np.array_equal(out, ref_out):
                    raise SystemExit(f"backends disagree on {label}")
                speed = f"{ref_time / secs:.1f}x"
            print(f"{label:<18}{name:<9}{secs:>10.3f}{speed:>10}")


if __name__ == "__main__":
    main()
