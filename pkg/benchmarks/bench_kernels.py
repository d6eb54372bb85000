"""Compare the compiled and pure-Python Z[sqrt 2] kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each workload is run on every available backend; results are checked for
agreement before timings are reported.
"""

import argparse
import statistics
import sys
import timeit

from spfsim import _kernels

# alpha = sqrt 2 is (0, 1, 1); thresholds are (p, q, d) triples
WORKLOADS = {
    "gap search K(1/64)": ("max_gap_search", (0, 1, 1, 1, 0, 64, 10 ** 6)),
    "gap search K(1/256)": ("max_gap_search", (0, 1, 1, 1, 0, 256, 10 ** 6)),
    "sorted orbit N=2000": ("sorted_orbit", (0, 1, 1, 2000)),
    "threshold N(1/64)": ("discrepancy_threshold_search", (0, 1, 1, 1, 0, 128, 10 ** 5)),
    "surd floor x10^4": (None, None),
}


def run(mod, name, args):
    if name is None:
        return [mod.surd_floor(k, 3 * k + 1, 7) for k in range(10 ** 4)]
    return getattr(mod, name)(*args)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = _kernels.backends()
    if "compiled" not in backends:
        print("compiled extension not built; only the pure backend is available", file=sys.stderr)
    scan_input = _kernels.backends()["pure"].sorted_orbit(0, 1, 1, 2000)
    WORKLOADS["discrepancy scan N=2000"] = ("discrepancy_scan", (*scan_input, 1, 2000))

    names = sorted(backends)
    print(f"{'workload':28}" + "".join(f"{n:>14}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, (fn, fargs) in WORKLOADS.items():
        results = {n: run(backends[n], fn, fargs) for n in names}
        if len({repr(r) for r in results.values()}) != 1:
            raise SystemExit(f"backends disagree on {label}")
        best = {}
        for n in names:
            t = timeit.repeat(lambda: run(backends[n], fn, fargs), number=1, repeat=args.repeat)
            best[n] = statistics.median(t)
        row = f"{label:28}" + "".join(f"{best[n] * 1e3:12.2f}ms" for n in names)
        if len(names) > 1:
            row += f"{best['pure'] / best['compiled']:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
