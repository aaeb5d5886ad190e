"""Compiled versus numpy simplex kernels on a few exact LP solves.

    python benchmarks/bench_kernels.py [--repeat 3] [--large]

Both backends must return the same certificate; the script checks that and
prints wall time per backend.
"""
import argparse
import time

from salift import kernels
from salift.lift import lift_system, symmetrize
from salift.lp import feasible
from salift.principles import unary_lnp, unary_lnp_eq, unary_php


def cases(large):
    out = [
        ("php(4,3) r=1", lift_system(unary_php(4, 3), 1)),
        ("lnp(3) r=1", lift_system(unary_lnp(3), 1)),
        ("lnp_eq(3) r=2 sym", symmetrize(lift_system(unary_lnp_eq(3), 2))),
    ]
    if large:
        out.append(("lnp(4) r=2 sym", symmetrize(lift_system(unary_lnp(4), 2))))
    return out


def run(system, repeat):
    best, res = None, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = feasible(system, check=False)
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best, res


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--large", action="store_true", help="add the n=4 rank-2 LNP quotient")
    args = ap.parse_args()
    backends = kernels.available()
    print(f"backends: {', '.join(backends)}")
    print(f"{'case':<20}{'pivots':>8}" + "".join(f"{b + ' s':>12}" for b in backends) + f"{'speedup':>10}")
    for name, system in cases(args.large):
        times, results = {}, {}
        for b in backends:
            kernels.use_backend(b)
            times[b], results[b] = run(system, args.repeat)
        ref = results["python"]
        for b, r in results.items():
            same = (r.verdict == ref.verdict and
                    (r.certificate is None or r.certificate.entries == ref.certificate.entries))
            if not same:
                raise SystemExit(f"{name}: backend {b} disagrees with the numpy kernels")
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:<20}{ref.stats['pivots']:>8}" + "".join(f"{times[b]:>12.3f}" for b in backends)
              + f"{speed:>9.2f}x")


if __name__ == "__main__":
    main()
