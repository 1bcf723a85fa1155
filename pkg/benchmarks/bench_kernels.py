"""Timing comparison of the pure-numpy and compiled kernel backends.

Run from the repo root after installing:

    python3 benchmarks/bench_kernels.py --entities 2000 --k 64 --triples 4096

Reports best-of-N wall time per call for the three hot kernels, plus the
speedup of the compiled backend when it is available.
"""

import argparse
import time

import numpy as np

from hake.kernels import available_backends, numpy_backend

try:
    from hake.kernels import _cy
except ImportError:
    _cy = None

VARIANT_FULL = 0


def _tables(rng, n_ent, n_rel, k):
    return (rng.uniform(-1.0, 1.0, (n_ent, k)),
            rng.uniform(0.0, 2.0 * np.pi, (n_ent, k)),
            rng.uniform(-1.0, 1.0, (n_rel, k)),
            rng.uniform(0.1, 0.9, (n_rel, k)),
            rng.uniform(0.0, 2.0 * np.pi, (n_rel, k)))


def _best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--entities", type=int, default=2000)
    ap.add_argument("--relations", type=int, default=12)
    ap.add_argument("--k", type=int, default=64)
    ap.add_argument("--triples", type=int, default=4096)
    ap.add_argument("--repeats", type=int, default=7)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    tables = _tables(rng, args.entities, args.relations, args.k)
    h = rng.integers(0, args.entities, args.triples)
    r = rng.integers(0, args.relations, args.triples)
    t = rng.integers(0, args.entities, args.triples)
    coeff = rng.normal(size=args.triples)

    backends = [("py", numpy_backend)]
    if _cy is not None:
        backends.append(("cy", _cy))
    print(f"backends built: {', '.join(available_backends())}")
    print(f"entities={args.entities} relations={args.relations} "
          f"k={args.k} triples={args.triples} (best of {args.repeats})")

    workloads = [
        ("triple_distances",
         lambda be: be.triple_distances(*tables, h, r, t, VARIANT_FULL, 1)),
        ("candidate_scores",
         lambda be: be.candidate_scores(*tables, int(h[0]), int(r[0]), int(t[0]),
                                        1, VARIANT_FULL, 1, 1.0, 1.0)),
        ("triple_grad_rows",
         lambda be: be.triple_grad_rows(*tables, h, r, t, coeff, 1.0, 1.0,
                                        VARIANT_FULL, 1)),
    ]

    width = max(len(name) for name, _ in workloads)
    for name, call in workloads:
        times = {bname: _best_of(lambda: call(be), args.repeats)
                 for bname, be in backends}
        line = f"{name:<{width}}  py={times['py'] * 1e3:8.3f} ms"
        if "cy" in times:
            line += f"  cy={times['cy'] * 1e3:8.3f} ms  speedup={times['py'] / times['cy']:5.2f}x"
        print(line)


if __name__ == "__main__":
    main()
