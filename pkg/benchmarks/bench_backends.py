"""Benchmark: numba kernels vs the pure-numpy fallback.

Times the three hot paths on desk-scale workloads and verifies that the
two backends agree bitwise. Run from the repo root:

    python benchmarks/bench_backends.py [--full]

--full uses the acceptance-scale oracle step (h=1e-4), which is slow on
the fallback.
"""

import argparse
import time

import numpy as np

import nonlocal_flow as nf
from nonlocal_flow import AtomListSpec, SamplerSpec, StepControl, backend


def timed(fn, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_reference(h, t_end):
    e = nf.build_ensemble(SamplerSpec(fn=lambda x: x, n=32))

    def work():
        return nf.reference_evolve(e, h, t_end).final_ensemble.values

    return work


def bench_adaptive():
    e = nf.build_ensemble(AtomListSpec(((1.5, 0.5), (3.0, 0.5))))
    ctrl = StepControl(t_max=60.0, record_every=0.002)

    def work():
        rec = nf.evolve(e, ctrl)
        return rec.final_ensemble.values

    return work


def bench_characteristic():
    e = nf.build_ensemble(AtomListSpec(((1.5, 0.5), (3.0, 0.5))))
    ctrl = StepControl(t_max=60.0, record_every=0.002)
    with backend.use("numba" if _has_numba() else "numpy"):
        rec = nf.evolve(e, ctrl)
    path = rec.lambda_path()

    def work():
        return nf.solve_characteristic(1.5, path, ctrl).values

    return work


def _has_numba():
    try:
        import numba  # noqa: F401
        return True
    except ImportError:
        return False


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--full", action="store_true",
                        help="acceptance-scale oracle step h=1e-4")
    args = parser.parse_args()

    h_ref = 1e-4 if args.full else 1e-3
    workloads = [
        (f"reference RK4, 32 atoms, h={h_ref:g}, t=10",
         bench_reference(h_ref, 10.0)),
        ("adaptive 5(4), 2 atoms, record 0.002, to steady state",
         bench_adaptive()),
        ("scalar characteristic re-solve over the recorded grid",
         bench_characteristic()),
    ]

    backends = ["numpy"] + (["numba"] if _has_numba() else [])
    if "numba" not in backends:
        print("numba not importable; timing the fallback only")

    print(f"{'workload':<58} " + " ".join(f"{b:>12}" for b in backends)
          + f" {'speedup':>9} {'max |diff|':>11}")
    for label, work in workloads:
        times = {}
        results = {}
        for name in backends:
            with backend.use(name):
                if name == "numba":
                    work()  # warm the JIT cache before timing
                times[name], results[name] = timed(work)
        row = f"{label:<58} " + " ".join(f"{times[b]*1e3:>10.2f}ms"
                                         for b in backends)
        if len(backends) == 2:
            diff = float(np.max(np.abs(results["numpy"] - results["numba"])))
            row += f" {times['numpy']/times['numba']:>8.1f}x {diff:>11.1e}"
        print(row)


if __name__ == "__main__":
    main()
