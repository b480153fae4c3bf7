"""Throughput comparison of the compiled RK4 kernel against the fallback.

Runs the two-level canonical field with convergence checking disabled so
both backends take exactly n_steps steps, then reports steps/second and
the speedup.  The two trajectories must agree bitwise; a mismatch aborts.

    python3 benchmarks/bench_kernel.py [--steps N] [--dim D] [--repeat R]
"""

import argparse
import time

import numpy as np

from affinetherm._kernel import _fallback

try:
    from affinetherm._kernel import _core
except ImportError:
    _core = None


def _run(impl, dim: int, n_steps: int):
    rng = np.random.default_rng(7)
    g1 = rng.normal(size=dim)
    g2 = rng.normal(size=dim)
    y0 = rng.normal(size=dim)
    args = (impl.KIND_TWO, 0.0, 3.0, g1, g2, y0, 1.0, 1e-3, n_steps, n_steps, 0.0)
    t0 = time.perf_counter()
    out = impl.integrate_canonical(*args)
    return time.perf_counter() - t0, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=2_000_000)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    best = {}
    outs = {}
    impls = [("python", _fallback)] + ([("compiled", _core)] if _core else [])
    for name, impl in impls:
        # fallback is slow; keep its step count manageable but report per-step
        steps = args.steps if name == "compiled" else max(args.steps // 100, 10_000)
        t_best = min(_run(impl, args.dim, steps)[0] for _ in range(args.repeat))
        _, outs[name] = _run(impl, args.dim, steps)
        best[name] = steps / t_best
        print(f"{name:9s} {steps:>10d} steps  {best[name]:>12.0f} steps/s")

    if _core is None:
        print("compiled kernel not built; nothing to compare")
        return

    # bitwise agreement on a common short run
    a = _fallback.integrate_canonical(_fallback.KIND_TWO, 0.0, 3.0,
                                      np.array([0.1] * args.dim), np.array([-0.2] * args.dim),
                                      np.zeros(args.dim), 1.0, 1e-3, 50_000, 1000, 0.0)
    b = _core.integrate_canonical(_core.KIND_TWO, 0.0, 3.0,
                                  np.array([0.1] * args.dim), np.array([-0.2] * args.dim),
                                  np.zeros(args.dim), 1.0, 1e-3, 50_000, 1000, 0.0)
    if not all(np.array_equal(u, v) for u, v in zip(a[:3], b[:3])):
        raise SystemExit("backend disagreement: trajectories are not bitwise equal")
    print(f"speedup   {best['compiled'] / best['python']:>22.1f}x  (trajectories bitwise equal)")


if __name__ == "__main__":
    main()
