#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the stable-variate transform and the first-passage/weight scans on
identical pre-drawn inputs, then an end-to-end batch estimate, and checks
that the two backends produce the same numbers.

Usage:
    python benchmarks/bench_kernels.py [--paths 16384] [--steps 200] [--repeat 5]
"""
import argparse
import time

import numpy as np

from tsruin._kernels import (
    _HAVE_NUMBA,
    _first_passage_scan_numpy,
    _mc_weight_scan_numpy,
    _stable_standard_numpy,
    cms_constants,
)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, min(times)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--paths", type=int, default=16384)
    parser.add_argument("--steps", type=int, default=200)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=12345)
    args = parser.parse_args()

    if not _HAVE_NUMBA:
        print("numba not importable; nothing to compare")
        return 1
    from tsruin._kernels import (
        _first_passage_scan_numba,
        _mc_weight_scan_numba,
        _stable_standard_numba,
    )

    rho, barrier, alpha = 0.99, 0.1, 1.0
    nu, mu = 1.444e-4, -0.0119319
    theta0, scale0 = cms_constants(rho, 1.0)
    rng = np.random.default_rng(args.seed)
    u_ang = np.pi * (rng.random((args.paths, args.steps)) - 0.5)
    w_exp = rng.standard_exponential((args.paths, args.steps))
    incr = nu * _stable_standard_numpy(u_ang, w_exp, rho, theta0, scale0) + mu

    # warm the JIT cache before timing
    _stable_standard_numba(u_ang[:8], w_exp[:8], rho, theta0, scale0)
    _mc_weight_scan_numba(u_ang[:8], w_exp[:8], rho, theta0, scale0, nu, mu, barrier, alpha)
    _first_passage_scan_numba(incr[:8], barrier)

    elems = args.paths * args.steps
    print(f"paths={args.paths} steps={args.steps} ({elems/1e6:.1f}M elements), "
          f"best of {args.repeat}\n")
    print(f"{'kernel':<22}{'numpy':>12}{'numba':>12}{'speedup':>10}{'agree':>8}")

    cases = [
        ("stable_standard",
         lambda: _stable_standard_numpy(u_ang, w_exp, rho, theta0, scale0),
         lambda: _stable_standard_numba(u_ang, w_exp, rho, theta0, scale0),
         lambda a, b: bool(np.allclose(a, b, rtol=1e-13))),
        ("mc_weight_scan",
         lambda: _mc_weight_scan_numpy(u_ang, w_exp, rho, theta0, scale0, nu, mu, barrier, alpha),
         lambda: _mc_weight_scan_numba(u_ang, w_exp, rho, theta0, scale0, nu, mu, barrier, alpha),
         lambda a, b: a[1] == b[1] and abs(a[0] - b[0]) <= 1e-12 * max(1.0, abs(a[0]))),
        ("first_passage_scan",
         lambda: _first_passage_scan_numpy(incr, barrier),
         lambda: _first_passage_scan_numba(incr, barrier),
         lambda a, b: a == b),
    ]
    for name, f_np, f_nb, same in cases:
        out_np, t_np = best_of(f_np, args.repeat)
        out_nb, t_nb = best_of(f_nb, args.repeat)
        print(f"{name:<22}{t_np*1e3:>10.1f}ms{t_nb*1e3:>10.1f}ms"
              f"{t_np/t_nb:>9.2f}x{'yes' if same(out_np, out_nb) else 'NO':>8}")

    # end-to-end: one small estimate under each backend (fresh interpreters
    # would be cleaner, but the kernel functions are what differ)
    import tsruin
    from tsruin import ClaimsModel, SimPlan
    from tsruin import _kernels as k

    model = ClaimsModel.from_loading(0.01, 1.0, rho, 0.2)
    plan = SimPlan(h=0.01, n=args.paths, N=4, seed=args.seed, threads=1)
    results = {}
    saved = k.mc_weight_scan
    for backend, fn in [("numpy", _mc_weight_scan_numpy), ("numba", _mc_weight_scan_numba)]:
        k.mc_weight_scan = fn
        t0 = time.perf_counter()
        res = tsruin.simulate_ruin_mc(model, barrier, args.steps * plan.h, plan)
        results[backend] = (res.mean, time.perf_counter() - t0)
    k.mc_weight_scan = saved
    print(f"\n{'simulate_ruin_mc':<22}{results['numpy'][1]:>10.2f}s "
          f"{results['numba'][1]:>9.2f}s"
          f"{results['numpy'][1]/results['numba'][1]:>9.2f}x"
          f"{'yes' if abs(results['numpy'][0]-results['numba'][0]) < 1e-12 else 'NO':>8}")
    print(f"\nestimate: {results['numba'][0]:.6f} (both backends)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
