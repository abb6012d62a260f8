"""Benchmark the compiled balancing kernel against the pure-numpy fallback.

Runs the max-min duality solve over every transmission of a delivery plan
for a batch of channel draws, once per backend, and reports wall time and
speedup.  The solved balanced levels are cross-checked between backends.

Usage:
    python benchmarks/bench_solver.py [--K 6] [--t 2] [--L 3] [--alpha 3]
                                      [--draws 20] [--snr-db 10] [--seed 1]
"""

import argparse
import time

import numpy as np

import cycache as cc
from cycache import _solver_py
from cycache.beamforming import _csr, _stream_arrays
from cycache.simulator import _rayleigh, _rng_for

try:
    from cycache import _solver as _solver_c
except ImportError:
    _solver_c = None


def run_backend(kernel, plan, channels, P_T):
    balanced = []
    t0 = time.perf_counter()
    for ch in channels:
        for tx in plan.transmissions:
            H, ul, _ = _stream_arrays(ch, tx.streams)
            indptr, indices = _csr(ul)
            gamma_bar, *_rest = kernel.balance_maxmin(
                H, indptr, indices, ch.N0, P_T, 1e-6 * P_T, 1e-9, 500, 256
            )
            balanced.append(gamma_bar)
    return time.perf_counter() - t0, np.asarray(balanced)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--K", type=int, default=6)
    ap.add_argument("--t", type=int, default=2)
    ap.add_argument("--L", type=int, default=3)
    ap.add_argument("--alpha", type=int, default=3)
    ap.add_argument("--draws", type=int, default=20)
    ap.add_argument("--snr-db", type=float, default=10.0)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    params = cc.SchemeParams(K=args.K, t=args.t, L=args.L, alpha=args.alpha)
    plan = cc.build_scheme_plan(params, "LIN")
    P_T = 10.0 ** (args.snr_db / 10.0)
    channels = [
        cc.ChannelRealization(
            H=_rayleigh(_rng_for(args.seed, d), params.K_eff, params.L),
            N0=1.0,
            P_T=P_T,
        )
        for d in range(args.draws)
    ]
    n_solves = args.draws * len(plan.transmissions)
    print(
        f"K={args.K} t={args.t} L={args.L} alpha={args.alpha}: "
        f"{len(plan.transmissions)} transmissions x {args.draws} draws "
        f"= {n_solves} solves at {args.snr_db:g} dB"
    )

    t_py, g_py = run_backend(_solver_py, plan, channels, P_T)
    print(f"python   backend: {t_py:8.3f} s  ({1e3 * t_py / n_solves:7.3f} ms/solve)")
    if _solver_c is None:
        print("compiled backend: not built (pip install -e . compiles it)")
        return
    t_c, g_c = run_backend(_solver_c, plan, channels, P_T)
    print(f"compiled backend: {t_c:8.3f} s  ({1e3 * t_c / n_solves:7.3f} ms/solve)")
    print(f"speedup: {t_py / t_c:.1f}x")
    worst = float(np.max(np.abs(g_c - g_py) / np.maximum(g_py, 1e-12)))
    print(f"worst relative balanced-level difference: {worst:.2e}")


if __name__ == "__main__":
    main()
