"""Benchmark the compiled kernels against the pure-Python fallback.

Times the hot recursions and the Bartlett long-run variance, checks that
both backends agree, and times an end-to-end Monte Carlo table on each
backend.

Usage: python benchmarks/bench_kernels.py [--reps 400]
"""

import argparse
import time

import numpy as np


def _time(fn, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_kernels(reps):
    from tsdid import _kernels_py

    try:
        from tsdid import _kernels_cy
    except ImportError:
        _kernels_cy = None
        print("compiled kernels not built; timing the pure backend only")

    rng = np.random.default_rng(0)
    eps = rng.standard_normal(100_000)
    scores = np.ascontiguousarray(rng.standard_normal((100_000, 3)))

    cases = [
        ("garch_filter (n=100k)", lambda k: k.garch_filter(eps, 0.4, 0.3, 0.3, 1.0, 0.0)),
        ("ar1_filter (n=100k)", lambda k: k.ar1_filter(eps, 0.7, 0.0)),
        ("bartlett_lrv L=8 (n=100k)", lambda k: k.bartlett_lrv(eps, 8)),
        ("bartlett_lrv_matrix L=8 (n=100k, k=3)", lambda k: k.bartlett_lrv_matrix(scores, 8)),
    ]
    print(f"{'kernel':<42}{'python':>12}{'cython':>12}{'speedup':>9}")
    for name, call in cases:
        t_py = _time(lambda: call(_kernels_py))
        if _kernels_cy is None:
            print(f"{name:<42}{t_py * 1e3:>10.2f}ms{'-':>12}{'-':>9}")
            continue
        t_cy = _time(lambda: call(_kernels_cy))
        a, b = call(_kernels_cy), call(_kernels_py)
        agree = np.allclose(a, b, rtol=1e-10, atol=1e-12)
        assert agree, f"backend mismatch in {name}"
        print(f"{name:<42}{t_py * 1e3:>10.2f}ms{t_cy * 1e3:>10.2f}ms{t_py / t_cy:>8.1f}x")

    return _kernels_cy is not None


_END_TO_END_SNIPPET = """
import time
from tsdid import kernels
from tsdid.dgp import preset
from tsdid.montecarlo import McConfig, run_table

cfg = McConfig(spec=preset("GARCH(1,1)"), sizes=(200,), reps={reps}, seed=1)
start = time.perf_counter()
report = run_table(cfg)
elapsed = time.perf_counter() - start
row = report.row(200, "tdid")
print(f"{{kernels.backend_name()}} {{elapsed:.3f}} {{row.mb:+.6f}} {{row.rmse:.6f}}")
"""


def bench_end_to_end(reps, has_compiled):
    # Backend selection happens at import, so each timing runs in a fresh
    # interpreter.
    import os
    import subprocess
    import sys

    print(f"\nend-to-end MC table (GARCH, n=401, {reps} reps):")
    results = {}
    for env_value, label in ((None, "default"), ("1", "pure python")):
        env = dict(os.environ)
        if env_value is None:
            env.pop("TSDID_PURE_PYTHON", None)
        else:
            env["TSDID_PURE_PYTHON"] = env_value
        out = subprocess.run(
            [sys.executable, "-c", _END_TO_END_SNIPPET.format(reps=reps)],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        ).stdout.split()
        backend, elapsed, mb, rmse = out[0], float(out[1]), out[2], out[3]
        results[label] = (backend, elapsed, mb, rmse)
        print(f"  {label:<12} backend={backend:<8} {elapsed:>7.2f}s  MB {mb}  RMSE {rmse}")
        if env_value == "1" and backend != "python":
            raise SystemExit("TSDID_PURE_PYTHON did not select the fallback")
    (b1, t1, mb1, r1), (b2, t2, mb2, r2) = results["default"], results["pure python"]
    if b1 == "cython":
        print(f"  backend agreement: MB match={mb1 == mb2}, RMSE match={r1 == r2}, speedup {t2 / t1:.2f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=400)
    args = parser.parse_args()
    has_compiled = bench_kernels(args.reps)
    bench_end_to_end(args.reps, has_compiled)


if __name__ == "__main__":
    main()
