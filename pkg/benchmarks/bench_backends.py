"""Timing comparison of the pure NumPy and compiled sampling kernels.

Runs the three hot functions on sized workloads with both backends and
reports the median wall time plus the speedup.  The two backends are
bit-identical by contract, so the interesting output is purely the
timing; a mismatch in any output array is reported as an error.

Usage: python benchmarks/bench_backends.py [--size 1000000] [--repeats 9]
"""

import argparse
import statistics
import sys
import time

import numpy as np

from typlab import _purecore
from typlab.backend import build_alias, derive_key

try:
    from typlab import _core
except ImportError:
    _core = None


def _median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=1_000_000)
    parser.add_argument("--repeats", type=int, default=9)
    args = parser.parse_args(argv)

    if _core is None:
        print(
            "compiled extension is not built; nothing to compare "
            "(pip install it without TYPLAB_NO_EXT to build)",
            file=sys.stderr,
        )
        return 1

    n = args.size
    key = derive_key(20240811, 0)
    probs = np.full(1024, 1.0 / 1024.0)
    prob, alias = build_alias(probs)
    u = _purecore.uniforms(key, 0, n)
    codes = (_purecore.uniforms(key, n, n) * 4096.0).astype(np.int64)

    workloads = [
        ("uniforms", lambda m: m.uniforms(key, 0, n)),
        ("alias_pick", lambda m: m.alias_pick(prob, alias, u)),
        ("count_codes", lambda m: m.count_codes(codes)),
    ]

    print(f"{'kernel':<12} {'pure (ms)':>10} {'compiled (ms)':>14} {'speedup':>8}")
    failures = 0
    for name, call in workloads:
        pure_out = call(_purecore)
        core_out = call(_core)
        if isinstance(pure_out, tuple):
            same = all(
                np.array_equal(a, b) for a, b in zip(pure_out, core_out)
            )
        else:
            same = np.array_equal(pure_out, core_out)
        if not same:
            print(f"{name}: backend outputs differ", file=sys.stderr)
            failures += 1
            continue
        t_pure = _median_time(lambda: call(_purecore), args.repeats)
        t_core = _median_time(lambda: call(_core), args.repeats)
        print(
            f"{name:<12} {t_pure * 1e3:>10.3f} {t_core * 1e3:>14.3f}"
            f" {t_pure / t_core:>8.2f}x"
        )
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
