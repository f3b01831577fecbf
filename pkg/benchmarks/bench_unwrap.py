"""Compare the compiled and pure-numpy flood-unwrap kernels.

The quality-guided flood fill is the one hot loop that does not vectorise:
each pixel is popped from a heap and unwrapped against the neighbour that
reached it.  With numba it runs in milliseconds at 256^2; interpreted it is
two to three orders of magnitude slower.  The pure path exists so the package
works without a compiler toolchain (OAMQKD_DISABLE_NUMBA=1), not for speed.

Usage:
    python benchmarks/bench_unwrap.py [--n 256] [--repeat 5]

Runs this process with numba enabled (unless the env flag already disables
it), then re-executes itself in a subprocess with OAMQKD_DISABLE_NUMBA=1 and
checks that both kernels return identical wrap counts.
"""

import argparse
import hashlib
import json
import math
import os
import subprocess
import sys
import time

import numpy as np


def make_case(n: int, seed: int = 42):
    """A turbulence-like wrapped phase with a quality dip across the middle."""
    rng = np.random.default_rng(seed)
    x = np.linspace(-1.0, 1.0, n)
    xx, yy = np.meshgrid(x, x, indexing="xy")
    surface = (
        9.0 * np.sin(2.3 * xx + 0.7)
        + 7.0 * np.cos(1.9 * yy - 0.4)
        + 5.0 * xx * yy
        + rng.normal(0.0, 0.3, (n, n))
    )
    wrapped = np.angle(np.exp(1j * surface))
    quality = np.exp(-(xx**2 + yy**2)) * (0.2 + 0.8 * np.abs(np.sin(3.0 * yy)))
    return wrapped, quality


def time_kernel(wrapped, quality, repeat: int):
    from oamqkd._accel import JIT_ENABLED, flood_unwrap

    flood_unwrap(wrapped, quality)  # warm-up (jit compilation)
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        k = flood_unwrap(wrapped, quality)
        best = min(best, time.perf_counter() - t0)
    return JIT_ENABLED, best, k


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=256, help="grid size (default 256)")
    parser.add_argument("--repeat", type=int, default=5, help="timing repetitions")
    parser.add_argument("--emit-json", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args(argv)

    wrapped, quality = make_case(args.n)
    jit, best, k = time_kernel(wrapped, quality, args.repeat)

    if args.emit_json:
        print(json.dumps({"jit": jit, "best_s": best, "k_sum": int(k.sum()), "k_hash": hashlib.sha256(k.tobytes()).hexdigest()}))
        return 0

    label = "numba" if jit else "pure numpy (numba disabled or unavailable)"
    print(f"{args.n}^2 flood unwrap, best of {args.repeat}: {best * 1e3:8.2f} ms  [{label}]")

    if jit:
        env = dict(os.environ, OAMQKD_DISABLE_NUMBA="1")
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--n", str(args.n),
             "--repeat", str(max(1, args.repeat // 5)), "--emit-json"],
            check=True, env=env, capture_output=True, text=True,
        )
        pure = json.loads(out.stdout)
        print(f"{args.n}^2 flood unwrap, best of {max(1, args.repeat // 5)}: {pure['best_s'] * 1e3:8.2f} ms  [pure numpy]")
        print(f"speedup: {pure['best_s'] / best:.0f}x")
        same = pure["k_sum"] == int(k.sum()) and pure["k_hash"] == hashlib.sha256(k.tobytes()).hexdigest()
        print(f"wrap counts identical: {same}")
        return 0 if same else 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
