"""Optional numba acceleration for loop-bound kernels.

The flood-fill unwrapper is the one kernel that cannot be vectorised (it walks
pixels one at a time in quality order).  It is written once, in plain numpy
terms, and compiled with numba when available.  Set OAMQKD_DISABLE_NUMBA=1 to
force the pure-Python path; results are identical either way, only speed
differs (see benchmarks/bench_unwrap.py).
"""

from __future__ import annotations

import math
import os

import numpy as np

JIT_ENABLED = os.environ.get("OAMQKD_DISABLE_NUMBA", "0").lower() not in ("1", "true", "yes")

if JIT_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a hard dep, belt and braces
        JIT_ENABLED = False

if not JIT_ENABLED:

    def njit(func=None, **kwargs):
        if callable(func):
            return func

        def wrap(f):
            return f

        return wrap


TWO_PI = 2.0 * math.pi


@njit(cache=True, nogil=True)
def _flood_unwrap_kernel(phase, quality, k_out):
    """Quality-guided flood fill; writes integer wrap counts into k_out.

    Starts at the highest-quality pixel and repeatedly unwraps the
    highest-quality frontier pixel against the neighbour that enqueued it.
    The added multiples of 2*pi keep every tree edge jump below pi, so cuts
    forced by residues end up along the lowest-quality paths.
    """
    n0, n1 = phase.shape
    npix = n0 * n1

    visited = np.zeros(npix, dtype=np.uint8)
    # binary max-heap of frontier pixels: quality key, pixel index, reference
    # (already unwrapped) neighbour index.  Each pixel can be pushed once per
    # unvisited neighbour, so 4*npix bounds the live size.
    cap = 4 * npix + 8
    heap_q = np.empty(cap, dtype=np.float64)
    heap_p = np.empty(cap, dtype=np.int64)
    heap_r = np.empty(cap, dtype=np.int64)
    size = 0

    flat_q = quality.ravel()
    flat_phi = phase.ravel()

    seed = 0
    best = flat_q[0]
    for i in range(1, npix):
        if flat_q[i] > best:
            best = flat_q[i]
            seed = i
    visited[seed] = 1
    k_out[seed] = 0

    # push neighbours of seed
    si = seed // n1
    sj = seed % n1
    for d in range(4):
        ii = si + (-1 if d == 0 else 1 if d == 1 else 0)
        jj = sj + (-1 if d == 2 else 1 if d == 3 else 0)
        if 0 <= ii < n0 and 0 <= jj < n1:
            p = ii * n1 + jj
            heap_q[size] = flat_q[p]
            heap_p[size] = p
            heap_r[size] = seed
            size += 1
            c = size - 1
            while c > 0:
                par = (c - 1) // 2
                if heap_q[par] < heap_q[c]:
                    heap_q[par], heap_q[c] = heap_q[c], heap_q[par]
                    heap_p[par], heap_p[c] = heap_p[c], heap_p[par]
                    heap_r[par], heap_r[c] = heap_r[c], heap_r[par]
                    c = par
                else:
                    break

    while size > 0:
        p = heap_p[0]
        ref = heap_r[0]
        size -= 1
        heap_q[0] = heap_q[size]
        heap_p[0] = heap_p[size]
        heap_r[0] = heap_r[size]
        c = 0
        while True:
            l = 2 * c + 1
            r = l + 1
            big = c
            if l < size and heap_q[l] > heap_q[big]:
                big = l
            if r < size and heap_q[r] > heap_q[big]:
                big = r
            if big == c:
                break
            heap_q[big], heap_q[c] = heap_q[c], heap_q[big]
            heap_p[big], heap_p[c] = heap_p[c], heap_p[big]
            heap_r[big], heap_r[c] = heap_r[c], heap_r[big]
            c = big

        if visited[p]:
            continue
        visited[p] = 1
        ref_val = flat_phi[ref] + TWO_PI * k_out[ref]
        # nearest integer, identical in jitted and pure paths
        k_out[p] = int(math.floor((ref_val - flat_phi[p]) / TWO_PI + 0.5))

        pi_ = p // n1
        pj = p % n1
        for d in range(4):
            ii = pi_ + (-1 if d == 0 else 1 if d == 1 else 0)
            jj = pj + (-1 if d == 2 else 1 if d == 3 else 0)
            if 0 <= ii < n0 and 0 <= jj < n1:
                q = ii * n1 + jj
                if not visited[q]:
                    heap_q[size] = flat_q[q]
                    heap_p[size] = q
                    heap_r[size] = p
                    size += 1
                    c = size - 1
                    while c > 0:
                        par = (c - 1) // 2
                        if heap_q[par] < heap_q[c]:
                            heap_q[par], heap_q[c] = heap_q[c], heap_q[par]
                            heap_p[par], heap_p[c] = heap_p[c], heap_p[par]
                            heap_r[par], heap_r[c] = heap_r[c], heap_r[par]
                            c = par
                        else:
                            break


def flood_unwrap(phase: np.ndarray, quality: np.ndarray) -> np.ndarray:
    """Return integer wrap counts k such that phase + 2*pi*k is the unwrapped surface."""
    phase = np.ascontiguousarray(phase, dtype=np.float64)
    quality = np.ascontiguousarray(quality, dtype=np.float64)
    k = np.zeros(phase.size, dtype=np.int64)
    _flood_unwrap_kernel(phase, quality, k)
    return k.reshape(phase.shape)
