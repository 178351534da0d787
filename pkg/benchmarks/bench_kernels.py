#!/usr/bin/env python3
"""Benchmark the numba-compiled step kernels against the pure-Python
fallback (HELFRICH_JIT=0).

Each lane runs in a subprocess so the kernel selection happens at import
time, exactly as it does for users.  The workload is a batch of full
profile integrations at the default tolerances.
"""

import json
import os
import subprocess
import sys
import time

N_SOLVES = 20


def child():
    from helfrich import HelfrichParams, integrate

    params = HelfrichParams(1.0, 0.25, 1.0)
    integrate(params, 0.05)  # warm-up: JIT compile / cache load
    t0 = time.perf_counter()
    for k in range(N_SOLVES):
        integrate(params, 0.02 + 0.002 * (k % 5))
    dt = (time.perf_counter() - t0) / N_SOLVES
    print(json.dumps({"seconds_per_solve": dt}))


def main():
    results = {}
    for flag in ("1", "0"):
        env = dict(os.environ, HELFRICH_JIT=flag)
        out = subprocess.run(
            [sys.executable, __file__, "--child"],
            env=env, capture_output=True, text=True, check=True,
        )
        results[flag] = json.loads(out.stdout.strip().splitlines()[-1])

    jit = results["1"]["seconds_per_solve"]
    py = results["0"]["seconds_per_solve"]
    print(f"numba kernels    : {jit * 1e3:8.2f} ms/solve")
    print(f"python fallback  : {py * 1e3:8.2f} ms/solve")
    print(f"speedup          : {py / jit:8.1f}x")


if __name__ == "__main__":
    if "--child" in sys.argv:
        child()
    else:
        main()
