"""JIT shim: numba-compiled kernels with a pure-Python/numpy fallback.

Set ``HELFRICH_JIT=0`` in the environment before import to disable numba
and run the identical kernel source uncompiled (useful for debugging and
as a dependency-free fallback).  ``benchmarks/bench_kernels.py`` compares
the two paths.
"""

import os

JIT_ENABLED = os.environ.get("HELFRICH_JIT", "1").lower() not in ("0", "false", "no")

if JIT_ENABLED:
    try:
        from numba import njit as _numba_njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        JIT_ENABLED = False

if JIT_ENABLED:

    def njit(func=None, **kwargs):
        kwargs.setdefault("cache", True)
        if func is not None:
            return _numba_njit(**kwargs)(func)
        return _numba_njit(**kwargs)

else:

    def njit(func=None, **kwargs):
        if func is not None:
            return func

        def wrap(f):
            return f

        return wrap


def unjitted(func):
    """Return the original Python function behind a possibly-jitted one."""
    return getattr(func, "py_func", func)
