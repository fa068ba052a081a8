"""CPU-burn kernel selection: compiled extension when available, pure Python
otherwise.

Both measure thread CPU time, not wall time, so contention stretches the
wall duration without changing the work done. The compiled kernel releases
the GIL; the fallback cannot, so concurrent pure-Python burns serialize on
the interpreter lock (duty-cycle load generation then tops out near one
core). Set DEFAAS_PURE_BURN=1 to force the fallback, e.g. for benchmarks.
"""

from __future__ import annotations

import os
import time

try:
    from ._burnkernel import burn_thread_cpu as _native_burn
except ImportError:
    _native_burn = None

_FORCE_PURE = os.environ.get("DEFAAS_PURE_BURN", "") not in ("", "0")

BACKEND = "pure" if (_native_burn is None or _FORCE_PURE) else "native"


def burn_pure(core_seconds: float) -> float:
    """Fallback spin loop; chunks arithmetic between clock reads to keep
    syscall overhead low."""
    if core_seconds <= 0.0:
        return 0.0
    start = time.thread_time()
    x = 1.0
    while time.thread_time() - start < core_seconds:
        for _ in range(512):
            x = x * 1.0000001 + 1e-12
            if x > 4.0:
                x = 1.0
    return time.thread_time() - start


if BACKEND == "native":
    burn = _native_burn
else:
    burn = burn_pure
