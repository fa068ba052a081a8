# cython: language_level=3, boundscheck=False, cdivision=True
"""Spin loop consuming a given amount of per-thread CPU time.

Runs with the GIL released so a pool of burner threads can load every core;
the pure-Python fallback in kernels.py serializes on the interpreter lock.
"""

from posix.time cimport CLOCK_THREAD_CPUTIME_ID, clock_gettime, timespec


cdef inline double _thread_cpu() noexcept nogil:
    cdef timespec ts
    clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts)
    return ts.tv_sec + ts.tv_nsec * 1e-9


def burn_thread_cpu(double core_seconds):
    """Spin until this thread has consumed `core_seconds` of CPU time.

    Returns the CPU time actually consumed (slightly above the target)."""
    cdef double start, x = 1.0
    cdef int i
    if core_seconds <= 0.0:
        return 0.0
    with nogil:
        start = _thread_cpu()
        while _thread_cpu() - start < core_seconds:
            for i in range(2048):
                x = x * 1.0000001 + 1e-12
                if x > 4.0:
                    x = 1.0
    return _thread_cpu() - start
