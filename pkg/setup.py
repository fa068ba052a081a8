"""Builds the optional compiled burn kernel.

The package is fully functional without it (a pure-Python fallback is
selected at import); the extension only matters for Burn mode, where the
spin loop must release the GIL to load more than one core from threads.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "defaas.executor._burnkernel",
                ["src/defaas/executor/_burnkernel.pyx"],
                extra_compile_args=["-O2"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # noqa: BLE001 - any build-chain failure falls back to pure Python
    print(f"warning: building without compiled burn kernel ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
