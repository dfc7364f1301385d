"""Build script for the optional compiled episode kernel.

The package is pure Python; the Cython extension only accelerates the
inner episode loop. Set MACSIM_NO_EXT=1 to skip building it (the
pure-Python lane is selected automatically at import time).
"""

import os

from setuptools import Extension, setup

extensions = []
if not os.environ.get("MACSIM_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        # -ffp-contract=off: the compiled lane must round float arithmetic
        # exactly like CPython so both lanes stay bit-identical.
        extensions = cythonize(
            [
                Extension(
                    "macsim._kernel",
                    ["src/macsim/_kernel.pyx"],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            language_level="3",
        )

setup(ext_modules=extensions)
