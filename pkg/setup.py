"""Build script: compiles the planner backup kernel when Cython is available.

The package works without the extension (a pure-Python kernel is selected at
import time), so the build degrades gracefully: set TREATPLAN_SKIP_EXT=1 or
install without Cython to skip compilation entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("TREATPLAN_SKIP_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "treatplan._backup",
                    ["src/treatplan/_backup.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
