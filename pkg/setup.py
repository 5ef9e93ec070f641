"""Build script: compiles the optional scanning speedups extension.

The package works without the extension (a pure-Python twin is selected at
import time), so a failed compile downgrades to a warning instead of
aborting the install.
"""

import sys

from setuptools import setup
from setuptools.errors import CCompilerError, ExecError, PlatformError

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        ["src/refrank/kernels/_speedups.pyx"],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
        },
    )
except ImportError:
    extensions = []

try:
    setup(ext_modules=extensions)
except (CCompilerError, ExecError, PlatformError):
    print("warning: speedups extension failed to build; "
          "falling back to pure-Python kernels", file=sys.stderr)
    setup(ext_modules=[])
