"""Build script.

The compiled kernel is optional: if Cython or a C compiler is missing the
package installs anyway and the numpy fallback is used at import time.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/qhrolab/_kernels/_core.pyx"],
        compiler_directives={"language_level": 3, "boundscheck": False, "wraparound": False},
    )
    include_dirs = [numpy.get_include()]
    for ext in ext_modules:
        ext.include_dirs = include_dirs
        ext.extra_compile_args = ["-O3"]
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"warning: compiled kernel disabled ({exc!r}); pure-python fallback will be used")
    ext_modules = []

setup(ext_modules=ext_modules)
