"""Build script: compiles the optional Fock-kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so any build failure here is downgraded to a warning.
"""
import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/photoion/_kernels_cy.pyx",
        compiler_directives={"language_level": "3"},
    )
    include_dirs = [numpy.get_include()]
    for ext in ext_modules:
        ext.include_dirs = include_dirs
except Exception as exc:  # pragma: no cover - builder environment dependent
    warnings.warn(f"compiled Fock kernels unavailable, using pure fallback: {exc}")
    ext_modules = []

setup(ext_modules=ext_modules)
