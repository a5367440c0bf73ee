"""Builds the optional compiled kernel extension.

The package works without it (a pure-Python fallback is selected at import
time); the extension makes large factor products, joint enumeration, and
rule-table synthesis fast.  See benchmarks/bench_kernels.py for numbers.
"""

from Cython.Build import cythonize
from setuptools import Extension, setup

setup(
    ext_modules=cythonize(
        [
            Extension(
                "mebnkit._kernels._ck",
                ["src/mebnkit/_kernels/_ck.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
)
