"""Build script: compiles the optional fast kernel extension.

The extension is a strict speed-up; the package falls back to the pure
Python kernels in conecbf._pykernel when the build is unavailable.
"""

import warnings

from setuptools import setup
from setuptools.command.build_ext import build_ext


def _extensions():
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "conecbf._speedups",
        ["src/conecbf/_speedups.pyx"],
        # no -ffast-math, no FP contraction: keeps the compiled kernels in
        # numerical lockstep with the pure Python twin
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


class OptionalBuildExt(build_ext):
    """Carry on with the pure Python kernels if compilation fails."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            warnings.warn(f"skipping compiled kernels: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"skipping {ext.name}: {exc}")


setup(ext_modules=_extensions(), cmdclass={"build_ext": OptionalBuildExt})
