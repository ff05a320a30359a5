"""Build script: compiles the optional Cython kernel extension.

The extension only accelerates the Mittag-Leffler kernels; the package
falls back to the pure-Python implementation when the compiled module is
missing, so a failed native build must not fail the install.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """build_ext that degrades to the pure-Python fallback on failure."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            "WARNING: building the mlbeta._core._kernels extension failed "
            f"({exc!r}); the pure-Python fallback will be used.",
            file=sys.stderr,
        )


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print(
            "WARNING: Cython is not available; skipping the compiled kernels.",
            file=sys.stderr,
        )
        return []
    ext = Extension(
        "mlbeta._core._kernels",
        ["src/mlbeta/_core/_kernels.pyx"],
        extra_compile_args=["-O2"],
    )
    return cythonize([ext], language_level="3")


setup(
    ext_modules=_extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
