"""Build the optional compiled kernels.

If Cython or a C compiler is missing, or compilation fails, the package
installs without the extension and runs on the numpy fallback.
"""

import os
import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        sys.stderr.write(
            f"warning: compiled kernels not built ({exc}); using the numpy fallback\n"
        )


def extensions():
    if os.environ.get("MPNUM_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    flags = ["-O3", "-ffp-contract=off", "-fno-fast-math", "-fopenmp"]
    ext = Extension(
        "mpnum._ckernels",
        ["src/mpnum/_ckernels.pyx"],
        extra_compile_args=flags,
        extra_link_args=["-fopenmp"],
    )
    try:
        return cythonize([ext], compiler_directives={"language_level": "3"}, quiet=True)
    except Exception as exc:  # noqa: BLE001
        OptionalBuildExt._warn(exc)
        return []


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
