"""Build script: compiles the optional Cython training kernel.

The package works without the extension (a pure-Python kernel is selected at
import time), so a failed compile only costs speed, not functionality.
"""

from setuptools import setup
from setuptools.command.build_ext import build_ext
from setuptools.errors import CCompilerError, ExecError, PlatformError


class OptionalBuildExt(build_ext):
    """Degrade to the pure-Python kernel when no compiler is available."""

    def run(self):
        try:
            build_ext.run(self)
        except (CCompilerError, ExecError, PlatformError, FileNotFoundError) as e:
            print(f"warning: skipping extension build ({e}); "
                  "falling back to the pure-Python SVM kernel")

    def build_extension(self, ext):
        if self.compiler.compiler_type != "msvc":
            # No fused multiply-add: the compiled kernel must match the
            # pure-Python one bit for bit.
            ext.extra_compile_args = list(ext.extra_compile_args or []) + [
                "-ffp-contract=off"]
        try:
            build_ext.build_extension(self, ext)
        except (CCompilerError, ExecError, PlatformError, FileNotFoundError) as e:
            print(f"warning: could not build {ext.name} ({e}); "
                  "falling back to the pure-Python SVM kernel")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension
    ext = Extension("da_tagger.svm._dcd_cy",
                    sources=["src/da_tagger/svm/_dcd_cy.pyx"])
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
