"""Build script.

The package is pure Python with one optional Cython extension,
cofola.backend._speed, that accelerates the ground model-count search.
If Cython or a C compiler is missing the build falls back to pure Python
silently; cofola.backend.kernel picks whichever is importable at runtime.
"""

import os

from setuptools import setup

ext_modules = []
_PYX = os.path.join(os.path.dirname(__file__), "src", "cofola", "backend",
                    "_speed.pyx")
if os.path.exists(_PYX):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "cofola.backend._speed",
                    ["src/cofola/backend/_speed.pyx"],
                    extra_compile_args=["-O2"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
