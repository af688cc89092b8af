"""Builds the optional compiled search kernel; the package works without it."""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("WSPPBT_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("wsppbt._pbt", ["src/wsppbt/_pbt.pyx"], extra_compile_args=["-O3"])],
            language_level=3,
            quiet=True,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
