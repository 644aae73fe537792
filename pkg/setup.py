import os

from setuptools import Extension, setup

# The exact simplex pivot kernel is an optional speedup. The package works
# without it: nsboxes.simplex falls back to the pure-Python tableau at
# import time.
try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = [] if not os.path.exists(
        "src/nsboxes/simplex/_pivot_cy.pyx"
    ) else cythonize(
        [
            Extension(
                "nsboxes.simplex._pivot_cy",
                ["src/nsboxes/simplex/_pivot_cy.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
