import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("TELEOSCM_PURE_PYTHON", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "teleoscm._core._vm",
                    ["src/teleoscm/_core/_vm.pyx"],
                    # no -ffast-math: results must match the numpy kernel bit for bit
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
