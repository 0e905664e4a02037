import numpy
from setuptools import Extension, setup

# The compiled stepper is an optimization, not a requirement: if Cython or a
# C compiler is unavailable the package installs pure-Python and selects the
# fallback backend at import time.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "burstlab._fastcore",
                ["src/burstlab/_fastcore.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover
    print(f"burstlab: skipping compiled core ({exc}); pure-Python backend will be used")
    ext_modules = []

setup(ext_modules=ext_modules)
