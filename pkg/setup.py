import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("PERTURBED_TD_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "perturbed_td._kernel",
                    ["src/perturbed_td/_kernel.pyx"],
                    include_dirs=[np.get_include()],
                    # no FMA contraction: keeps results bitwise equal to the Python fallback
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
