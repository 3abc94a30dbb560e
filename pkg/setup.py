import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("RCC5_NO_EXT"):
    try:
        from Cython.Build import cythonize
        import numpy as np
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("rcc5._ckernel", ["src/rcc5/_ckernel.pyx"],
                       include_dirs=[np.get_include()],
                       extra_compile_args=["-O3"])],
            language_level=3,
        )

setup(ext_modules=ext_modules)
