from setuptools import Extension, setup
from Cython.Build import cythonize

ext = Extension(
    "lidarsynth._kernels._core",
    ["src/lidarsynth/_kernels/_core.pyx"],
)

setup(ext_modules=cythonize([ext], language_level=3))
