import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "ptosis._core",
    sorted(glob.glob("src/*.cpp")) + ["python/bindings.cpp"],
    include_dirs=["include", "vendor"],
    cxx_std=20,
)

setup(
    packages=["ptosis"],
    package_dir={"ptosis": "python/ptosis"},
    ext_modules=[ext],
    cmdclass={"build_ext": build_ext},
)
