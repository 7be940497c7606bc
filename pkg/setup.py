"""
setup.py - a module to allow package installation
"""

from setuptools import find_packages, setup


NAME = "clmm"
VERSION = "0.1alpha"
DEPENDENCIES = [
    "autograd",
    "filelock",
    "h5py",
    "numpy",
    "pandas",
    "scikit-learn",
    "scipy",
]
DESCRIPTION = ("a package for two-stage contrastive learning on "
               "multimodal activity recognition data")
ENTRY_POINTS = {
    "console_scripts": ["clmm=clmm.cli:main"],
}
TEST_DEPENDENCIES = [
    "pytest",
]

setup(description=DESCRIPTION,
      entry_points=ENTRY_POINTS,
      extras_require={"test": TEST_DEPENDENCIES},
      install_requires=DEPENDENCIES,
      name=NAME,
      packages=find_packages(exclude=("tests",)),
      version=VERSION,
)
