# -*- coding: utf-8 -*-
"""sliced-cnp setup script."""

from pathlib import Path

from setuptools import find_packages, setup

# The directory containing this file
PKG_ROOT = Path(__file__).parent

# Read package constants
README = (PKG_ROOT / "README.rst").read_text()
VERSION = ((PKG_ROOT / "sliced_cnp" / "version.py")
           .read_text().split(" = ")[1].strip().replace("\"", ""))
REQUIREMENTS = (PKG_ROOT / "requirements.txt").read_text().splitlines()

setup(
    name="sliced_cnp",
    version=VERSION,
    description="conditional neural processes trained with sliced "
                "Wasserstein distances",
    long_description=README,
    long_description_content_type="text/x-rst",
    license="LGPL-2.1",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: GNU Lesser General Public License v2 or later (LGPLv2+)",
        "Natural Language :: English",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3.7",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: Implementation :: CPython",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "Typing :: Typed",
    ],
    packages=find_packages(exclude=("tests",)),
    include_package_data=True,
    python_requires=">=3.7",
    install_requires=REQUIREMENTS,
    entry_points={
        "console_scripts": ["sliced-cnp=sliced_cnp.cli:main"],
    },
)
