from os import path
from pathlib import Path

from setuptools import setup, find_packages

basedir = Path(path.dirname(path.abspath(__file__)))

with basedir.joinpath("README.md").open("r", encoding="utf-8") as f:
    README = f.read()

setup(
    name="partsketch",
    version="0.1.0",
    description="Partition based randomized matrix multiplication with error analysis",
    long_description=README,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=["aiofiles", "attrs", "numpy>=1.17", "scipy"],
    extras_require={"speed": ["ujson>=2.0"]},
    entry_points={"console_scripts": ["partsketch=partsketch.cli:main"]},
    include_package_data=True,
    zip_safe=False,
    license="Apache",
    keywords="randomized linear algebra sketching matrix multiplication",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: Apache Software License",
        "Programming Language :: Python :: 3.8",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
)
