"""
Toric Geodesics
Setup configuration for pip installation
"""

from setuptools import setup, find_packages
from pathlib import Path

# Read README for long description
readme_file = Path(__file__).parent / "README.md"
long_description = readme_file.read_text(encoding="utf-8") if readme_file.exists() else ""

setup(
    name="toric-geodesics",
    version="1.0.0",
    description="Numerical workbench for geodesic rays and singularity types of toric potentials",
    long_description=long_description,
    long_description_content_type="text/markdown",
    author="FDU OS Course Group",
    author_email="",
    license="MIT",

    packages=find_packages(exclude=("tests", "tests.*")),
    py_modules=["toric_cli"],
    include_package_data=True,
    package_data={
        'src': ['toric_defaults.yaml'],
    },

    python_requires=">=3.10",

    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "pyyaml>=6.0",
    ],

    extras_require={
        "dev": [
            "pytest>=8.0",
            "pytest-asyncio>=0.23.0",
            "pytest-benchmark>=4.0.0",
            "pytest-cov>=4.1.0",
            "black>=24.0.0",
            "mypy>=1.0.0",
            "ruff>=0.1.0",
        ],
    },

    entry_points={
        "console_scripts": [
            "toric=toric_cli:main",
        ],
    },

    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Intended Audience :: Education",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],

    keywords="toric pluripotential monge-ampere geodesic-rays legendre-transform",
)
