from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="gst-lab",
    version="0.1.0",
    author="GST Lab",
    description="Ground-state-transformed jump processes: eigen-solver, thinning simulator and multifractal analysis",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.22.0",
        "scipy>=1.12.0",
        "rich",
    ],
    extras_require={
        "test": ["pytest>=7.0", "pytest-cov", "pytest-timeout"],
        "quality": ["ruff"],
    },
    entry_points={
        "console_scripts": [
            "gst-lab=gst_lab.core.runner:main",
        ],
    },
    keywords=[
        "levy process",
        "jump process",
        "fractional laplacian",
        "schrodinger operator",
        "ground state transform",
        "multifractal spectrum",
        "monte carlo",
    ],
)
