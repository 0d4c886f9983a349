import os

import pkg_resources
from setuptools import find_packages, setup

setup(
    name="heightlab",
    py_modules=["heightlab"],
    version="0.0.1",
    description="Numerical checks of log-convex decay for e^{-tA}u0",
    author="",
    packages=find_packages(include=["heightlab", "heightlab.*"]),
    install_requires=[
        str(r)
        for r in pkg_resources.parse_requirements(
            open(os.path.join(os.path.dirname(__file__), "requirements.txt"))
        )
    ],
)
