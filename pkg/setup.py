#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

import setuptools
from fex.commons.settings import Settings

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setuptools.setup(
    name="fex",
    version=Settings.VERSION,
    author="fex contributors",
    description="Fast amortized feature attribution for black-box classifiers",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: POSIX :: Linux",
    ],
    python_requires='>=3.8',
    install_requires=[
        'numpy==1.24.4',
        'scipy==1.10.1',
        'python-dotenv==1.0.1',
    ],
    scripts=['bin/fex'],
    license_files=['LICENSES/Apache-2.0.txt',],
    zip_safe=False, # needed to make dotenv work
)
