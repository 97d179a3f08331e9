#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Setup declaration to install PcoPycker
"""

params = dict(
    name='PcoPycker',
    version='0.1.0',
    packages=['pcopycker'],
    package_data={'pcopycker': ['data/*.json', 'data/scenarios/*.json']},
    license='MIT',
    author='PcoPycker developers',
    description='Kernel density bandwidth selection by penalized comparison to overfitting',

    classifiers=[
        "Topic :: Scientific/Engineering :: Mathematics",
        "Development Status :: 3 - Alpha",
        "Environment :: Console",
        "License :: OSI Approved :: MIT License",
        "Natural Language :: English",
        "Operating System :: Unix",
        "Programming Language :: Python :: 3",
    ],

    python_requires='>=3.8',
    install_requires=[
        "numpy>=1.17",
        "scipy>=1.4",
        "pandas>=1.5",
    ],

    extras_require={
        'coverage': ["coverage"]
    }
)

with open("README.rst") as _desc:
    params["long_description"] = _desc.read()

try:
    from setuptools import setup
except ImportError:
    from distutils.core import setup

else:
    params['entry_points'] = {
        'console_scripts': [
            "pcopycker = pcopycker.main:main"
        ]
    }

setup(**params)
