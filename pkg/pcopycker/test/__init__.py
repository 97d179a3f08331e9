"""
Tests for PcoPycker

Long Monte Carlo suites only run when PCOPYCKER_ACCEPTANCE=1 is set in the environment.
"""

import io
import os

import numpy as np


__author__ = "PcoPycker developers"


NUMBER_OF_PROCESS = 4
TEST_SAMPLES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "test_samples")
ACCEPTANCE = os.environ.get("PCOPYCKER_ACCEPTANCE") == "1"


def sample_path(name: str) -> str:
    """ path of a file of the test samples directory """
    return os.path.join(TEST_SAMPLES, name)


def normal_sample(n: int, dimension: int = 1, seed: int = 0) -> np.ndarray:
    """ n standard normal observations, shape (n, dimension) """
    return np.random.default_rng(seed).standard_normal((n, dimension))


def run_program(*argv) -> tuple:
    """
    Runs the command line program without exiting

    :param argv: command line arguments
    :return: exit status, text printed on stdout
    """
    from pcopycker.main import PcoProgram

    output = io.StringIO()
    program = PcoProgram(list(argv), exit=False, stdout=output)
    return program.status, output.getvalue()
