"""
Run configuration: command line flags, JSON overrides and the parsers of the compact string formats
"""

import dataclasses
import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from pcopycker.exceptions import ConfigurationError, InvalidArgument
from pcopycker.kernels import kernel_from_id
from pcopycker.pco import BandwidthGrid


__author__ = "PcoPycker developers"

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("select", "calibrate", "simulate", "gwn-demo")
SELECT_METHODS = ("pco", "lepski", "gl", "lscv")
EXPERIMENTS = ("oracle", "minimal_penalty", "rate", "calibration")
#: λ values of gwn-demo when none are given
GWN_LAMBDAS = tuple(np.round(np.linspace(0.25, 3.0, 12), 12).tolist())

_ALIASES = {"lambda": "lambda_", "lambda_grid": "lambdas", "lambda-grid": "lambdas", "n-list": "n_list"}


@dataclass
class RunConfig:
    """
    Every option of a run

    Scenario files given with --config use the same keys ("lambda" for lambda_, "lambda_grid" for lambdas).
    """
    subcommand: str
    input: str = None
    out: str = "."
    kernel: str = "gaussian"
    grid: str = "auto"
    lambda_: float = 1.0
    lambdas: tuple = None
    method: str = "pco"
    kappa1: float = 1.2
    seed: int = None
    threads: int = 1
    experiment: str = "oracle"
    density: object = "standard_normal"
    dimension: int = 1
    n: int = None
    n_list: tuple = None
    methods: tuple = ("pco:1",)
    reps: int = 100
    order: int = 4
    N: int = 500
    theta: str = "zero"
    verbosity: int = 0

    @classmethod
    def field_names(cls) -> set:
        return {item.name for item in dataclasses.fields(cls)}

    def override(self, values: dict) -> "RunConfig":
        """
        A copy with the given keys replaced

        :param values: mapping of option names to values
        :raise ConfigurationError: on unknown keys
        """
        changes = {}
        for key, value in values.items():
            name = _ALIASES.get(key, key)
            if name not in self.field_names():
                raise ConfigurationError("Unknown configuration key {!r}".format(key))
            if name in ("lambdas", "n_list", "methods") and isinstance(value, str):
                value = parse_list(value, float if name == "lambdas" else (int if name == "n_list" else str))
            if isinstance(value, list):
                value = tuple(value)
            changes[name] = value
        return dataclasses.replace(self, **changes)

    def validate(self) -> "RunConfig":
        """
        Checks the options needed by the subcommand

        :raise ConfigurationError: on the first invalid option
        """
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigurationError("Unknown subcommand {!r}, expected one of {}".format(
                self.subcommand, ", ".join(SUBCOMMANDS)))
        if not isinstance(self.threads, int) or self.threads < 1:
            raise ConfigurationError("threads must be a positive integer, got {!r}".format(self.threads))
        if self.subcommand in ("simulate", "gwn-demo") and self.seed is None:
            raise ConfigurationError("{} needs an explicit --seed".format(self.subcommand))
        if self.seed is not None and (not isinstance(self.seed, int) or self.seed < 0):
            raise ConfigurationError("seed must be a nonnegative integer, got {!r}".format(self.seed))
        if self.subcommand in ("select", "calibrate") and not self.input:
            raise ConfigurationError("{} needs an input CSV file".format(self.subcommand))
        if self.subcommand == "select" and self.method not in SELECT_METHODS:
            raise ConfigurationError("Unknown method {!r}, expected one of {}".format(
                self.method, ", ".join(SELECT_METHODS)))
        if self.subcommand == "simulate" and self.experiment not in EXPERIMENTS:
            raise ConfigurationError("Unknown experiment {!r}, expected one of {}".format(
                self.experiment, ", ".join(EXPERIMENTS)))
        if not isinstance(self.lambda_, (int, float)) or not math.isfinite(self.lambda_):
            raise ConfigurationError("lambda must be a finite number, got {!r}".format(self.lambda_))
        if not isinstance(self.reps, int) or self.reps < 1:
            raise ConfigurationError("reps must be a positive integer, got {!r}".format(self.reps))
        if not self.out:
            raise ConfigurationError("The output directory cannot be empty")
        return self


def load_config(path: str) -> dict:
    """
    Reads a JSON configuration file

    :raise ConfigurationError: if the file is not a JSON object
    """
    try:
        with open(path) as config_file:
            values = json.load(config_file)
    except json.JSONDecodeError as exc:
        raise ConfigurationError("Invalid JSON in {}: {}".format(path, exc)) from None
    if not isinstance(values, dict):
        raise ConfigurationError("{} must hold a JSON object".format(path))
    return values


def parse_list(text: str, kind=float) -> tuple:
    """
    Parses "a,b,c" or, for floats, "start:stop:count" (count equispaced values)
    """
    text = str(text).strip()
    try:
        if kind is float and text.count(":") == 2:
            start, stop, count = text.split(":")
            if int(count) < 1:
                raise ValueError("count must be positive")
            return tuple(np.round(np.linspace(float(start), float(stop), int(count)), 12).tolist())
        return tuple(kind(item.strip()) for item in text.split(",") if item.strip())
    except ValueError as exc:
        raise ConfigurationError("Cannot parse {!r}: {}".format(text, exc)) from None


def parse_kernel(identifier: str):
    """ kernel from "gaussian", "epanechnikov" or "order:<l>:<base>" """
    try:
        return kernel_from_id(identifier)
    except InvalidArgument as exc:
        raise ConfigurationError(str(exc)) from None


def parse_grid(spec: str, kernel, n: int, dimension: int = 1) -> BandwidthGrid:
    """
    Builds a grid from "auto", "inverse[:<kmax>]" or "geometric:<hmin>:<hmax>:<count>"

    Geometric specs take one ";"-separated entry per axis, a single entry is used on every axis.

    :param spec: the grid specification
    :param kernel: kernel of the run
    :param n: sample size
    :param dimension: number of axes
    """
    spec = str(spec).strip()
    if spec == "auto":
        return BandwidthGrid.default(kernel, n, dimension)
    if spec == "inverse" or spec.startswith("inverse:"):
        _, _, kmax = spec.partition(":")
        try:
            return BandwidthGrid.inverse_integer(kernel, n, dimension, int(kmax) if kmax else None)
        except ValueError as exc:
            raise ConfigurationError("Invalid grid {!r}: {}".format(spec, exc)) from None

    axes = [part.strip() for part in spec.split(";")]
    if len(axes) == 1:
        axes = axes * dimension
    if len(axes) != dimension:
        raise ConfigurationError("Grid {!r} has {} axes, the data has {}".format(spec, len(axes), dimension))
    bounds = []
    for axis in axes:
        parts = axis.split(":")
        if len(parts) != 4 or parts[0] != "geometric":
            raise ConfigurationError("Invalid grid {!r}, expected auto, inverse[:<kmax>] or "
                                     "geometric:<hmin>:<hmax>:<count>".format(axis))
        try:
            low, high, count = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError:
            raise ConfigurationError("Invalid numbers in grid {!r}".format(axis)) from None
        if count < 1:
            raise ConfigurationError("Grid count must be at least 1 in {!r}".format(axis))
        if not 0 < low <= high:
            raise ConfigurationError("Grid bounds must satisfy 0 < hmin <= hmax in {!r}".format(axis))
        bounds.append((low, high, count))
    lows, highs, counts = zip(*bounds)
    return BandwidthGrid.geometric(lows, highs, counts, n=n, kernel=kernel)
