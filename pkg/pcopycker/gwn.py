"""
Ordered variable selection in the gaussian sequence model

Observations ξ_j = θ_j + ε z_j, j = 1 ... N, are projected on the first D coordinates and D is chosen by minimizing
crit(D) = -Σ_{j≤D} ξ_j² + λ D ε². Below λ = 1 the criterion selects huge dimensions, above it behaves like an
oracle.
"""

import functools
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from pcopycker.exceptions import InvalidArgument
from pcopycker.risklab import replication_rng


__author__ = "PcoPycker developers"

logger = logging.getLogger(__name__)

#: risk identity checks need at least that many replications
MIN_IDENTITY_REPS = 50
#: tolerance of the risk identity, in standard errors
IDENTITY_ERRORS = 4.0


@dataclass(frozen=True)
class SequenceModel:
    """
    :param theta: coefficients θ_1 ... θ_N of the target
    :param epsilon: noise level ε = 1/√n
    """
    theta: tuple
    epsilon: float

    def __post_init__(self):
        theta = tuple(float(value) for value in np.atleast_1d(np.asarray(self.theta, dtype=float)))
        if len(theta) < 1:
            raise InvalidArgument("A sequence model needs N >= 1 coefficients")
        if not all(math.isfinite(value) for value in theta):
            raise InvalidArgument("Coefficients must be finite")
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise InvalidArgument("Noise level must be positive and finite, got {}".format(self.epsilon))
        object.__setattr__(self, "theta", theta)

    @property
    def N(self) -> int:
        return len(self.theta)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array(self.theta)

    @classmethod
    def from_profile(cls, profile: str, N: int, n: int) -> "SequenceModel":
        """
        Builds a model from a coefficient profile

        :param profile: "zero" for θ = 0 or "power:<a>" for θ_j = j^(-a)
        :param N: number of coefficients
        :param n: sample size, ε = 1/√n
        """
        if int(N) != N or N < 1:
            raise InvalidArgument("N must be a positive integer, got {}".format(N))
        if not n > 0:
            raise InvalidArgument("n must be positive, got {}".format(n))
        kind, _, argument = profile.partition(":")
        if kind == "zero" and not argument:
            theta = np.zeros(int(N))
        elif kind == "power":
            try:
                exponent = float(argument)
            except ValueError:
                raise InvalidArgument("Invalid exponent in profile {!r}".format(profile)) from None
            theta = np.arange(1, int(N) + 1, dtype=float) ** -exponent
        else:
            raise InvalidArgument("Unknown coefficient profile {!r}, expected zero or power:<a>".format(profile))
        return cls(tuple(theta), 1 / math.sqrt(n))

    def tail(self, D: int) -> float:
        """ Σ_{j>D} θ_j², the squared distance of the target to the first D coordinates """
        return float(np.sum(self.coefficients[D:] ** 2))

    def expected_risk(self, D: int) -> float:
        """ E‖f̂_D - f‖² = Σ_{j>D} θ_j² + D ε² """
        return self.tail(D) + D * self.epsilon ** 2

    def observe(self, rng: np.random.Generator) -> np.ndarray:
        return self.coefficients + self.epsilon * rng.standard_normal(self.N)


@dataclass
class SequenceRun:
    """
    One realization of the model and its selection

    :param xi: observations ξ_1 ... ξ_N
    :param criterion: crit(D) for D = 1 ... N
    :param selected: selected dimension D̂
    :param risk: realized risk ‖f̂_D̂ - f‖²
    :param lambda_: penalty constant
    """
    xi: np.ndarray
    criterion: np.ndarray
    selected: int
    risk: float
    lambda_: float


def criterion(model: SequenceModel, xi: np.ndarray, lambda_: float) -> np.ndarray:
    """ crit(D) = -Σ_{j≤D} ξ_j² + λ D ε² for D = 1 ... N """
    dimensions = np.arange(1, model.N + 1)
    return -np.cumsum(xi ** 2) + lambda_ * dimensions * model.epsilon ** 2


def realized_risk(model: SequenceModel, xi: np.ndarray, D: int) -> float:
    """ Σ_{j≤D} (ξ_j - θ_j)² + Σ_{j>D} θ_j² """
    return float(np.sum((xi[:D] - model.coefficients[:D]) ** 2)) + model.tail(D)


def select(model: SequenceModel, xi: np.ndarray, lambda_: float) -> SequenceRun:
    """ the argmin of the criterion, ties toward the smallest dimension """
    if not math.isfinite(lambda_):
        raise InvalidArgument("λ must be finite, got {}".format(lambda_))
    values = criterion(model, xi, lambda_)
    selected = int(np.argmin(values)) + 1
    return SequenceRun(xi, values, selected, realized_risk(model, xi, selected), lambda_)


def run_once(model: SequenceModel, lambda_: float, seed: int, replication: int = 0) -> SequenceRun:
    """
    Draws the observations and selects the dimension

    :param model: the sequence model
    :param lambda_: penalty constant λ of pen(D) = λ D ε²
    :param seed: master seed
    :param replication: replication index, the stream is derived from (seed, replication)
    """
    return select(model, model.observe(replication_rng(seed, replication)), lambda_)


def _identity_replication(model: SequenceModel, D: int, seed: int, replication: int) -> float:
    return realized_risk(model, model.observe(replication_rng(seed, replication)), D)


def risk_identity(model: SequenceModel, D: int, reps: int, seed: int, runner=None) -> tuple:
    """
    Monte Carlo mean of the realized risk of the projection on the first D coordinates

    :return: tuple (mean, standard error, expected risk)
    """
    if int(D) != D or not 1 <= D <= model.N:
        raise InvalidArgument("D must be an integer in [1, {}], got {}".format(model.N, D))
    if int(reps) != reps or reps < MIN_IDENTITY_REPS:
        raise InvalidArgument("The risk identity needs at least {} replications, got {}".format(
            MIN_IDENTITY_REPS, reps))
    tasks = [functools.partial(_identity_replication, model, int(D), seed, replication)
             for replication in range(int(reps))]
    risks = np.array(runner.run(tasks) if runner is not None else [task() for task in tasks])
    return float(risks.mean()), float(risks.std(ddof=1) / math.sqrt(len(risks))), model.expected_risk(int(D))


def risk_identity_check(model: SequenceModel, D: int, reps: int, seed: int, runner=None) -> bool:
    """ whether the mean realized risk is within 4 standard errors of Σ_{j>D} θ_j² + D ε² """
    mean, error, expected = risk_identity(model, D, reps, seed, runner)
    logger.info("risk identity at D=%d: mean %g, expected %g, standard error %g", D, mean, expected, error)
    return abs(mean - expected) <= IDENTITY_ERRORS * error


def _phase_replication(model: SequenceModel, lambdas: tuple, seed: int, replication: int) -> np.ndarray:
    xi = model.observe(replication_rng(seed, replication))
    runs = [select(model, xi, value) for value in lambdas]
    return np.array([[run.selected, run.risk] for run in runs])


def phase_diagram(model: SequenceModel, lambdas, reps: int, seed: int, runner=None) -> pd.DataFrame:
    """
    Mean selected dimension and mean risk for every λ, every λ seeing the same noise realizations

    :return: frame with columns lambda, mean_selected, se_selected, mean_risk, se_risk, overfit_frequency
             (frequency of D̂ ≥ (1 - λ)N/2, for λ < 1 only)
    """
    lambdas = tuple(float(value) for value in lambdas)
    if not lambdas:
        raise InvalidArgument("A phase diagram needs at least one λ")
    if int(reps) != reps or reps < 2:
        raise InvalidArgument("A phase diagram needs at least 2 replications, got {}".format(reps))
    tasks = [functools.partial(_phase_replication, model, lambdas, seed, replication)
             for replication in range(int(reps))]
    outcomes = np.array(runner.run(tasks) if runner is not None else [task() for task in tasks])
    selected, risks = outcomes[:, :, 0], outcomes[:, :, 1]
    bounds = np.array([(1 - value) * model.N / 2 for value in lambdas])
    overfit = np.where(np.array(lambdas) < 1, (selected >= bounds[None, :]).mean(axis=0), np.nan)
    root = math.sqrt(int(reps))
    return pd.DataFrame({
        "lambda": lambdas,
        "mean_selected": selected.mean(axis=0),
        "se_selected": selected.std(axis=0, ddof=1) / root,
        "mean_risk": risks.mean(axis=0),
        "se_risk": risks.std(axis=0, ddof=1) / root,
        "overfit_frequency": overfit,
    })
