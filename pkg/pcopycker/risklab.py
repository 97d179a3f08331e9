"""
Monte Carlo laboratory

Seeded experiments on the registered test densities: integrated squared errors, grid oracles, oracle ratios of every
selector, convergence rates and the frequency of overfitting below the minimal penalty. Replication r draws from its
own stream, derived from (seed, r), so replications can run in any order and on any number of processes.
"""

import functools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from pcopycker import kde
from pcopycker.baselines import BaselineMethod, BaselineSpec, DEFAULT_KAPPA, baseline_select
from pcopycker.calibration import DEFAULT_LAMBDAS, calibrated_spec, scan_lambda
from pcopycker.densities import Density, NormalFactor
from pcopycker.exceptions import CoverageError, InvalidArgument
from pcopycker.kde import DensityEstimate, Sample
from pcopycker.kernels import Bandwidth, as_product_kernel, build_order_l_kernel, kernel_from_id
from pcopycker.pco import BandwidthGrid, ComparisonProfile, PairwiseSums, PenaltyMode, PenaltySpec


__author__ = "PcoPycker developers"

logger = logging.getLogger(__name__)

#: oracle experiments need at least that many replications
MIN_ORACLE_REPS = 50
#: largest probability mass allowed outside an ISE grid
COVERAGE_TOLERANCE = 1e-3
#: normal factors are considered negligible beyond this many standard deviations
NORMAL_SUPPORT = 10.0
QUANTILES = (0.1, 0.25, 0.75, 0.9)


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    """
    Random generator of one replication, a counter-derived child of the master seed

    :param seed: master seed
    :param replication: replication index
    """
    if seed is None:
        raise InvalidArgument("Experiments need an explicit seed")
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(replication),)))


def oracle_constant(lambda_: float, epsilon: float) -> float:
    """
    Leading constant of the oracle inequality: λ + ε for λ ≥ 1, 1/λ + ε for 0 < λ < 1
    """
    if not lambda_ > 0:
        raise InvalidArgument("The oracle inequality needs λ > 0, got {}".format(lambda_))
    if not epsilon >= 0:
        raise InvalidArgument("ε must be nonnegative, got {}".format(epsilon))
    return (lambda_ if lambda_ >= 1 else 1 / lambda_) + epsilon


def minimal_penalty_constant(lambda_: float) -> float:
    """
    C(λ) = 2.1 - 1/λ, the overfitting bound ĥ ≤ C(λ) h_min below the minimal penalty
    """
    if not lambda_ < 0:
        raise InvalidArgument("The overfitting bound holds for λ < 0, got {}".format(lambda_))
    return 2.1 - 1 / lambda_


def support_box(f: Density, margin=0.0):
    """
    Box holding all but a negligible part of the mass of f, widened by margin on every axis

    :return: tuple (lows, highs) of per-axis arrays
    """
    lows = np.full(f.dimension, np.inf)
    highs = np.full(f.dimension, -np.inf)
    for factors in f.components:
        for axis, factor in enumerate(factors):
            if isinstance(factor, NormalFactor):
                low, high = factor.mean - NORMAL_SUPPORT * factor.sd, factor.mean + NORMAL_SUPPORT * factor.sd
            else:
                low, high = factor.low, factor.high
            lows[axis] = min(lows[axis], low)
            highs[axis] = max(highs[axis], high)
    margin = np.broadcast_to(np.asarray(margin, dtype=float), (f.dimension,))
    return lows - margin, highs + margin


def ise(estimate: DensityEstimate, f: Density) -> float:
    """
    ‖f̂_h - f‖² by quadrature on the estimate's grid

    :raise CoverageError: when more than 1e-3 of the mass of f lies outside the grid
    """
    lows = [axis[0] for axis in estimate.axes]
    highs = [axis[-1] for axis in estimate.axes]
    outside = 1.0 - f.mass_in_box(lows, highs)
    if outside > COVERAGE_TOLERANCE:
        raise CoverageError("The evaluation grid misses {:.3g} of the mass of {}".format(outside, f.identifier))
    truth = f.pdf(estimate.points).reshape(estimate.values.shape)
    return estimate.integrate((estimate.values - truth) ** 2)


def exact_ise(sums: PairwiseSums, f: Density, h) -> float:
    """
    ‖f̂_h - f‖² = ‖f̂_h‖² - 2 mean_i f_h(X_i) + ‖f‖², from the pair sums and the smoothed density

    :param sums: pair sums of the sample
    :param f: the density the sample was drawn from
    :param h: bandwidth
    """
    h = Bandwidth.of(h)
    smoothed = f.smoothed(sums.kernel.kernel, h.as_array(), sums.sample.observations)
    value = sums.convolution_sum(h, h) - 2 * float(np.mean(smoothed)) + f.l2_norm_sq
    return max(value, 0.0)


@dataclass(frozen=True)
class ExperimentMethod:
    """
    A selector of an experiment: "pco:<λ>", "pco" (λ = 1), "pco:calibrated", "lepski", "gl" or "lscv"

    :param identifier: the method identifier
    :param kappa1: constant of the baselines
    """
    identifier: str
    kappa1: float = DEFAULT_KAPPA

    def __post_init__(self):
        kind, _, argument = self.identifier.partition(":")
        if kind == "pco":
            if argument and argument != "calibrated":
                try:
                    value = float(argument)
                except ValueError:
                    raise InvalidArgument("Invalid λ in method {!r}".format(self.identifier)) from None
                if not math.isfinite(value):
                    raise InvalidArgument("Invalid λ in method {!r}".format(self.identifier))
        elif kind not in {method.value for method in BaselineMethod} or argument:
            raise InvalidArgument("Unknown method {!r}, expected pco[:<λ>|:calibrated], lepski, gl or lscv".format(
                self.identifier))

    @property
    def calibrated(self) -> bool:
        return self.identifier == "pco:calibrated"

    @property
    def lambda_(self):
        """ λ of a fixed-λ pco method, None otherwise """
        kind, _, argument = self.identifier.partition(":")
        if kind != "pco" or self.calibrated:
            return None
        return float(argument) if argument else 1.0

    def select(self, profile: ComparisonProfile, lambdas=DEFAULT_LAMBDAS):
        """
        :return: tuple (selected bandwidth, λ used or None, whether a calibration failed)
        """
        if self.calibrated:
            spec, _, calibrated = calibrated_spec(profile, lambdas)
            return profile.table(spec).selected, spec.lambda_, not calibrated
        if self.lambda_ is not None:
            return profile.table(PenaltySpec(self.lambda_, PenaltyMode.family)).selected, self.lambda_, False
        spec = BaselineSpec(BaselineMethod(self.identifier), kappa1=self.kappa1)
        return baseline_select(spec, profile.sample, profile.kernel, profile.grid, profile.sums), None, False


@dataclass(frozen=True)
class Scenario:
    """
    Everything a replication needs, shipped as is to worker processes

    :param density: the target
    :param kernel: the product kernel
    :param n: sample size
    :param grid: candidate bandwidths
    :param seed: master seed
    :param methods: the selectors to run
    :param lambdas: λ scan of calibrated methods
    """
    density: Density
    kernel: object
    n: int
    grid: BandwidthGrid
    seed: int
    methods: tuple = ()
    lambdas: tuple = DEFAULT_LAMBDAS

    def draw(self, replication: int) -> Sample:
        return Sample(self.density.sample(self.n, replication_rng(self.seed, replication)))


@dataclass
class Replication:
    """ outcome of one replication of an oracle experiment """
    index: int
    ise: np.ndarray
    selections: dict
    lambdas: dict
    failures: dict


def _replicate(scenario: Scenario, replication: int) -> Replication:
    sample = scenario.draw(replication)
    sums = PairwiseSums(sample, scenario.kernel)
    profile = ComparisonProfile(sample, scenario.kernel, scenario.grid, sums=sums)
    errors = np.array([exact_ise(sums, scenario.density, h) for h in scenario.grid])
    selections, lambdas, failures = {}, {}, {}
    for method in scenario.methods:
        selected, lambda_, failed = method.select(profile, scenario.lambdas)
        selections[method.identifier] = scenario.grid.index(selected)
        lambdas[method.identifier] = lambda_
        failures[method.identifier] = failed
    logger.debug("replication %d done", replication)
    return Replication(replication, errors, selections, lambdas, failures)


def _run(function, scenario: Scenario, reps: int, runner=None) -> list:
    tasks = [functools.partial(function, scenario, replication) for replication in range(reps)]
    if runner is None:
        outcomes = []
        for task in tasks:
            outcomes.append(task())
            if len(outcomes) % 10 == 0:
                logger.info("%d/%d replications done", len(outcomes), reps)
        return outcomes
    return runner.run(tasks)


@dataclass
class RiskReport:
    """
    ISE statistics of an oracle experiment

    :param density: identifier of the target
    :param n: sample size
    :param grid: candidate bandwidths
    :param methods: method identifiers, in run order
    :param ise: ISE per replication and grid bandwidth, shape (reps, |H|)
    :param selections: per method, selected grid index per replication
    :param lambdas: per method, λ used per replication (NaN for baselines)
    :param failures: per method, number of replications where calibration found no jump
    """
    density: str
    n: int
    grid: BandwidthGrid
    methods: tuple
    ise: np.ndarray
    selections: dict
    lambdas: dict
    failures: dict = field(default_factory=dict)

    @property
    def reps(self) -> int:
        return self.ise.shape[0]

    @property
    def mean_ise(self) -> np.ndarray:
        return self.ise.mean(axis=0)

    @property
    def oracle_index(self) -> int:
        """ grid index minimizing the mean ISE """
        return int(np.argmin(self.mean_ise))

    @property
    def oracle_bandwidth(self) -> Bandwidth:
        return self.grid[self.oracle_index]

    def method_ise(self, method: str) -> np.ndarray:
        """ ISE of the selected estimator per replication """
        return self.ise[np.arange(self.reps), self.selections[method]]

    def oracle_ratios(self, method: str) -> np.ndarray:
        """ per replication, ISE at the selected bandwidth over the smallest ISE of the grid """
        best = self.ise.min(axis=1)
        selected = self.method_ise(method)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(best > 0, selected / best, 1.0)

    def summary(self, epsilon: float = 0.1) -> dict:
        """
        Per-method statistics, with the leading constant C₀(ε) of the oracle inequality for pco methods
        """
        methods = {}
        for method in self.methods:
            errors = self.method_ise(method)
            ratios = self.oracle_ratios(method)
            entry = {
                "mean_ise": float(errors.mean()),
                "median_ise": float(np.median(errors)),
                "median_oracle_ratio": float(np.median(ratios)),
                "mean_oracle_ratio": float(ratios.mean()),
                "ratio_to_mean_ise_oracle": float(errors.mean() / self.mean_ise[self.oracle_index]),
                "calibration_failures": int(self.failures.get(method, 0)),
            }
            lambda_ = ExperimentMethod(method).lambda_
            if lambda_ is not None and lambda_ > 0:
                entry["oracle_constant"] = oracle_constant(lambda_, epsilon)
            methods[method] = entry
        return {
            "density": self.density,
            "n": self.n,
            "reps": self.reps,
            "oracle_bandwidth": list(self.oracle_bandwidth.components),
            "oracle_mean_ise": float(self.mean_ise[self.oracle_index]),
            "methods": methods,
        }

    def bandwidth_frame(self) -> pd.DataFrame:
        """ ISE statistics per grid bandwidth """
        frame = _bandwidth_columns(self.grid.bandwidths)
        frame["mean"] = self.mean_ise
        frame["median"] = np.median(self.ise, axis=0)
        for quantile in QUANTILES:
            frame["q{:g}".format(quantile)] = np.quantile(self.ise, quantile, axis=0)
        return frame

    def long_frame(self) -> pd.DataFrame:
        """ one row per method and replication: method, lambda, h1..hd, rep, ise """
        frames = []
        for method in self.methods:
            selected = [self.grid[index] for index in self.selections[method]]
            frame = pd.DataFrame({"method": method, "lambda": self.lambdas[method]})
            frame = pd.concat([frame, _bandwidth_columns(selected)], axis=1)
            frame["rep"] = np.arange(self.reps)
            frame["ise"] = self.method_ise(method)
            frames.append(frame)
        return pd.concat(frames, ignore_index=True)


def _bandwidth_columns(bandwidths) -> pd.DataFrame:
    dimension = bandwidths[0].dimension
    return pd.DataFrame({"h{}".format(axis + 1): [h.components[axis] for h in bandwidths]
                         for axis in range(dimension)})


def _kernel(K, dimension: int):
    return as_product_kernel(kernel_from_id(K) if isinstance(K, str) else K, dimension)


def oracle_experiment(f: Density, n: int, grid: BandwidthGrid, methods, reps: int, seed: int, K="gaussian",
                      runner=None, lambdas=DEFAULT_LAMBDAS, kappa1: float = DEFAULT_KAPPA) -> RiskReport:
    """
    Runs every method on reps seeded samples and scores them against the grid oracle

    :param f: target density
    :param n: sample size
    :param grid: candidate bandwidths
    :param methods: method identifiers, see :class:`ExperimentMethod`
    :param reps: number of replications, at least 50
    :param seed: master seed
    :param K: kernel or kernel identifier
    :param runner: optional parallel runner, replications are spread over its processes
    :param lambdas: λ scan of calibrated methods
    :param kappa1: constant of the baselines
    """
    if int(reps) != reps or reps < MIN_ORACLE_REPS:
        raise InvalidArgument("An oracle experiment needs at least {} replications, got {}".format(
            MIN_ORACLE_REPS, reps))
    methods = tuple(ExperimentMethod(method, kappa1) if isinstance(method, str) else method for method in methods)
    if not methods:
        raise InvalidArgument("An oracle experiment needs at least one method")
    kernel = _kernel(K, f.dimension)
    scenario = Scenario(f, kernel, int(n), grid, seed, methods, tuple(lambdas))
    logger.info("oracle experiment on %s, n=%d, %d replications", f.identifier, n, reps)
    outcomes = sorted(_run(_replicate, scenario, int(reps), runner), key=lambda outcome: outcome.index)

    identifiers = tuple(method.identifier for method in methods)
    return RiskReport(
        f.identifier, int(n), grid, identifiers,
        np.array([outcome.ise for outcome in outcomes]),
        {method: np.array([outcome.selections[method] for outcome in outcomes]) for method in identifiers},
        {method: np.array([np.nan if outcome.lambdas[method] is None else outcome.lambdas[method]
                           for outcome in outcomes]) for method in identifiers},
        {method: sum(outcome.failures[method] for outcome in outcomes) for method in identifiers},
    )


def _selected_volumes(scenario: Scenario, replication: int) -> np.ndarray:
    profile = ComparisonProfile(scenario.draw(replication), scenario.kernel, scenario.grid)
    return np.array([profile.table(PenaltySpec(value, PenaltyMode.family)).selected.volume
                     for value in scenario.lambdas])


def selected_volumes(f: Density, n: int, grid: BandwidthGrid, lambdas, reps: int, seed: int, K="gaussian",
                     runner=None) -> np.ndarray:
    """
    Volume of the PCO selection for every replication and λ

    :return: array of shape (reps, len(lambdas))
    """
    if int(reps) != reps or reps < 1:
        raise InvalidArgument("At least one replication is needed, got {}".format(reps))
    lambdas = tuple(float(value) for value in lambdas)
    if not lambdas:
        raise InvalidArgument("At least one λ is needed")
    scenario = Scenario(f, _kernel(K, f.dimension), int(n), grid, seed, lambdas=lambdas)
    return np.array(_run(_selected_volumes, scenario, int(reps), runner))


def minimal_penalty_experiment(f: Density, n: int, grid: BandwidthGrid, lambdas, reps: int, seed: int,
                               K="gaussian", runner=None) -> pd.DataFrame:
    """
    Frequency of {selected volume ≤ C(λ) h_min volume} for negative λ, C(λ) = 2.1 - 1/λ

    :return: frame with columns lambda, bound, frequency, reps
    """
    lambdas = tuple(float(value) for value in lambdas)
    if not lambdas or any(not value < 0 for value in lambdas):
        raise InvalidArgument("The minimal penalty experiment needs negative λ values only, got {}".format(lambdas))
    volumes = selected_volumes(f, n, grid, lambdas, reps, seed, K, runner)
    bounds = np.array([minimal_penalty_constant(value) for value in lambdas])
    frequency = (volumes <= bounds[None, :] * grid.hmin.volume).mean(axis=0)
    return pd.DataFrame({"lambda": lambdas, "bound": bounds, "frequency": frequency, "reps": int(reps)})


def _calibrate(scenario: Scenario, replication: int) -> tuple:
    trace = scan_lambda(scenario.draw(replication), scenario.kernel, scenario.grid, scenario.lambdas)
    return trace.critical, trace.jump_ratio


def calibration_experiment(f: Density, n: int, grid: BandwidthGrid, reps: int, seed: int, K="gaussian",
                           lambdas=DEFAULT_LAMBDAS, interval=(-0.5, 0.5), runner=None) -> pd.DataFrame:
    """
    Detected critical λ per replication

    :return: frame with columns rep, critical_lambda (NaN without a jump), recommended_lambda, jump_ratio, in_interval
    """
    if int(reps) != reps or reps < 1:
        raise InvalidArgument("At least one replication is needed, got {}".format(reps))
    scenario = Scenario(f, _kernel(K, f.dimension), int(n), grid, seed, lambdas=tuple(lambdas))
    outcomes = _run(_calibrate, scenario, int(reps), runner)
    critical = np.array([np.nan if value is None else value for value, _ in outcomes])
    return pd.DataFrame({
        "rep": np.arange(int(reps)),
        "critical_lambda": critical,
        "recommended_lambda": critical + 1.0,
        "jump_ratio": [ratio for _, ratio in outcomes],
        "in_interval": (critical >= interval[0]) & (critical <= interval[1]),
    })


@dataclass
class RateReport:
    """
    Median ISE of the PCO selection against n and its log-log slope

    :param n_list: sample sizes
    :param median_ise: median ISE per sample size
    :param slope: least-squares slope of log(median ISE) against log(n)
    :param intercept: intercept of the same fit
    :param selected: median selected volume per sample size
    """
    n_list: tuple
    median_ise: np.ndarray
    slope: float
    intercept: float
    selected: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"n": list(self.n_list), "median_ise": self.median_ise,
                             "median_selected_volume": self.selected})


def _rate_replication(scenario: Scenario, replication: int) -> tuple:
    sample = scenario.draw(replication)
    sums = PairwiseSums(sample, scenario.kernel)
    spec = PenaltySpec(scenario.methods[0].lambda_, PenaltyMode.family)
    selected = ComparisonProfile(sample, scenario.kernel, scenario.grid, sums=sums).table(spec).selected
    return exact_ise(sums, scenario.density, selected), selected.volume


def rate_experiment(f: Density, order: int, n_list, reps: int, seed: int, base="gaussian", lambda_: float = 1.0,
                    count: int = 30, hmax: float = None, runner=None) -> RateReport:
    """
    Slope of log(median ISE) of the PCO selection against log(n)

    :param f: target density, with smoothness tags β_j
    :param order: kernel order ℓ, larger than every β_j
    :param n_list: geometric sequence of at least 4 sample sizes
    :param reps: replications per sample size
    :param seed: master seed, sample size k of the list uses seed + k
    :param base: base kernel of the order-ℓ construction
    :param lambda_: penalty constant
    :param count: grid points per axis
    :param hmax: largest bandwidth, twice the target scale by default
    :param runner: optional parallel runner
    """
    n_list = tuple(int(n) for n in n_list)
    if len(n_list) < 4:
        raise InvalidArgument("A rate experiment needs at least 4 sample sizes, got {}".format(len(n_list)))
    ratios = np.array(n_list[1:], dtype=float) / np.array(n_list[:-1], dtype=float)
    if np.any(ratios <= 1) or not np.allclose(ratios, ratios[0], rtol=1e-2):
        raise InvalidArgument("Sample sizes must form an increasing geometric sequence, got {}".format(n_list))
    if f.smoothness is None or not order > max(f.smoothness):
        raise InvalidArgument("Kernel order {} must exceed the smoothness {} of {}".format(
            order, f.smoothness, f.identifier))
    if int(reps) != reps or reps < 1:
        raise InvalidArgument("At least one replication is needed, got {}".format(reps))

    base_kernel = kernel_from_id(base) if isinstance(base, str) else base
    kernel = as_product_kernel(build_order_l_kernel(base_kernel, order), f.dimension)
    hmax = 2.0 * f.scale if hmax is None else hmax
    medians, volumes = [], []
    for position, n in enumerate(n_list):
        grid = BandwidthGrid.default(kernel, n, f.dimension, count=count, hmax=hmax)
        scenario = Scenario(f, kernel, n, grid, int(seed) + position, (ExperimentMethod("pco:{!r}".format(
            float(lambda_))),))
        outcomes = _run(_rate_replication, scenario, int(reps), runner)
        medians.append(float(np.median([error for error, _ in outcomes])))
        volumes.append(float(np.median([volume for _, volume in outcomes])))
        logger.info("n=%d: median ISE %g", n, medians[-1])

    slope, intercept = np.polyfit(np.log(n_list), np.log(medians), 1)
    return RateReport(n_list, np.array(medians), float(slope), float(intercept), np.array(volumes))


@dataclass
class BiasVariance:
    """
    Monte Carlo split of the mean ISE at a fixed bandwidth

    :param mean_ise: mean of ‖f̂_h - f‖²
    :param bias_sq: ‖f_h - f‖²
    :param mean_variance: mean of ‖f̂_h - f_h‖²
    :param standard_error: standard error of the per-replication gap ISE - variance - bias
    """
    mean_ise: float
    bias_sq: float
    mean_variance: float
    standard_error: float

    def consistent(self, errors: float = 3.0) -> bool:
        """ whether mean ISE = bias² + mean variance within that many standard errors """
        gap = abs(self.mean_ise - self.bias_sq - self.mean_variance)
        return gap <= errors * self.standard_error + 1e-12


def _bias_variance_replication(scenario: Scenario, replication: int) -> tuple:
    sample = scenario.draw(replication)
    h = scenario.grid.hmin
    lows, highs = support_box(scenario.density, scenario.kernel.kernel.integration_radius * h.as_array())
    axes, weights = kde.panel_axes(sample, scenario.kernel, [h], lows, highs, panels=256)
    estimate = kde.estimate(sample, scenario.kernel, h, axes=axes, weights=weights)
    points = estimate.points
    shape = estimate.values.shape
    truth = scenario.density.pdf(points).reshape(shape)
    smoothed = kde.population_smoothing(scenario.density, scenario.kernel, h, points).reshape(shape)
    return (estimate.integrate((estimate.values - truth) ** 2),
            estimate.integrate((estimate.values - smoothed) ** 2),
            estimate.integrate((smoothed - truth) ** 2))


def bias_variance(f: Density, K, h, n: int, reps: int, seed: int, runner=None) -> BiasVariance:
    """
    Mean ISE, squared bias and mean variance at a fixed bandwidth, all by grid quadrature

    :param f: target density
    :param K: kernel or kernel identifier
    :param h: bandwidth
    :param n: sample size
    :param reps: number of replications, at least 2
    :param seed: master seed
    :param runner: optional parallel runner
    """
    if int(reps) != reps or reps < 2:
        raise InvalidArgument("A bias-variance split needs at least 2 replications, got {}".format(reps))
    h = Bandwidth.of(h)
    scenario = Scenario(f, _kernel(K, f.dimension), int(n), BandwidthGrid([h]), seed)
    outcomes = np.array(_run(_bias_variance_replication, scenario, int(reps), runner))
    errors, variances, biases = outcomes[:, 0], outcomes[:, 1], outcomes[:, 2]
    bias_sq = float(np.mean(biases))
    gaps = errors - variances - bias_sq
    return BiasVariance(float(errors.mean()), bias_sq, float(variances.mean()),
                        float(gaps.std(ddof=1) / math.sqrt(len(gaps))))
