"""
Penalized comparison to overfitting

Every estimator f̂_h of the collection is compared to the most overfitting one, f̂_hmin, and the bandwidth minimizing
‖f̂_h - f̂_hmin‖² + pen(h) is selected. The comparison term is an average over pairs of observations of
convolutions of rescaled kernels, computed once per bandwidth pair and cached, so that changing the penalty costs
nothing.
"""

import enum
import functools
import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from pcopycker.exceptions import AdmissibilityWarning, InvalidArgument, OrderingWarning
from pcopycker.kde import Sample
from pcopycker.kernels import Bandwidth, as_product_kernel


__author__ = "PcoPycker developers"

logger = logging.getLogger(__name__)

#: product grids larger than this are refused
MAX_GRID_SIZE = 10 ** 5
#: comparison terms this far below zero are rounding noise and clamped
NEGATIVE_TOLERANCE = 1e-10
#: lower end of default grids
SMALLEST_DEFAULT_BANDWIDTH = 1e-4


class BandwidthGrid:
    """
    A finite set of candidate bandwidths, sorted by volume ∏h_j (then lexicographically)

    :param bandwidths: the candidate bandwidths, all of the same dimension
    :param n: sample size the grid is meant for, used for the admissibility check
    :param kernel: kernel the grid is meant for, used for the admissibility check
    """
    def __init__(self, bandwidths, n: int = None, kernel=None):
        bandwidths = sorted({Bandwidth.of(h) for h in bandwidths}, key=Bandwidth.sort_key)
        if not bandwidths:
            raise InvalidArgument("A bandwidth grid cannot be empty")
        if len({h.dimension for h in bandwidths}) != 1:
            raise InvalidArgument("Every bandwidth of a grid must have the same dimension")
        if len(bandwidths) > MAX_GRID_SIZE:
            raise InvalidArgument("Bandwidth grid has {} elements, more than the cap of {}".format(
                len(bandwidths), MAX_GRID_SIZE))
        self.bandwidths = tuple(bandwidths)
        self.n = n
        self.hmin = Bandwidth(tuple(np.min([h.components for h in bandwidths], axis=0)))
        self.hmax = Bandwidth(tuple(np.max([h.components for h in bandwidths], axis=0)))
        self.warnings = []
        if n is not None and kernel is not None:
            self.check_admissibility(kernel, n)

    @property
    def dimension(self) -> int:
        return self.hmin.dimension

    def __len__(self):
        return len(self.bandwidths)

    def __iter__(self):
        return iter(self.bandwidths)

    def __getitem__(self, index):
        return self.bandwidths[index]

    def __repr__(self):
        return "BandwidthGrid({} bandwidths in [{}, {}])".format(len(self), self.hmin, self.hmax)

    def index(self, h) -> int:
        return self.bandwidths.index(Bandwidth.of(h))

    @property
    def volumes(self) -> np.ndarray:
        return np.array([h.volume for h in self.bandwidths])

    def check_admissibility(self, kernel, n: int) -> bool:
        """
        Records a warning when ∏h_{j,min} < ‖K‖∞‖K‖₁/n

        :param kernel: Kernel or ProductKernel
        :param n: sample size
        :return: whether the grid is admissible
        """
        bound = as_product_kernel(kernel, self.dimension).admissible_volume(n)
        if self.hmin.volume < bound * (1 - 1e-12):
            message = "h_min volume {:.6g} is below ‖K‖∞‖K‖₁/n = {:.6g}".format(self.hmin.volume, bound)
            warnings.warn(message, AdmissibilityWarning)
            self.warnings.append(message)
            return False
        return True

    @classmethod
    def product(cls, axes, n: int = None, kernel=None) -> "BandwidthGrid":
        """
        H = H_1 × ... × H_d from per-axis candidate lists

        :param axes: one sequence of candidate bandwidths per axis
        """
        axes = [sorted(set(float(value) for value in axis)) for axis in axes]
        size = math.prod(len(axis) for axis in axes)
        if size > MAX_GRID_SIZE:
            raise InvalidArgument("Product grid would have {} elements, more than the cap of {}".format(
                size, MAX_GRID_SIZE))
        return cls([Bandwidth(values) for values in itertools.product(*axes)], n=n, kernel=kernel)

    @classmethod
    def geometric(cls, hmin, hmax, count, n: int = None, kernel=None) -> "BandwidthGrid":
        """
        Geometric sequences from hmin to hmax on every axis

        :param hmin: smallest bandwidth, scalar or per axis
        :param hmax: largest bandwidth, scalar or per axis
        :param count: number of points, scalar or per axis
        """
        hmin, hmax, count = np.broadcast_arrays(np.atleast_1d(hmin), np.atleast_1d(hmax), np.atleast_1d(count))
        axes = []
        for low, high, points in zip(hmin.astype(float), hmax.astype(float), count):
            if int(points) != points or points < 1:
                raise InvalidArgument("Grid count must be a positive integer, got {}".format(points))
            if not (0 < low <= high < math.inf):
                raise InvalidArgument("Grid bounds must satisfy 0 < hmin <= hmax, got {} and {}".format(low, high))
            axes.append(np.geomspace(low, high, int(points)) if points > 1 else np.array([low]))
        return cls.product(axes, n=n, kernel=kernel)

    @classmethod
    def inverse_integer(cls, kernel, n: int, dimension: int = 1, kmax: int = None) -> "BandwidthGrid":
        """
        {h : h_j ≤ 1, 1/h_j integer, ∏h_j ≥ ‖K‖∞‖K‖₁/n}

        :param kernel: Kernel or ProductKernel
        :param n: sample size
        :param dimension: number of axes
        :param kmax: optional cap on every 1/h_j
        """
        bound = as_product_kernel(kernel, dimension).admissible_volume(n)
        largest = int(math.floor(1 / bound * (1 + 1e-12)))
        if kmax is not None:
            largest = min(largest, int(kmax))
        if largest < 1:
            raise InvalidArgument("No bandwidth h ≤ 1 is admissible for n = {}".format(n))
        if largest ** dimension > MAX_GRID_SIZE * 10:
            raise InvalidArgument("Inverse-integer grid is too large for n = {} and d = {}, give kmax".format(
                n, dimension))
        bandwidths = [Bandwidth(tuple(1.0 / k for k in ks))
                      for ks in itertools.product(range(1, largest + 1), repeat=dimension)
                      if math.prod(ks) <= largest]
        return cls(bandwidths, n=n, kernel=kernel)

    @classmethod
    def default(cls, kernel, n: int, dimension: int = 1, count: int = 30, hmax: float = 1.0) -> "BandwidthGrid":
        """
        Geometric grid of count points per axis from max((‖K‖∞‖K‖₁/n)^{1/d}, 1e-4) to hmax
        """
        bound = as_product_kernel(kernel, dimension).admissible_volume(n) ** (1 / dimension)
        return cls.geometric(max(bound, SMALLEST_DEFAULT_BANDWIDTH), hmax, count, n=n, kernel=kernel)


class PenaltyMode(enum.Enum):
    """
    The penalty shapes, all equal up to an additive constant in h for a matching λ
    """
    family = "family"
    minimal = "minimal"
    optimal = "optimal"


@dataclass(frozen=True)
class PenaltySpec:
    """
    :param lambda_: tuning constant λ of the family mode
    :param mode: penalty shape
    """
    lambda_: float = 1.0
    mode: PenaltyMode = PenaltyMode.family

    def __post_init__(self):
        object.__setattr__(self, "mode", PenaltyMode(self.mode))
        if not math.isfinite(self.lambda_):
            raise InvalidArgument("λ must be finite, got {}".format(self.lambda_))

    def __str__(self):
        if self.mode is PenaltyMode.family:
            return "pen_λ(λ={:g})".format(self.lambda_)
        return "pen_{}".format(self.mode.value)


def penalty(spec: PenaltySpec, K, h, hmin, n: int) -> float:
    """
    pen(h) for one of the three penalty shapes

    family: (λ‖K_h‖² - ‖K_hmin - K_h‖²)/n, minimal: (2⟨K_h, K_hmin⟩ - ‖K_h‖²)/n, optimal: 2⟨K_h, K_hmin⟩/n

    :param spec: the penalty specification
    :param K: Kernel or ProductKernel
    :param h: bandwidth
    :param hmin: reference bandwidth
    :param n: sample size
    """
    if int(n) != n or n < 1:
        raise InvalidArgument("Sample size must be a positive integer, got {}".format(n))
    h, hmin = Bandwidth.of(h), Bandwidth.of(hmin)
    kernel = as_product_kernel(K, h.dimension)
    kernel.check(hmin)
    norm = kernel.l2_norm_scaled(h)
    inner = kernel.l2_norm_scaled(h) if h == hmin else kernel.inner(h, hmin)
    if spec.mode is PenaltyMode.family:
        difference = 0.0 if h == hmin else max(kernel.l2_norm_scaled(hmin) + norm - 2 * inner, 0.0)
        return (spec.lambda_ * norm - difference) / n
    if spec.mode is PenaltyMode.minimal:
        return (2 * inner - norm) / n
    return 2 * inner / n


class PairwiseSums:
    """
    Cached averages over all ordered pairs of observations (diagonal included)

    ``convolution_sum(a, b)`` is (1/n²) Σ_{i,j} (K_a ⋆ K_b)(X_i - X_j) = ⟨f̂_a, f̂_b⟩. Pair differences are stored
    once, in absolute value per axis and sorted, so that sums do not depend on the order of the sample and
    contributions beyond the reach of the kernels are skipped.

    :param sample: the observations
    :param K: Kernel or ProductKernel
    """
    def __init__(self, sample: Sample, K):
        self.sample = sample
        self.kernel = as_product_kernel(K, sample.dimension)
        observations = sample.observations
        differences = np.empty((sample.n * (sample.n - 1) // 2, sample.dimension))
        start = 0
        for row in range(sample.n - 1):
            block = differences[start:start + sample.n - row - 1]
            np.subtract(observations[row + 1:], observations[row], out=block)
            np.abs(block, out=block)
            start += len(block)
        if sample.dimension == 1:
            differences.sort(axis=0)
        else:
            differences = differences[np.lexsort(differences.T[::-1])]
        self.differences = differences
        self.differences.setflags(write=False)
        self._cache = {}

    @property
    def n(self) -> int:
        return self.sample.n

    def _within(self, reach: np.ndarray) -> np.ndarray:
        stop = int(np.searchsorted(self.differences[:, 0], reach[0], side="left"))
        window = self.differences[:stop]
        if self.kernel.dimension > 1:
            window = window[np.all(window < reach, axis=1)]
        return window

    @staticmethod
    def key(a: Bandwidth, b: Bandwidth):
        return tuple(sorted((a.components, b.components)))

    def convolution_sum(self, a, b) -> float:
        """
        ⟨f̂_a, f̂_b⟩ = (1/n²) Σ_{i,j} (K_a ⋆ K_b)(X_i - X_j)
        """
        a, b = Bandwidth.of(a), Bandwidth.of(b)
        key = self.key(a, b)
        if key not in self._cache:
            self._cache[key] = self._convolution_sum(a, b)
        return self._cache[key]

    def _convolution_sum(self, a: Bandwidth, b: Bandwidth) -> float:
        window = self._within(self.kernel.reach(a, b))
        diagonal = self.n * float(self.kernel.convolution(a, b, np.zeros((1, self.kernel.dimension)))[0])
        off_diagonal = 2 * float(np.sum(self.kernel.convolution(a, b, window)))
        return (diagonal + off_diagonal) / self.n ** 2

    def seed(self, values: dict) -> None:
        """ stores sums computed elsewhere, keyed by :meth:`key` """
        self._cache.update(values)

    def kernel_sum(self, h) -> float:
        """
        (1/n²) Σ_{i≠j} K_h(X_i - X_j)
        """
        h = Bandwidth.of(h)
        reach = np.array([component * self.kernel.kernel.integration_radius for component in h.components])
        window = self._within(reach)
        return 2 * float(np.sum(self.kernel.evaluate(h, window))) / self.n ** 2

    def comparison(self, h, reference) -> float:
        """
        ‖f̂_h - f̂_reference‖²
        """
        h, reference = Bandwidth.of(h), Bandwidth.of(reference)
        if h == reference:
            return 0.0
        value = self.convolution_sum(h, h) - 2 * self.convolution_sum(h, reference) \
            + self.convolution_sum(reference, reference)
        if value < -NEGATIVE_TOLERANCE:
            logger.warning("comparison of %s to %s is %g, below the rounding tolerance", h, reference, value)
        return max(value, 0.0)


def _convolution_sums(sums: PairwiseSums, pairs) -> dict:
    return {PairwiseSums.key(a, b): sums.convolution_sum(a, b) for a, b in pairs}


def comparison_term(sample: Sample, K, h, hmin) -> float:
    """
    ‖f̂_h - f̂_hmin‖² as an average over pairs of observations of the pair interaction G

    :param sample: the observations
    :param K: Kernel or ProductKernel
    :param h: bandwidth
    :param hmin: reference bandwidth
    """
    h, hmin = Bandwidth.of(h), Bandwidth.of(hmin)
    as_product_kernel(K, sample.dimension).check(h, hmin)
    if not hmin.is_below(h):
        warnings.warn("Reference {} is not coordinatewise below {}".format(hmin, h), OrderingWarning)
    return PairwiseSums(sample, K).comparison(h, hmin)


@dataclass
class CriterionTable:
    """
    Per-bandwidth comparison, penalty and total criterion, with the selected index

    :param bandwidths: the grid bandwidths, by increasing volume
    :param reference: the overfitting bandwidth h_min
    :param comparison: ‖f̂_h - f̂_hmin‖² per bandwidth
    :param penalty: penalty per bandwidth
    :param total: comparison + penalty per bandwidth
    :param selected_index: index of the selected bandwidth
    :param spec: penalty specification, None for custom penalties
    :param warnings: warnings recorded while building the table
    """
    bandwidths: tuple
    reference: Bandwidth
    comparison: np.ndarray
    penalty: np.ndarray
    total: np.ndarray
    selected_index: int
    spec: PenaltySpec = None
    warnings: list = field(default_factory=list)

    @property
    def selected(self) -> Bandwidth:
        return self.bandwidths[self.selected_index]

    def __len__(self):
        return len(self.bandwidths)

    def rows(self) -> list:
        """ one mapping per bandwidth """
        return [{"bandwidth": list(h.components), "volume": h.volume, "comparison": float(c), "penalty": float(p),
                 "criterion": float(t)}
                for h, c, p, t in zip(self.bandwidths, self.comparison, self.penalty, self.total)]


def argmin_largest(values) -> int:
    """
    Index of the minimum of values; among ties, the last one, which has the largest volume on a sorted grid

    :param values: criterion values, ordered by increasing bandwidth volume
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InvalidArgument("Cannot select from an empty criterion")
    return int(np.flatnonzero(values == values.min())[-1])


class ComparisonProfile:
    """
    Comparison terms of every grid bandwidth to h_min, computed once and reused for any penalty

    :param sample: the observations
    :param K: Kernel or ProductKernel
    :param grid: candidate bandwidths
    :param runner: optional :class:`pcopycker.runner.ParallelRunner` spreading the grid over processes
    :param sums: pair sums to reuse, built from the sample otherwise
    """
    def __init__(self, sample: Sample, K, grid: BandwidthGrid, runner=None, sums: PairwiseSums = None):
        if len(grid) == 0:
            raise InvalidArgument("Cannot select a bandwidth from an empty grid")
        if grid.dimension != sample.dimension:
            raise InvalidArgument("Grid dimension {} does not match sample dimension {}".format(
                grid.dimension, sample.dimension))
        self.sample = sample
        self.kernel = as_product_kernel(K, sample.dimension)
        self.grid = grid
        self.sums = sums if sums is not None else PairwiseSums(sample, self.kernel)
        self.warnings = list(grid.warnings)

        hmin = grid.hmin
        pairs = [(hmin, hmin)] + [pair for h in grid if h != hmin for pair in ((h, h), (h, hmin))]
        if runner is not None and runner.process_number > 1:
            chunks = [pairs[index::runner.process_number] for index in range(runner.process_number)]
            for values in runner.run([functools.partial(_convolution_sums, self.sums, chunk)
                                      for chunk in chunks if chunk]):
                self.sums.seed(values)
        else:
            self.sums.seed(_convolution_sums(self.sums, pairs))
        self.comparison = np.array([self.sums.comparison(h, hmin) for h in grid])

    @property
    def n(self) -> int:
        return self.sample.n

    def penalties(self, spec: PenaltySpec) -> np.ndarray:
        return np.array([penalty(spec, self.kernel, h, self.grid.hmin, self.n) for h in self.grid])

    def table(self, spec: PenaltySpec) -> CriterionTable:
        """
        Criterion table for one of the penalty shapes
        """
        return self.table_with_penalty(self.penalties(spec), spec)

    def table_with_penalty(self, penalties, spec: PenaltySpec = None) -> CriterionTable:
        """
        Criterion table for an arbitrary penalty vector, one value per grid bandwidth
        """
        penalties = np.asarray(penalties, dtype=float)
        if penalties.shape != self.comparison.shape:
            raise InvalidArgument("Expected {} penalty values, got {}".format(len(self.comparison), penalties.size))
        total = self.comparison + penalties
        selected = argmin_largest(total)
        logger.debug("selected %s under %s", self.grid[selected], spec if spec is not None else "custom penalty")
        return CriterionTable(self.grid.bandwidths, self.grid.hmin, self.comparison.copy(), penalties, total,
                              selected, spec, list(self.warnings))


def select_bandwidth(sample: Sample, K, grid: BandwidthGrid, spec: PenaltySpec = PenaltySpec(),
                     runner=None) -> CriterionTable:
    """
    ĥ = argmin_{h ∈ H} ‖f̂_h - f̂_hmin‖² + pen(h), ties broken toward the largest volume

    :param sample: the observations
    :param K: Kernel or ProductKernel
    :param grid: candidate bandwidths
    :param spec: penalty specification, pen_λ with λ = 1 by default
    :param runner: optional parallel runner
    :return: the filled criterion table
    """
    return ComparisonProfile(sample, K, grid, runner=runner).table(spec)


def criterion_identity_check(table: CriterionTable) -> bool:
    """
    Whether total = comparison + penalty on every row (to 1e-12) and the comparison at h_min is 0
    """
    if len(table) == 0:
        raise InvalidArgument("Cannot audit an empty criterion table")
    if not np.allclose(table.total, table.comparison + table.penalty, rtol=0, atol=1e-12):
        return False
    for h, value in zip(table.bandwidths, table.comparison):
        if h == table.reference and value != 0:
            return False
    return True
