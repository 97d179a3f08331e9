"""
Reference selectors: Lepski's rule, Goldenshluger-Lepski and least-squares cross-validation

All of them work from the same cached pair sums as the comparison to overfitting, so that running every selector on
a sample costs one set of kernel convolutions per bandwidth pair.
"""

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from pcopycker.exceptions import InvalidArgument, UnsupportedOperation
from pcopycker.kde import Sample
from pcopycker.kernels import Bandwidth, as_product_kernel
from pcopycker.pco import BandwidthGrid, PairwiseSums, argmin_largest


__author__ = "PcoPycker developers"

logger = logging.getLogger(__name__)

DEFAULT_KAPPA = 1.2


class BaselineMethod(enum.Enum):
    lepski = "lepski"
    gl = "gl"
    lscv = "lscv"


@dataclass(frozen=True)
class BaselineSpec:
    """
    :param method: the selector
    :param kappa1: constant of the variance proxy V₁ (and of Lepski's threshold)
    :param kappa2: constant of V₂, twice kappa1 when not given
    """
    method: BaselineMethod = BaselineMethod.gl
    kappa1: float = DEFAULT_KAPPA
    kappa2: float = None

    def __post_init__(self):
        object.__setattr__(self, "method", BaselineMethod(self.method))
        if self.kappa2 is None:
            object.__setattr__(self, "kappa2", 2 * self.kappa1)
        for name in ("kappa1", "kappa2"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise InvalidArgument("{} must be finite and nonnegative, got {}".format(name, value))


@dataclass
class GLTable:
    """
    Goldenshluger-Lepski criterion per grid bandwidth

    :param bandwidths: the grid bandwidths
    :param bias_proxy: A(h)
    :param variance_proxy: V₂(h)
    :param total: A(h) + V₂(h)
    :param maximizer: per h, index of the h′ attaining the supremum in A(h)
    :param selected_index: index of the selected bandwidth
    """
    bandwidths: tuple
    bias_proxy: np.ndarray
    variance_proxy: np.ndarray
    total: np.ndarray
    maximizer: np.ndarray
    selected_index: int

    @property
    def selected(self) -> Bandwidth:
        return self.bandwidths[self.selected_index]


def _sums_for(sample: Sample, K, grid: BandwidthGrid, sums: PairwiseSums = None) -> PairwiseSums:
    if len(grid) == 0:
        raise InvalidArgument("Cannot select a bandwidth from an empty grid")
    if grid.dimension != sample.dimension:
        raise InvalidArgument("Grid dimension {} does not match sample dimension {}".format(
            grid.dimension, sample.dimension))
    return sums if sums is not None else PairwiseSums(sample, K)


def lepski_select(sample: Sample, K, grid: BandwidthGrid, spec: BaselineSpec = BaselineSpec(BaselineMethod.lepski),
                  sums: PairwiseSums = None) -> Bandwidth:
    """
    Largest h such that ‖f̂_h′ - f̂_h‖² ≤ κ₁‖K‖²/(n h′) for every h′ ≤ h of the grid

    :raise UnsupportedOperation: for multivariate grids
    """
    if grid.dimension != 1:
        raise UnsupportedOperation("Lepski's rule needs an ordered, univariate grid")
    sums = _sums_for(sample, K, grid, sums)
    kernel = as_product_kernel(K, 1)
    thresholds = [spec.kappa1 * kernel.l2_norm_scaled(h) / sample.n for h in grid]

    selected = grid.bandwidths[0]
    for position, h in enumerate(grid):
        if all(sums.comparison(h, smaller) <= thresholds[index]
               for index, smaller in enumerate(grid.bandwidths[:position])):
            selected = h
    logger.debug("lepski selected %s", selected)
    return selected


def gl_table(sample: Sample, K, grid: BandwidthGrid, spec: BaselineSpec = BaselineSpec(),
             sums: PairwiseSums = None) -> GLTable:
    """
    A(h) = max_h′ (‖f̂_h′ - f̂_{h∨h′}‖² - V₁(h′))₊ and A(h) + V₂(h) for every grid bandwidth

    with V₁(h′) = κ₁‖K_h′‖²/n and V₂(h) = κ₂‖K_h‖²/n
    """
    sums = _sums_for(sample, K, grid, sums)
    kernel = as_product_kernel(K, grid.dimension)
    norms = np.array([kernel.l2_norm_scaled(h) for h in grid])
    v1 = spec.kappa1 * norms / sample.n
    v2 = spec.kappa2 * norms / sample.n

    bias = np.zeros(len(grid))
    maximizer = np.zeros(len(grid), dtype=int)
    for position, h in enumerate(grid):
        terms = np.array([sums.comparison(h.join(other), other) - v1[index] for index, other in enumerate(grid)])
        maximizer[position] = int(np.argmax(terms))
        bias[position] = max(terms[maximizer[position]], 0.0)

    total = bias + v2
    return GLTable(grid.bandwidths, bias, v2, total, maximizer, argmin_largest(total))


def gl_select(sample: Sample, K, grid: BandwidthGrid, spec: BaselineSpec = BaselineSpec(),
              sums: PairwiseSums = None) -> Bandwidth:
    """ argmin of A(h) + V₂(h), ties toward the largest volume """
    selected = gl_table(sample, K, grid, spec, sums).selected
    logger.debug("gl selected %s", selected)
    return selected


def lscv_scores(sample: Sample, K, grid: BandwidthGrid, sums: PairwiseSums = None) -> np.ndarray:
    """
    ‖f̂_h‖² - (2/n) Σ_i f̂_h^(-i)(X_i) for every grid bandwidth

    :raise InvalidArgument: for samples of less than two observations
    """
    if sample.n < 2:
        raise InvalidArgument("Cross-validation needs at least 2 observations")
    sums = _sums_for(sample, K, grid, sums)
    factor = 2 * sample.n / (sample.n - 1)
    return np.array([sums.convolution_sum(h, h) - factor * sums.kernel_sum(h) for h in grid])


def lscv_select(sample: Sample, K, grid: BandwidthGrid, sums: PairwiseSums = None) -> Bandwidth:
    """ minimizer of the least-squares cross-validation score, ties toward the largest volume """
    selected = grid[argmin_largest(lscv_scores(sample, K, grid, sums))]
    logger.debug("lscv selected %s", selected)
    return selected


def baseline_select(spec: BaselineSpec, sample: Sample, K, grid: BandwidthGrid,
                    sums: PairwiseSums = None) -> Bandwidth:
    """
    Dispatches to the selector named by ``spec.method``
    """
    if spec.method is BaselineMethod.lepski:
        return lepski_select(sample, K, grid, spec, sums)
    if spec.method is BaselineMethod.gl:
        return gl_select(sample, K, grid, spec, sums)
    return lscv_select(sample, K, grid, sums)
