"""
Kernel density estimates f̂_h(x) = (1/n) Σ_i K_h(x - X_i)

This module is the ground-truth evaluation path: direct summation over the observations, with a fixed
left-to-right compensated accumulation so that results do not depend on how query points are chunked.
"""

import logging
from dataclasses import dataclass

import numpy as np

from pcopycker import quadrature
from pcopycker.densities import Density
from pcopycker.exceptions import InvalidArgument
from pcopycker.kernels import Bandwidth, ProductKernel, as_product_kernel


__author__ = "PcoPycker developers"

logger = logging.getLogger(__name__)

#: default number of evaluation points per axis
GRID_SIZE = 1024
#: the default grid extends this many largest bandwidths beyond the data
GRID_MARGIN = 4.0


class Sample:
    """
    n observations of dimension d

    :param observations: array-like of shape (n, d), or (n,) for univariate data
    """
    def __init__(self, observations):
        values = np.array(observations, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise InvalidArgument("A sample needs at least one observation of dimension at least one")
        if not np.all(np.isfinite(values)):
            raise InvalidArgument("Sample observations must all be finite")
        values.setflags(write=False)
        self.observations = values

    @property
    def n(self) -> int:
        return self.observations.shape[0]

    @property
    def dimension(self) -> int:
        return self.observations.shape[1]

    def __len__(self):
        return self.n

    def __repr__(self):
        return "Sample(n={}, d={})".format(self.n, self.dimension)

    def concatenate(self, other: "Sample") -> "Sample":
        if other.dimension != self.dimension:
            raise InvalidArgument("Cannot concatenate samples of dimensions {} and {}".format(
                self.dimension, other.dimension))
        return Sample(np.vstack([self.observations, other.observations]))

    def shifted(self, vector) -> "Sample":
        return Sample(self.observations + np.asarray(vector, dtype=float))

    def scaled(self, s: float) -> "Sample":
        return Sample(self.observations * s)


def _points(points, dimension: int) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.ndim <= 1 and dimension == 1:
        return points.reshape(-1, 1)
    if points.ndim == 1 and points.size == dimension:
        return points.reshape(1, -1)
    if points.ndim != 2 or points.shape[1] != dimension:
        raise InvalidArgument("Points of shape {} do not have dimension {}".format(points.shape, dimension))
    return points


def evaluate(sample: Sample, K, h, points) -> np.ndarray:
    """
    f̂_h at the given points

    :param sample: the observations
    :param K: Kernel or ProductKernel
    :param h: bandwidth
    :param points: (m, d) array of query points (or a 1-d array when d = 1)
    :return: array of m density values
    """
    h = Bandwidth.of(h)
    if h.dimension != sample.dimension:
        raise InvalidArgument("Bandwidth dimension {} does not match sample dimension {}".format(
            h.dimension, sample.dimension))
    kernel = as_product_kernel(K, sample.dimension)
    points = _points(points, sample.dimension)

    total = np.zeros(len(points))
    compensation = np.zeros(len(points))
    for observation in sample.observations:
        term = kernel.evaluate(h, points - observation) - compensation
        updated = total + term
        compensation = (updated - total) - term
        total = updated
    return total / sample.n


def trapezoid_weights(axis) -> np.ndarray:
    """ quadrature weights of the trapezoidal rule on a sorted axis """
    axis = np.asarray(axis, dtype=float)
    if len(axis) < 2:
        raise InvalidArgument("An evaluation axis needs at least two points")
    steps = np.diff(axis)
    weights = np.zeros(len(axis))
    weights[:-1] += 0.5 * steps
    weights[1:] += 0.5 * steps
    return weights


def default_axes(sample: Sample, h_max, size: int = GRID_SIZE):
    """
    Equispaced axes spanning [min(X) - 4 h_max, max(X) + 4 h_max]

    :param sample: the observations
    :param h_max: largest bandwidth of interest, scalar or per axis
    :param size: points per axis
    """
    h_max = np.broadcast_to(np.asarray(h_max, dtype=float), (sample.dimension,))
    lows = sample.observations.min(axis=0) - GRID_MARGIN * h_max
    highs = sample.observations.max(axis=0) + GRID_MARGIN * h_max
    return [np.linspace(low, high, size) for low, high in zip(lows, highs)]


def panel_axes(sample: Sample, K, bandwidths, lows, highs, panels: int = 512, npoints: int = 8):
    """
    Per-axis Gauss-Legendre nodes and weights whose panels start and stop at every kink of the estimates

    For compactly supported kernels an estimate is a piecewise polynomial along every axis, with pieces delimited
    by X_ij ± h_j s; panels cut there make the grid quadrature of squared differences exact. Gaussian kernels get
    equal panels.

    :param sample: the observations
    :param K: Kernel or ProductKernel
    :param bandwidths: every bandwidth whose estimate will be evaluated on the axes
    :param lows: per-axis lower bounds
    :param highs: per-axis upper bounds
    :param panels: number of panels per axis for gaussian kernels
    :param npoints: Gauss-Legendre nodes per panel
    :return: tuple (axes, weights), lists of per-axis arrays
    """
    kernel = as_product_kernel(K, sample.dimension).kernel
    bandwidths = [Bandwidth.of(h) for h in bandwidths]
    lows = np.broadcast_to(np.asarray(lows, dtype=float), (sample.dimension,))
    highs = np.broadcast_to(np.asarray(highs, dtype=float), (sample.dimension,))
    axes, weights = [], []
    for axis, (low, high) in enumerate(zip(lows.tolist(), highs.tolist())):
        if kernel.breakpoints:
            cuts = {low, high}
            for h in bandwidths:
                for edge in kernel.breakpoints:
                    cuts.update(sample.observations[:, axis] + edge * h.components[axis])
            edges = np.array(sorted(c for c in cuts if low <= c <= high))
        else:
            edges = np.linspace(low, high, panels + 1)
        points, scaled = quadrature.panel_nodes(edges, npoints)
        axes.append(points)
        weights.append(scaled)
    return axes, weights


def _mesh(axes) -> np.ndarray:
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _tensor_sum(values: np.ndarray, weights) -> float:
    total = values
    for axis_weights in reversed(weights):
        total = total @ axis_weights
    return float(total)


@dataclass
class DensityEstimate:
    """
    A kernel density estimate evaluated on a tensor grid

    :param sample: observations behind the estimate
    :param kernel: the product kernel
    :param bandwidth: the bandwidth
    :param axes: per-axis evaluation coordinates
    :param weights: per-axis quadrature weights
    :param values: estimate on the grid, shape (len(axes[0]), ..., len(axes[d-1]))
    """
    sample: Sample
    kernel: ProductKernel
    bandwidth: Bandwidth
    axes: list
    weights: list
    values: np.ndarray

    @property
    def points(self) -> np.ndarray:
        """ grid points as an (m, d) array, first axis varying slowest """
        return _mesh(self.axes)

    def integrate(self, values: np.ndarray = None) -> float:
        """
        Grid quadrature of the estimate, or of other values on the same grid

        :param values: values on the grid, the estimate's own by default
        """
        return _tensor_sum(self.values if values is None else values, self.weights)

    def squared_distance(self, other: "DensityEstimate") -> float:
        """
        ‖self - other‖² by grid quadrature, both estimates on the same grid
        """
        if any(a.shape != b.shape or not np.array_equal(a, b) for a, b in zip(self.axes, other.axes)):
            raise InvalidArgument("Both estimates must be evaluated on the same grid")
        return self.integrate((self.values - other.values) ** 2)


def estimate(sample: Sample, K, h, axes=None, weights=None, h_max=None, size: int = GRID_SIZE) -> DensityEstimate:
    """
    Evaluates f̂_h on a tensor grid

    :param sample: the observations
    :param K: Kernel or ProductKernel
    :param h: bandwidth
    :param axes: per-axis coordinates, the default grid around the data otherwise
    :param weights: per-axis quadrature weights, trapezoidal by default
    :param h_max: largest bandwidth used to size the default grid, h by default
    :param size: points per axis of the default grid
    """
    h = Bandwidth.of(h)
    kernel = as_product_kernel(K, sample.dimension)
    if axes is None:
        axes = default_axes(sample, h.as_array() if h_max is None else h_max, size)
    axes = [np.asarray(axis, dtype=float) for axis in axes]
    if len(axes) != sample.dimension:
        raise InvalidArgument("Expected {} axes, got {}".format(sample.dimension, len(axes)))
    if weights is None:
        weights = [trapezoid_weights(axis) for axis in axes]
    values = evaluate(sample, kernel, h, _mesh(axes)).reshape([len(axis) for axis in axes])
    return DensityEstimate(sample, kernel, h, axes, list(weights), values)


def population_smoothing(f: Density, K, h, points, method: str = "auto") -> np.ndarray:
    """
    f_h = K_h ⋆ f = E[f̂_h] at the given points

    :param f: a registered test density
    :param K: Kernel or ProductKernel
    :param h: bandwidth
    :param points: (m, d) array of points (or a 1-d array when d = 1)
    :param method: "auto" uses closed forms when available, "quadrature" forces quadrature
    """
    if not isinstance(f, Density):
        raise InvalidArgument("population_smoothing needs a registered test density, got {!r}".format(f))
    h = Bandwidth.of(h)
    kernel = as_product_kernel(K, f.dimension)
    kernel.check(h)
    return f.smoothed(kernel.kernel, h.as_array(), _points(points, f.dimension), method=method)


def normalization_error(estimate_: DensityEstimate) -> float:
    """ |∫ f̂ - 1| on the estimate's grid """
    return abs(estimate_.integrate() - 1.0)
