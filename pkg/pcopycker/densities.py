"""
Test densities of the simulation laboratory

Every density is a finite mixture of product densities, each axis being a normal or a uniform factor. This covers
the standard normal, gaussian mixtures (claw, bimodal) and uniform targets, and keeps the quantities the laboratory
needs closed form: L2 norms, masses of boxes, and smoothing by gaussian-based kernels.
"""

import json
import logging
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import special

from pcopycker import quadrature
from pcopycker.exceptions import InvalidArgument


__author__ = "PcoPycker developers"

logger = logging.getLogger(__name__)

DATA_DIRECTORY = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")
_SQRT_2PI = math.sqrt(2 * math.pi)


@dataclass(frozen=True)
class NormalFactor:
    """ univariate normal density N(mean, sd²) """
    mean: float = 0.0
    sd: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.sd) and self.sd > 0):
            raise InvalidArgument("Normal factor needs a finite mean and a positive sd, got {}".format(self))

    @property
    def sup(self) -> float:
        return 1 / (self.sd * _SQRT_2PI)

    @property
    def breakpoints(self) -> tuple:
        return ()

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / self.sd
        return np.exp(-0.5 * z * z) / (self.sd * _SQRT_2PI)

    def cdf(self, x):
        return special.ndtr((np.asarray(x, dtype=float) - self.mean) / self.sd)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.mean + self.sd * rng.standard_normal(size)

    def scaled(self, s: float) -> "NormalFactor":
        return NormalFactor(self.mean * s, self.sd * s)

    def smooth(self, kernel, h: float, x):
        """ (K_h ⋆ factor)(x) in closed form for gaussian-based kernels, None otherwise """
        if kernel.shape.name != "gaussian":
            return None
        total = np.zeros_like(np.asarray(x, dtype=float))
        for weight, scale in zip(kernel.weights, kernel.scales):
            total = total + weight * NormalFactor(self.mean, math.hypot(self.sd, h * scale)).pdf(x)
        return total


@dataclass(frozen=True)
class UniformFactor:
    """ univariate uniform density on [low, high] """
    low: float = 0.0
    high: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.low) and math.isfinite(self.high) and self.low < self.high):
            raise InvalidArgument("Uniform factor needs finite bounds low < high, got {}".format(self))

    @property
    def sup(self) -> float:
        return 1 / (self.high - self.low)

    @property
    def breakpoints(self) -> tuple:
        return self.low, self.high

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.low) & (x <= self.high), self.sup, 0.0)

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.low) * self.sup, 0.0, 1.0)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.low, self.high, size)

    def scaled(self, s: float) -> "UniformFactor":
        return UniformFactor(self.low * s, self.high * s)

    def smooth(self, kernel, h: float, x):
        x = np.asarray(x, dtype=float)
        return (kernel.cdf((x - self.low) / h) - kernel.cdf((x - self.high) / h)) * self.sup


def _factor_inner(first, second) -> float:
    """ ∫ first · second, closed form for every pair of factor types """
    if isinstance(first, NormalFactor) and isinstance(second, NormalFactor):
        return float(NormalFactor(first.mean, math.hypot(first.sd, second.sd)).pdf(second.mean))
    if isinstance(first, UniformFactor) and isinstance(second, UniformFactor):
        overlap = max(0.0, min(first.high, second.high) - max(first.low, second.low))
        return overlap * first.sup * second.sup
    normal, uniform = (first, second) if isinstance(first, NormalFactor) else (second, first)
    return float(normal.cdf(uniform.high) - normal.cdf(uniform.low)) * uniform.sup


def _smooth_by_quadrature(factor, kernel, h: float, x) -> np.ndarray:
    """ (K_h ⋆ factor)(x) = ∫ K(u) factor(x - h u) du by adaptive Gauss-Legendre quadrature """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    reach = kernel.integration_radius
    if not factor.breakpoints:
        return np.asarray(quadrature.integrate(
            lambda u: kernel(u)[None, :] * factor.pdf(x[:, None] - h * u[None, :]),
            -reach, reach, breakpoints=kernel.breakpoints))
    values = np.empty(len(x))
    for index, point in enumerate(x):
        jumps = tuple((point - edge) / h for edge in factor.breakpoints)
        values[index] = quadrature.integrate(lambda u: kernel(u) * factor.pdf(point - h * u),
                                             -reach, reach, breakpoints=kernel.breakpoints + jumps)
    return values


@dataclass(frozen=True)
class Density:
    """
    A mixture of product densities Σ_c π_c ∏_j f_{c,j}(x_j)

    :param identifier: registry name of the density
    :param weights: mixture weights π_c
    :param components: per mixture component, the tuple of its per-axis factors
    :param smoothness: per-axis smoothness tags β_j used as experiment metadata
    :param scale: scale L of the target relative to its registered version
    """
    identifier: str
    weights: tuple
    components: tuple
    smoothness: tuple = None
    scale: float = 1.0
    parameters: dict = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.weights) != len(self.components) or not self.weights:
            raise InvalidArgument("Density {} needs as many weights as components".format(self.identifier))
        if any(w < 0 for w in self.weights) or abs(math.fsum(self.weights) - 1) > 1e-12:
            raise InvalidArgument("Mixture weights of {} must be non-negative and sum to one".format(self.identifier))
        if len({len(factors) for factors in self.components}) != 1:
            raise InvalidArgument("Every component of {} must have the same dimension".format(self.identifier))

    @property
    def dimension(self) -> int:
        return len(self.components[0])

    @property
    def sup_bound(self) -> float:
        """ an upper bound B of ‖f‖∞ (exact for single-component densities) """
        return math.fsum(w * math.prod(f.sup for f in factors) for w, factors in zip(self.weights, self.components))

    def _points(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.ndim <= 1:
            points = points.reshape(-1, 1) if self.dimension == 1 else points.reshape(-1, self.dimension)
        if points.shape[1] != self.dimension:
            raise InvalidArgument("Points of dimension {} given to a density of dimension {}".format(
                points.shape[1], self.dimension))
        return points

    def pdf(self, points) -> np.ndarray:
        """
        f at an (m, d) array of points (or a 1-d array when d = 1)
        """
        points = self._points(points)
        total = np.zeros(len(points))
        for weight, factors in zip(self.weights, self.components):
            term = np.full(len(points), weight)
            for axis, factor in enumerate(factors):
                term = term * factor.pdf(points[:, axis])
            total = total + term
        return total

    def cdf(self, x) -> np.ndarray:
        """ distribution function, univariate densities only """
        if self.dimension != 1:
            raise InvalidArgument("The distribution function is only defined here for univariate densities")
        x = np.asarray(x, dtype=float)
        return sum(w * factors[0].cdf(x) for w, factors in zip(self.weights, self.components))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """
        Draws n observations

        :param n: number of observations
        :param rng: numpy random generator
        :return: array of shape (n, d)
        """
        if n < 1:
            raise InvalidArgument("Sample size must be at least 1, got {}".format(n))
        draws = np.empty((n, self.dimension))
        if len(self.weights) == 1:
            labels = np.zeros(n, dtype=int)
        else:
            labels = rng.choice(len(self.weights), size=n, p=np.asarray(self.weights))
        for label, factors in enumerate(self.components):
            rows = np.nonzero(labels == label)[0]
            for axis, factor in enumerate(factors):
                draws[rows, axis] = factor.draw(rng, len(rows))
        return draws

    @property
    def l2_norm_sq(self) -> float:
        """ ‖f‖², closed form """
        return math.fsum(
            wa * wb * math.prod(_factor_inner(fa, fb) for fa, fb in zip(ca, cb))
            for wa, ca in zip(self.weights, self.components)
            for wb, cb in zip(self.weights, self.components))

    def mass_in_box(self, lows, highs) -> float:
        """
        Probability of the box ∏_j [lows_j, highs_j]
        """
        lows = np.broadcast_to(np.asarray(lows, dtype=float), (self.dimension,))
        highs = np.broadcast_to(np.asarray(highs, dtype=float), (self.dimension,))
        return math.fsum(w * math.prod(float(f.cdf(b) - f.cdf(a)) for f, a, b in zip(factors, lows, highs))
                         for w, factors in zip(self.weights, self.components))

    def scaled(self, s: float) -> "Density":
        """
        Density of s·X

        :param s: positive scale
        """
        if not s > 0:
            raise InvalidArgument("Scale must be positive, got {}".format(s))
        components = tuple(tuple(f.scaled(s) for f in factors) for factors in self.components)
        return replace(self, components=components, scale=self.scale * s)

    def smoothed(self, kernel, h, points, method: str = "auto") -> np.ndarray:
        """
        (K_h ⋆ f) at an (m, d) array of points

        :param kernel: univariate kernel used on every axis
        :param h: per-axis bandwidths
        :param points: evaluation points
        :param method: "auto" for closed forms when available, "quadrature" to force quadrature
        """
        if method not in ("auto", "quadrature"):
            raise InvalidArgument("Unknown smoothing method {!r}".format(method))
        points = self._points(points)
        h = np.broadcast_to(np.asarray(h, dtype=float), (self.dimension,))
        total = np.zeros(len(points))
        for weight, factors in zip(self.weights, self.components):
            term = np.full(len(points), weight)
            for axis, factor in enumerate(factors):
                values = factor.smooth(kernel, h[axis], points[:, axis]) if method == "auto" else None
                if values is None:
                    values = _smooth_by_quadrature(factor, kernel, h[axis], points[:, axis])
                term = term * values
            total = total + term
        return total


def standard_normal(dimension: int = 1) -> Density:
    """ N(0, I_d) """
    return Density("standard_normal", (1.0,), ((NormalFactor(),) * dimension,), smoothness=(2.0,) * dimension)


def uniform(dimension: int = 1, low: float = 0.0, high: float = 1.0) -> Density:
    """ uniform density on [low, high]^d """
    return Density("uniform", (1.0,), ((UniformFactor(low, high),) * dimension,), smoothness=(0.5,) * dimension)


def gaussian_mixture(weights, means, sds, identifier: str = "gaussian_mixture", smoothness=None) -> Density:
    """
    Mixture of gaussians with diagonal covariances

    :param weights: mixture weights
    :param means: component means, scalars (d = 1) or per-axis sequences
    :param sds: component standard deviations, same layout as means
    :param identifier: registry name
    :param smoothness: per-axis smoothness tags, 2 on every axis by default
    """
    means = [np.atleast_1d(np.asarray(m, dtype=float)) for m in means]
    sds = [np.atleast_1d(np.asarray(s, dtype=float)) for s in sds]
    if not (len(weights) == len(means) == len(sds)):
        raise InvalidArgument("A gaussian mixture needs as many weights, means and sds")
    components = tuple(tuple(NormalFactor(float(m), float(s)) for m, s in zip(mean, sd))
                       for mean, sd in zip(means, sds))
    dimension = len(components[0])
    return Density(identifier, tuple(float(w) for w in weights), components,
                   smoothness=tuple(smoothness) if smoothness is not None else (2.0,) * dimension,
                   parameters={"weights": list(weights), "means": [m.tolist() for m in means],
                               "sds": [s.tolist() for s in sds]})


def registered_mixtures() -> dict:
    """ parameters of the named mixtures shipped with the package """
    with open(os.path.join(DATA_DIRECTORY, "densities.json")) as registry:
        return json.load(registry)


def density_from_id(spec, dimension: int = 1) -> Density:
    """
    Builds a density from an identifier or a configuration mapping

    Accepted identifiers are "standard_normal", "uniform", "gaussian_mixture" (with parameters) and the names
    registered in the shipped ``densities.json`` ("claw", "bimodal").

    :param spec: identifier string, or mapping with an "id" key and parameters
    :param dimension: dimension for standard_normal and uniform
    """
    if isinstance(spec, str):
        spec = {"id": spec}
    spec = dict(spec)
    identifier = spec.pop("id", None)
    dimension = int(spec.pop("dimension", dimension))
    scale = float(spec.pop("scale", 1.0))
    if identifier == "standard_normal":
        density = standard_normal(dimension)
    elif identifier == "uniform":
        density = uniform(dimension, spec.pop("low", 0.0), spec.pop("high", 1.0))
    elif identifier == "gaussian_mixture":
        try:
            density = gaussian_mixture(spec.pop("weights"), spec.pop("means"), spec.pop("sds"),
                                       smoothness=spec.pop("smoothness", None))
        except KeyError as exc:
            raise InvalidArgument("gaussian_mixture needs weights, means and sds, missing {}".format(exc)) from None
    else:
        registry = registered_mixtures()
        if identifier not in registry:
            raise InvalidArgument("Unknown density {!r}, expected one of {}".format(
                identifier, ["standard_normal", "uniform", "gaussian_mixture"] + sorted(registry)))
        parameters = registry[identifier]
        density = gaussian_mixture(parameters["weights"], parameters["means"], parameters["sds"],
                                   identifier=identifier, smoothness=parameters.get("smoothness"))
    if spec:
        raise InvalidArgument("Unexpected parameters {} for density {!r}".format(sorted(spec), identifier))
    return density.scaled(scale) if scale != 1.0 else density
