"""
Kernel families, their rescalings K_h and the norms and inner products entering every criterion

A univariate kernel is stored as a finite mixture of rescaled copies of a base shape,
``K(u) = sum_i w_i B(u / s_i) / s_i``. Plain kernels have a single component, higher order kernels several.
Everything this package needs about a kernel (L2 norms, inner products of two rescalings, convolutions of two
rescalings) then reduces to the same quantities for the base shape, which are closed form for the gaussian shape
and obtained by Gauss-Legendre quadrature for the epanechnikov one.
"""

import functools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from pcopycker import quadrature
from pcopycker.exceptions import InvalidArgument, PcoPyckerError


__author__ = "PcoPycker developers"

logger = logging.getLogger(__name__)

#: the gaussian shape is truncated at this many standard deviations whenever a finite domain is needed
GAUSSIAN_REACH = 12.0
#: number of nodes of the interpolation tables of non closed-form convolutions
TABLE_SIZE = 4096
#: tolerance of the vanishing-moment check of higher order kernels
MOMENT_TOLERANCE = 1e-6

_SQRT_2PI = math.sqrt(2 * math.pi)


@dataclass(frozen=True)
class Bandwidth:
    """
    A bandwidth vector (h_1, ..., h_d), every component strictly positive and finite

    :param components: the per-axis bandwidths
    """
    components: tuple

    def __post_init__(self):
        components = tuple(float(value) for value in np.atleast_1d(np.asarray(self.components, dtype=float)))
        if not components:
            raise InvalidArgument("A bandwidth needs at least one component")
        for value in components:
            if not (math.isfinite(value) and value > 0):
                raise InvalidArgument("Bandwidth components must be positive and finite, got {}".format(components))
        object.__setattr__(self, "components", components)

    @classmethod
    def of(cls, value) -> "Bandwidth":
        """
        Coerces a float, a sequence of floats or a Bandwidth into a Bandwidth

        :param value: value to convert
        :return: the corresponding bandwidth
        """
        if isinstance(value, cls):
            return value
        try:
            return cls(tuple(np.atleast_1d(np.asarray(value, dtype=float))))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidArgument):
                raise
            raise InvalidArgument("Cannot interpret {!r} as a bandwidth".format(value)) from exc

    @property
    def dimension(self) -> int:
        """ number of axes """
        return len(self.components)

    @property
    def volume(self) -> float:
        """ product of the components """
        return math.prod(self.components)

    def as_array(self) -> np.ndarray:
        """ components as a float array """
        return np.array(self.components)

    def join(self, other: "Bandwidth") -> "Bandwidth":
        """
        Coordinatewise maximum h ∨ h'

        :param other: bandwidth of the same dimension
        :return: the coordinatewise maximum
        """
        _check_dimensions(self, other)
        return Bandwidth(tuple(max(a, b) for a, b in zip(self.components, other.components)))

    def is_below(self, other: "Bandwidth") -> bool:
        """
        Whether every component is smaller or equal to the matching component of other

        :param other: bandwidth of the same dimension
        """
        _check_dimensions(self, other)
        return all(a <= b for a, b in zip(self.components, other.components))

    def sort_key(self):
        """ ordering by volume, then lexicographically by components """
        return self.volume, self.components

    def __str__(self):
        return "(" + ", ".join("{:.6g}".format(value) for value in self.components) + ")"


def _check_dimensions(first: Bandwidth, second: Bandwidth) -> None:
    if first.dimension != second.dimension:
        raise InvalidArgument("Bandwidth dimensions differ: {} and {}".format(first.dimension, second.dimension))


class _GaussianShape:
    """ standard normal density, every convolution closed form """
    name = "gaussian"
    radius = math.inf
    sup = 1 / _SQRT_2PI

    @staticmethod
    def pdf(u):
        u = np.asarray(u, dtype=float)
        return np.exp(-0.5 * u * u) / _SQRT_2PI

    @staticmethod
    def cdf(z):
        return special.ndtr(np.asarray(z, dtype=float))

    @staticmethod
    def inner(p: float, q: float) -> float:
        return 1 / (_SQRT_2PI * math.sqrt(p * p + q * q))

    @staticmethod
    def convolution(p: float, q: float, t):
        scale = math.sqrt(p * p + q * q)
        t = np.asarray(t, dtype=float) / scale
        return np.exp(-0.5 * t * t) / (_SQRT_2PI * scale)

    @staticmethod
    def reach(p: float, q: float) -> float:
        return GAUSSIAN_REACH * math.sqrt(p * p + q * q)

    def __reduce__(self):
        return _shape_by_name, (self.name,)


class _EpanechnikovShape:
    """ epanechnikov kernel 3/4 (1 - u²) on [-1, 1], convolutions tabulated """
    name = "epanechnikov"
    radius = 1.0
    sup = 0.75

    @staticmethod
    def pdf(u):
        u = np.asarray(u, dtype=float)
        return np.where(np.abs(u) < 1, 0.75 * (1 - u * u), 0.0)

    @staticmethod
    def cdf(z):
        z = np.clip(np.asarray(z, dtype=float), -1, 1)
        return 0.5 + 0.75 * z - 0.25 * z ** 3

    def inner(self, p: float, q: float) -> float:
        reach = min(p, q)
        return quadrature.integrate(lambda u: self.pdf(u / p) * self.pdf(u / q) / (p * q), -reach, reach)

    @staticmethod
    def convolution(p: float, q: float, t):
        grid, values = _epanechnikov_table(p / q)
        return np.interp(np.abs(np.asarray(t, dtype=float)) / q, grid, values, right=0.0) / q

    @staticmethod
    def reach(p: float, q: float) -> float:
        return p + q

    def __reduce__(self):
        return _shape_by_name, (self.name,)


@functools.lru_cache(maxsize=2048)
def _epanechnikov_table(ratio: float):
    """
    Tabulates s ↦ (B_r ⋆ B)(s) on [0, r + 1] for the epanechnikov shape B and r = ratio

    On the overlap [max(-r, s - 1), min(r, s + 1)] the integrand is a polynomial of degree 4, so a single
    Gauss-Legendre panel integrates it exactly.
    """
    logger.debug("building epanechnikov convolution table for ratio %r", ratio)
    grid = np.linspace(0.0, ratio + 1.0, TABLE_SIZE)
    lower = np.maximum(-ratio, grid - 1)
    upper = np.minimum(ratio, grid + 1)
    nodes, weights = quadrature.gauss_legendre(quadrature.NODES_PER_PANEL)
    half = np.clip(0.5 * (upper - lower), 0, None)
    middle = 0.5 * (upper + lower)
    u = middle[:, None] + half[:, None] * nodes[None, :]
    integrand = _EpanechnikovShape.pdf(u / ratio) / ratio * _EpanechnikovShape.pdf(grid[:, None] - u)
    values = (integrand @ weights) * half
    grid.setflags(write=False)
    values.setflags(write=False)
    return grid, values


_SHAPES = {shape.name: shape for shape in (_GaussianShape(), _EpanechnikovShape())}


def _shape_by_name(name: str):
    return _SHAPES[name]


class Kernel:
    """
    A symmetric, integrable, bounded univariate kernel

    :param shape: name of the base shape ("gaussian" or "epanechnikov")
    :param weights: mixture weights w_i, summing to one
    :param scales: mixture scales s_i, positive
    :param order: order of the kernel (moments 1 ... order - 1 vanish)
    """
    def __init__(self, shape: str = "gaussian", weights=(1.0,), scales=(1.0,), order: int = 2):
        if shape not in _SHAPES:
            raise InvalidArgument("Unknown kernel shape {!r}, expected one of {}".format(shape, sorted(_SHAPES)))
        self.shape = _SHAPES[shape]
        self.weights = tuple(float(w) for w in weights)
        self.scales = tuple(float(s) for s in scales)
        self.order = int(order)
        if len(self.weights) != len(self.scales) or not self.weights:
            raise InvalidArgument("Kernel weights and scales must be non-empty and of equal length")
        if any(s <= 0 for s in self.scales):
            raise InvalidArgument("Kernel scales must be positive")
        if abs(math.fsum(self.weights) - 1) > 1e-12:
            raise InvalidArgument("Kernel weights must sum to one, got {}".format(math.fsum(self.weights)))

    @property
    def family(self) -> str:
        """ gaussian, epanechnikov or order_l """
        return self.shape.name if len(self.weights) == 1 else "order_l"

    @property
    def identifier(self) -> str:
        """ string identifier accepted by :func:`kernel_from_id` """
        if len(self.weights) == 1:
            return self.shape.name
        return "order:{}:{}".format(self.order, self.shape.name)

    def __repr__(self):
        return "Kernel({!r})".format(self.identifier)

    def __eq__(self, other):
        return (isinstance(other, Kernel) and self.shape.name == other.shape.name
                and self.weights == other.weights and self.scales == other.scales)

    def __hash__(self):
        return hash((self.shape.name, self.weights, self.scales))

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        total = np.zeros_like(u)
        for weight, scale in zip(self.weights, self.scales):
            total = total + weight * self.shape.pdf(u / scale) / scale
        return total

    def rescaled(self, h: float, u):
        """
        K_h(u) = K(u / h) / h

        :param h: positive bandwidth
        :param u: evaluation points
        """
        return self(np.asarray(u, dtype=float) / h) / h

    def cdf(self, z):
        """ ∫_{-∞}^{z} K(u) du """
        z = np.asarray(z, dtype=float)
        total = np.zeros_like(z)
        for weight, scale in zip(self.weights, self.scales):
            total = total + weight * self.shape.cdf(z / scale)
        return total

    @property
    def radius(self) -> float:
        """ radius of the support, infinite for gaussian kernels """
        return self.shape.radius * max(self.scales)

    @property
    def integration_radius(self) -> float:
        """ radius of the domain used for quadratures over the kernel """
        return self.radius if math.isfinite(self.radius) else GAUSSIAN_REACH * max(self.scales)

    @property
    def breakpoints(self) -> tuple:
        """ points where the kernel is not smooth """
        if math.isfinite(self.shape.radius):
            return tuple(sorted({sign * s for s in self.scales for sign in (-1, 1)}))
        return ()

    def _integrate(self, func, breakpoints=()) -> float:
        reach = self.integration_radius
        return quadrature.integrate(func, -reach, reach, breakpoints=tuple(self.breakpoints) + tuple(breakpoints))

    def moment(self, k: int) -> float:
        """ ∫ u^k K(u) du, by quadrature """
        return self._integrate(lambda u: u ** k * self(u))

    @functools.cached_property
    def norm_l2sq(self) -> float:
        """ ‖K‖² """
        return self.inner(1.0, 1.0)

    @functools.cached_property
    def norm_l1(self) -> float:
        """ ‖K‖₁ """
        if all(w >= 0 for w in self.weights):
            return 1.0
        return self._integrate(lambda u: np.abs(self(u)), self._sign_changes())

    @functools.cached_property
    def norm_sup(self) -> float:
        """ ‖K‖_∞ """
        if len(self.weights) == 1:
            return self.shape.sup / self.scales[0]
        probe = np.linspace(0, self.integration_radius, 20001)
        values = np.abs(self(probe))
        best = int(np.argmax(values))
        step = probe[1] - probe[0]
        refined = optimize.minimize_scalar(lambda u: -abs(float(self(u))), method="bounded",
                                           bounds=(max(probe[best] - step, 0.0), probe[best] + step),
                                           options={"xatol": 1e-12})
        return max(float(values[best]), -float(refined.fun))

    def _sign_changes(self) -> tuple:
        """ roots of K, used as breakpoints of |K| """
        probe = np.linspace(-self.integration_radius, self.integration_radius, 40001)
        values = self(probe)
        roots = []
        for index in np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]:
            roots.append(optimize.brentq(lambda u: float(self(u)), probe[index], probe[index + 1], xtol=1e-14))
        return tuple(roots)

    def inner(self, a: float, b: float) -> float:
        """
        ⟨K_a, K_b⟩ for two positive scalar bandwidths

        :param a: first bandwidth
        :param b: second bandwidth
        """
        return math.fsum(wi * wj * self.shape.inner(a * si, b * sj)
                         for wi, si in zip(self.weights, self.scales)
                         for wj, sj in zip(self.weights, self.scales))

    def convolution(self, a: float, b: float, t):
        """
        (K_a ⋆ K̃_b)(t), K̃ being K reflected, which equals K here

        :param a: first bandwidth
        :param b: second bandwidth
        :param t: evaluation points
        """
        t = np.asarray(t, dtype=float)
        total = np.zeros_like(t)
        for wi, si in zip(self.weights, self.scales):
            for wj, sj in zip(self.weights, self.scales):
                total = total + wi * wj * self.shape.convolution(a * si, b * sj, t)
        return total

    def reach(self, a: float, b: float) -> float:
        """ radius beyond which (K_a ⋆ K_b) vanishes or is negligible """
        largest = max(self.scales)
        return self.shape.reach(a * largest, b * largest)


class ProductKernel:
    """
    Product kernel K(x) = ∏_j K_1(x_j) on R^d, the same univariate factor on every axis

    :param kernel: the univariate factor
    :param dimension: number of axes, at least one
    """
    def __init__(self, kernel: Kernel, dimension: int = 1):
        if int(dimension) < 1:
            raise InvalidArgument("A product kernel needs a dimension of at least 1, got {}".format(dimension))
        self.kernel = kernel
        self.dimension = int(dimension)

    def __repr__(self):
        return "ProductKernel({!r}, dimension={})".format(self.kernel.identifier, self.dimension)

    def __eq__(self, other):
        return isinstance(other, ProductKernel) and self.kernel == other.kernel and self.dimension == other.dimension

    def __hash__(self):
        return hash((self.kernel, self.dimension))

    def check(self, *bandwidths: Bandwidth) -> None:
        """
        Raises InvalidArgument if a bandwidth does not match the kernel's dimension

        :param bandwidths: bandwidths to check
        """
        for h in bandwidths:
            if h.dimension != self.dimension:
                raise InvalidArgument("Bandwidth {} has dimension {}, kernel has dimension {}".format(
                    h, h.dimension, self.dimension))

    @property
    def norm_l1(self) -> float:
        return self.kernel.norm_l1 ** self.dimension

    @property
    def norm_sup(self) -> float:
        return self.kernel.norm_sup ** self.dimension

    @property
    def norm_l2sq(self) -> float:
        return self.kernel.norm_l2sq ** self.dimension

    def admissible_volume(self, n: int) -> float:
        """ smallest bandwidth volume ‖K‖∞‖K‖₁/n covered by the oracle inequality """
        return self.norm_sup * self.norm_l1 / n

    def evaluate(self, h: Bandwidth, x) -> np.ndarray:
        """
        K_h(x) for an (m, d) array of points

        :param h: bandwidth
        :param x: points, one per row
        """
        self.check(h)
        x = np.asarray(x, dtype=float).reshape(-1, self.dimension)
        values = np.ones(len(x))
        for axis, component in enumerate(h.components):
            values = values * self.kernel.rescaled(component, x[:, axis])
        return values

    def l2_norm_scaled(self, h: Bandwidth) -> float:
        self.check(h)
        return math.prod(self.kernel.norm_l2sq / component for component in h.components)

    def inner(self, h: Bandwidth, h2: Bandwidth) -> float:
        self.check(h, h2)
        if h == h2:
            return self.l2_norm_scaled(h)
        return math.prod(self.kernel.inner(a, b) for a, b in zip(h.components, h2.components))

    def convolution(self, a: Bandwidth, b: Bandwidth, t) -> np.ndarray:
        """
        (K_a ⋆ K̃_b)(t) for an (m, d) array of points, as a product of per-axis convolutions
        """
        self.check(a, b)
        t = np.asarray(t, dtype=float).reshape(-1, self.dimension)
        values = np.ones(len(t))
        for axis, (p, q) in enumerate(zip(a.components, b.components)):
            values = values * self.kernel.convolution(p, q, t[:, axis])
        return values

    def reach(self, a: Bandwidth, b: Bandwidth) -> np.ndarray:
        """ per-axis radius beyond which (K_a ⋆ K_b) vanishes or is negligible """
        return np.array([self.kernel.reach(p, q) for p, q in zip(a.components, b.components)])


def as_product_kernel(K, dimension: int) -> ProductKernel:
    """
    Accepts a Kernel (used on every axis) or a ProductKernel of matching dimension

    :param K: kernel to coerce
    :param dimension: expected dimension
    """
    if isinstance(K, ProductKernel):
        if K.dimension != dimension:
            raise InvalidArgument("Kernel dimension {} does not match dimension {}".format(K.dimension, dimension))
        return K
    if isinstance(K, Kernel):
        return ProductKernel(K, dimension)
    raise InvalidArgument("Expected a Kernel or ProductKernel, got {!r}".format(K))


def _prepare(K, *bandwidths):
    bandwidths = [Bandwidth.of(h) for h in bandwidths]
    for other in bandwidths[1:]:
        _check_dimensions(bandwidths[0], other)
    return as_product_kernel(K, bandwidths[0].dimension), bandwidths


def kernel_l2_norm_scaled(K, h) -> float:
    """
    ‖K_h‖² = ‖K‖² / ∏h_j

    :param K: Kernel or ProductKernel
    :param h: bandwidth
    """
    kernel, (h,) = _prepare(K, h)
    return kernel.l2_norm_scaled(h)


def cross_inner(K, h, h2) -> float:
    """
    ⟨K_h, K_h2⟩

    :param K: Kernel or ProductKernel
    :param h: first bandwidth
    :param h2: second bandwidth
    """
    kernel, (h, h2) = _prepare(K, h, h2)
    return kernel.inner(h, h2)


def diff_l2_norm(K, h, hmin) -> float:
    """
    ‖K_hmin - K_h‖², never negative

    :param K: Kernel or ProductKernel
    :param h: bandwidth
    :param hmin: reference bandwidth
    """
    kernel, (h, hmin) = _prepare(K, h, hmin)
    if h == hmin:
        return 0.0
    value = kernel.l2_norm_scaled(hmin) + kernel.l2_norm_scaled(h) - 2 * kernel.inner(h, hmin)
    return max(value, 0.0)


def pair_interaction(K, h, hmin, t):
    """
    G(t) = ((K_h - K_hmin) ⋆ (K̃_h - K̃_hmin))(t)

    ‖f̂_h - f̂_hmin‖² is the average of G over all pairs of observations.

    :param K: Kernel or ProductKernel
    :param h: bandwidth
    :param hmin: reference bandwidth
    :param t: a d-dimensional point, or an (m, d) array of points
    :return: a float for a single point, an array otherwise
    """
    kernel, (h, hmin) = _prepare(K, h, hmin)
    points = np.asarray(t, dtype=float)
    single = points.ndim <= 1 and points.size == kernel.dimension
    points = points.reshape(-1, kernel.dimension)
    values = kernel.convolution(h, h, points) - 2 * kernel.convolution(h, hmin, points) \
        + kernel.convolution(hmin, hmin, points)
    return float(values[0]) if single else values


def build_order_l_kernel(base: Kernel, l: int) -> Kernel:
    """
    Builds a kernel of order l from a gaussian or epanechnikov kernel

    The result is K_l(u) = Σ_{i=1}^{m} C(m, i) (-1)^{i+1} K(u / i) / i, with m the smallest odd integer above
    every even moment order to cancel. Moments of orders 1 ... l - 1 vanish and the integral stays one.

    :param base: plain gaussian or epanechnikov kernel
    :param l: order, at least 2
    :return: the order-l kernel (the base itself for l = 2)
    """
    if int(l) != l or l < 2:
        raise InvalidArgument("Kernel order must be an integer of at least 2, got {}".format(l))
    if base.family not in ("gaussian", "epanechnikov") or base.scales != (1.0,):
        raise InvalidArgument("Order-l kernels are built from a plain gaussian or epanechnikov kernel")
    l = int(l)
    components = 2 * ((l - 1) // 2) + 1
    if components == 1:
        return base
    weights = [math.comb(components, i) * (-1) ** (i + 1) for i in range(1, components + 1)]
    kernel = Kernel(base.shape.name, weights=weights, scales=range(1, components + 1), order=l)
    for k in range(1, l):
        moment = kernel.moment(k)
        if abs(moment) > MOMENT_TOLERANCE:
            raise PcoPyckerError("Moment {} of the order-{} kernel is {}, not zero".format(k, l, moment))
    logger.debug("built order-%d %s kernel with %d components", l, base.shape.name, components)
    return kernel


def kernel_from_id(identifier: str) -> Kernel:
    """
    Parses "gaussian", "epanechnikov" or "order:<l>:<base>"

    :param identifier: the kernel identifier
    """
    parts = str(identifier).strip().split(":")
    if len(parts) == 1 and parts[0] in _SHAPES:
        return Kernel(parts[0])
    if len(parts) == 3 and parts[0] == "order" and parts[2] in _SHAPES:
        try:
            order = int(parts[1])
        except ValueError:
            raise InvalidArgument("Invalid kernel order in {!r}".format(identifier)) from None
        return build_order_l_kernel(Kernel(parts[2]), order)
    raise InvalidArgument("Unknown kernel identifier {!r}".format(identifier))
