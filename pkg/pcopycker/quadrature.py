"""
Composite Gauss-Legendre quadrature with adaptive panel splitting

Every integral of this package that has no closed form goes through :func:`integrate`. The rule is deterministic:
for a given integrand and interval, the same panels are evaluated in the same order, so cached results are
bit-reproducible.
"""

import functools
import logging
import warnings

import numpy as np
from scipy.special import roots_legendre

from pcopycker.exceptions import InvalidArgument, QuadratureWarning


__author__ = "PcoPycker developers"

logger = logging.getLogger(__name__)

NODES_PER_PANEL = 64
RELATIVE_TOLERANCE = 1e-10
MAX_LEVEL = 12


@functools.lru_cache(maxsize=16)
def gauss_legendre(npoints: int = NODES_PER_PANEL):
    """
    Nodes and weights of the Gauss-Legendre rule on [-1, 1]

    :param npoints: number of nodes of the rule
    :return: tuple (nodes, weights), both read-only arrays
    """
    if npoints < 2:
        raise InvalidArgument("At least 2 nodes are required for a Gauss-Legendre rule")
    nodes, weights = roots_legendre(npoints)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def panel_nodes(edges, npoints: int = NODES_PER_PANEL):
    """
    Maps the Gauss-Legendre rule onto every panel delimited by the given edges

    :param edges: increasing sequence of panel edges
    :param npoints: nodes per panel
    :return: tuple (points, weights) flattened over all panels, in panel order
    """
    edges = np.asarray(edges, dtype=float)
    nodes, weights = gauss_legendre(npoints)
    half = 0.5 * np.diff(edges)
    middle = 0.5 * (edges[1:] + edges[:-1])
    points = middle[:, None] + half[:, None] * nodes[None, :]
    scaled = half[:, None] * weights[None, :]
    return points.ravel(), scaled.ravel()


def _edges(lower: float, upper: float, breakpoints, level: int):
    """ panel edges at a given refinement level, every initial segment split into 2**level panels """
    cuts = [lower] + sorted(b for b in breakpoints if lower < b < upper) + [upper]
    pieces = []
    for left, right in zip(cuts[:-1], cuts[1:]):
        pieces.append(np.linspace(left, right, 2 ** level + 1)[:-1])
    pieces.append(np.array([upper]))
    return np.concatenate(pieces)


def integrate(func, lower: float, upper: float, breakpoints=(), rtol: float = RELATIVE_TOLERANCE,
              atol: float = 0.0, npoints: int = NODES_PER_PANEL, max_level: int = MAX_LEVEL):
    """
    Integrates a vectorized function over [lower, upper]

    The interval is first cut at the breakpoints, then every segment is split in halves until two successive
    refinements differ by less than ``rtol`` relative (or ``atol`` absolute). The integrand may return an array of
    shape (..., len(x)), in which case every leading component is integrated and convergence is required for all.

    :param func: vectorized integrand, called with a 1-d array of abscissae
    :param lower: lower bound of the integral
    :param upper: upper bound of the integral
    :param breakpoints: points where the integrand is not smooth
    :param rtol: relative tolerance between successive refinements
    :param atol: absolute tolerance between successive refinements
    :param npoints: Gauss-Legendre nodes per panel
    :param max_level: maximal number of halvings
    :return: the integral, a float or an array matching the leading shape of the integrand
    """
    if not (np.isfinite(lower) and np.isfinite(upper)):
        raise InvalidArgument("Integration bounds must be finite, got [{}, {}]".format(lower, upper))
    if upper < lower:
        return -integrate(func, upper, lower, breakpoints, rtol, atol, npoints, max_level)
    if upper == lower:
        probe = np.asarray(func(np.array([lower])))
        return np.zeros(probe.shape[:-1]) if probe.ndim > 1 else 0.0

    previous = None
    for level in range(max_level + 1):
        points, weights = panel_nodes(_edges(lower, upper, breakpoints, level), npoints)
        estimate = np.asarray(func(points), dtype=float) @ weights
        if previous is not None:
            change = np.max(np.abs(estimate - previous))
            scale = np.max(np.abs(estimate))
            if change <= max(rtol * scale, atol) or change == 0.0:
                logger.debug("quadrature on [%g, %g] converged at level %d", lower, upper, level)
                return estimate if np.ndim(estimate) else float(estimate)
        previous = estimate

    warnings.warn("Quadrature on [{}, {}] did not reach rtol={} after {} halvings".format(
        lower, upper, rtol, max_level), QuadratureWarning)
    return previous if np.ndim(previous) else float(previous)
