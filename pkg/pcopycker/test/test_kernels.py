#!/usr/bin/env python3

"""
Tests for kernels, bandwidths and the L2 quantities of rescaled kernels
"""


import itertools
import math
import pickle
import unittest

import numpy as np

from pcopycker import quadrature
from pcopycker.exceptions import InvalidArgument
from pcopycker.kernels import Bandwidth, Kernel, ProductKernel, build_order_l_kernel, cross_inner, \
    diff_l2_norm, kernel_from_id, kernel_l2_norm_scaled, pair_interaction


__author__ = "PcoPycker developers"


BANDWIDTHS = (0.01, 0.1, 1.0, 10.0)


def squared_integral(func, small: float, large: float, reach: float) -> float:
    """ quadrature of func over [-reach·large, reach·large], with extra panels around the narrow kernel """
    return quadrature.integrate(func, -reach * large, reach * large, breakpoints=(-reach * small, reach * small))


class BandwidthTests(unittest.TestCase):
    def test_coercion(self):
        self.assertEqual(Bandwidth.of(0.5), Bandwidth((0.5,)))
        self.assertEqual(Bandwidth.of([0.5, 2.0]).dimension, 2)

    def test_invalid_components(self):
        for value in (0.0, -1.0, math.inf, math.nan, []):
            with self.subTest(value=value), self.assertRaises(InvalidArgument):
                Bandwidth.of(value)

    def test_volume_join_order(self):
        first, second = Bandwidth((0.5, 2.0)), Bandwidth((1.0, 1.0))
        self.assertEqual(first.volume, 1.0)
        self.assertEqual(first.join(second), Bandwidth((1.0, 2.0)))
        self.assertTrue(Bandwidth((0.5, 1.0)).is_below(second))
        self.assertFalse(first.is_below(second))

    def test_dimension_mismatch(self):
        with self.assertRaises(InvalidArgument):
            Bandwidth(0.5).join(Bandwidth((0.5, 0.5)))


class GaussianKernelTests(unittest.TestCase):
    def setUp(self):
        self.kernel = Kernel("gaussian")

    def test_unit_norm(self):
        self.assertAlmostEqual(kernel_l2_norm_scaled(self.kernel, 1.0), 0.2820948, places=7)

    def test_cross_inner(self):
        self.assertAlmostEqual(cross_inner(self.kernel, 1.0, 1.0), 0.2820948, places=7)
        self.assertAlmostEqual(cross_inner(self.kernel, 0.5, 0.1), 1 / math.sqrt(2 * math.pi * 0.26), places=12)
        self.assertAlmostEqual(cross_inner(self.kernel, 0.5, 0.1), 0.782390, places=6)

    def test_difference_norm(self):
        self.assertEqual(diff_l2_norm(self.kernel, 0.3, 0.3), 0.0)
        self.assertAlmostEqual(diff_l2_norm(self.kernel, 0.5, 0.1), 1.820358, delta=2e-6)

    def test_pair_interaction_at_zero(self):
        self.assertAlmostEqual(pair_interaction(self.kernel, 0.5, 0.1, 0.0), 1.820358, delta=2e-6)
        self.assertAlmostEqual(pair_interaction(self.kernel, 0.5, 0.1, 0.0), diff_l2_norm(self.kernel, 0.5, 0.1),
                               places=12)

    def test_pair_interaction_on_arrays(self):
        values = pair_interaction(self.kernel, 0.5, 0.1, np.array([[0.0], [0.2], [3.0]]))
        self.assertEqual(values.shape, (3,))
        self.assertAlmostEqual(values[0], diff_l2_norm(self.kernel, 0.5, 0.1), places=12)

    def test_norms_match_quadrature(self):
        for h in BANDWIDTHS:
            with self.subTest(h=h):
                oracle = squared_integral(lambda u: self.kernel.rescaled(h, u) ** 2, h, h, 12.0)
                self.assertLess(abs(kernel_l2_norm_scaled(self.kernel, h) - oracle) / oracle, 1e-8)

    def test_inner_products_match_quadrature(self):
        for a, b in itertools.combinations(BANDWIDTHS, 2):
            with self.subTest(a=a, b=b):
                oracle = squared_integral(lambda u: self.kernel.rescaled(a, u) * self.kernel.rescaled(b, u),
                                          min(a, b), max(a, b), 12.0)
                self.assertLess(abs(cross_inner(self.kernel, a, b) - oracle) / oracle, 1e-8)

    def test_difference_norms_match_quadrature(self):
        for a, b in itertools.combinations(BANDWIDTHS, 2):
            with self.subTest(a=a, b=b):
                oracle = squared_integral(lambda u: (self.kernel.rescaled(a, u) - self.kernel.rescaled(b, u)) ** 2,
                                          min(a, b), max(a, b), 12.0)
                self.assertLess(abs(diff_l2_norm(self.kernel, b, a) - oracle) / oracle, 1e-8)

    def test_sup_and_l1_norms(self):
        self.assertAlmostEqual(self.kernel.norm_sup, 1 / math.sqrt(2 * math.pi), places=14)
        self.assertEqual(self.kernel.norm_l1, 1.0)

    def test_pickles(self):
        self.assertEqual(pickle.loads(pickle.dumps(self.kernel)), self.kernel)


class EpanechnikovKernelTests(unittest.TestCase):
    def setUp(self):
        self.kernel = Kernel("epanechnikov")

    def test_norms(self):
        for h in BANDWIDTHS:
            with self.subTest(h=h):
                self.assertAlmostEqual(kernel_l2_norm_scaled(self.kernel, h) * h, 0.6, places=12)

    def test_inner_products_match_quadrature(self):
        for a, b in itertools.combinations(BANDWIDTHS, 2):
            with self.subTest(a=a, b=b):
                oracle = squared_integral(lambda u: self.kernel.rescaled(a, u) * self.kernel.rescaled(b, u),
                                          min(a, b), max(a, b), 1.0)
                self.assertLess(abs(cross_inner(self.kernel, a, b) - oracle) / oracle, 1e-8)

    def test_pair_interaction_matches_difference_norm(self):
        for a, b in ((0.5, 0.1), (1.0, 0.25)):
            with self.subTest(a=a, b=b):
                self.assertAlmostEqual(pair_interaction(self.kernel, a, b, 0.0), diff_l2_norm(self.kernel, a, b),
                                       places=7)

    def test_convolution_vanishes_beyond_reach(self):
        self.assertEqual(float(self.kernel.convolution(0.5, 0.25, np.array([0.76]))[0]), 0.0)

    def test_breakpoints(self):
        self.assertEqual(self.kernel.breakpoints, (-1.0, 1.0))


class OrderKernelTests(unittest.TestCase):
    def test_order_two_is_the_base(self):
        base = Kernel("gaussian")
        self.assertIs(build_order_l_kernel(base, 2), base)

    def test_components(self):
        self.assertEqual(len(build_order_l_kernel(Kernel("gaussian"), 4).weights), 3)
        self.assertEqual(len(build_order_l_kernel(Kernel("gaussian"), 6).weights), 5)

    def test_vanishing_moments(self):
        for base in ("gaussian", "epanechnikov"):
            kernel = build_order_l_kernel(Kernel(base), 4)
            with self.subTest(base=base):
                self.assertAlmostEqual(kernel.moment(0), 1.0, places=8)
                for k in (1, 2, 3):
                    self.assertLess(abs(kernel.moment(k)), 1e-6)
                self.assertGreater(abs(kernel.moment(4)), 1e-3)

    def test_negative_lobes(self):
        kernel = kernel_from_id("order:4:gaussian")
        self.assertGreater(kernel.norm_l1, 1.0)
        self.assertGreaterEqual(kernel.norm_sup, float(kernel(0.0)))

    def test_invalid_order(self):
        with self.assertRaises(InvalidArgument):
            build_order_l_kernel(Kernel("gaussian"), 1)

    def test_identifier_round_trip(self):
        kernel = kernel_from_id("order:4:epanechnikov")
        self.assertEqual(kernel.identifier, "order:4:epanechnikov")
        self.assertEqual(kernel_from_id(kernel.identifier), kernel)


class KernelValidationTests(unittest.TestCase):
    def test_unknown_identifier(self):
        for identifier in ("cosine", "order:x:gaussian", "order:4"):
            with self.subTest(identifier=identifier), self.assertRaises(InvalidArgument):
                kernel_from_id(identifier)

    def test_weights_must_sum_to_one(self):
        with self.assertRaises(InvalidArgument):
            Kernel("gaussian", weights=(0.5,), scales=(1.0,))

    def test_product_kernel(self):
        kernel = ProductKernel(Kernel("gaussian"), 2)
        h = Bandwidth((0.5, 2.0))
        self.assertAlmostEqual(kernel.l2_norm_scaled(h), (1 / (2 * math.sqrt(math.pi))) ** 2, places=14)
        self.assertAlmostEqual(float(kernel.evaluate(h, [[0.0, 0.0]])[0]), 1 / (2 * math.pi), places=14)
        with self.assertRaises(InvalidArgument):
            kernel.check(Bandwidth(0.5))

    def test_admissible_volume(self):
        kernel = ProductKernel(Kernel("gaussian"), 1)
        self.assertAlmostEqual(kernel.admissible_volume(100), 1 / (100 * math.sqrt(2 * math.pi)), places=15)


if __name__ == "__main__":
    unittest.main()
