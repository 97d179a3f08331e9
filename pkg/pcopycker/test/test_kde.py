#!/usr/bin/env python3

"""
Tests for samples and kernel density estimates
"""


import math
import unittest

import numpy as np

from pcopycker import kde
from pcopycker.densities import standard_normal, uniform
from pcopycker.exceptions import InvalidArgument
from pcopycker.kernels import Kernel
from pcopycker.test import normal_sample


__author__ = "PcoPycker developers"


class SampleTests(unittest.TestCase):
    def test_univariate_reshape(self):
        sample = kde.Sample([0.1, 0.2, 0.3])
        self.assertEqual((sample.n, sample.dimension), (3, 1))

    def test_immutable(self):
        sample = kde.Sample([[0.0, 1.0]])
        with self.assertRaises(ValueError):
            sample.observations[0, 0] = 2.0

    def test_invalid_observations(self):
        for observations in ([], [0.0, math.nan], [[0.0, math.inf]]):
            with self.subTest(observations=observations), self.assertRaises(InvalidArgument):
                kde.Sample(observations)

    def test_transformations(self):
        sample = kde.Sample([[0.0, 1.0], [2.0, 3.0]])
        np.testing.assert_array_equal(sample.shifted([1.0, -1.0]).observations, [[1.0, 0.0], [3.0, 2.0]])
        np.testing.assert_array_equal(sample.scaled(2.0).observations, [[0.0, 2.0], [4.0, 6.0]])
        self.assertEqual(sample.concatenate(sample).n, 4)
        with self.assertRaises(InvalidArgument):
            sample.concatenate(kde.Sample([1.0]))


class EvaluateTests(unittest.TestCase):
    def test_single_observation(self):
        value = kde.evaluate(kde.Sample([0.0]), Kernel("gaussian"), 1.0, [0.0])
        self.assertAlmostEqual(value[0], 1 / math.sqrt(2 * math.pi), places=6)

    def test_nonnegative_for_nonnegative_kernel(self):
        sample = kde.Sample(normal_sample(30))
        values = kde.evaluate(sample, Kernel("epanechnikov"), 0.2, np.linspace(-4, 4, 101))
        self.assertTrue(np.all(values >= 0))

    def test_chunking_does_not_matter(self):
        sample = kde.Sample(normal_sample(40, seed=3))
        points = np.linspace(-3, 3, 50)
        whole = kde.evaluate(sample, Kernel("gaussian"), 0.3, points)
        pieces = np.concatenate([kde.evaluate(sample, Kernel("gaussian"), 0.3, points[:17]),
                                 kde.evaluate(sample, Kernel("gaussian"), 0.3, points[17:])])
        np.testing.assert_array_equal(whole, pieces)

    def test_linear_in_the_sample(self):
        rng = np.random.default_rng(11)
        for kernel in (Kernel("gaussian"), Kernel("epanechnikov")):
            for n1, n2 in ((1, 7), (25, 40), (60, 3)):
                first, second = kde.Sample(rng.normal(size=n1)), kde.Sample(rng.normal(1.0, 2.0, size=n2))
                points, h = rng.uniform(-4.0, 4.0, size=30), rng.uniform(0.1, 1.0)
                expected = (n1 * kde.evaluate(first, kernel, h, points) +
                            n2 * kde.evaluate(second, kernel, h, points)) / (n1 + n2)
                with self.subTest(kernel=kernel, n1=n1, n2=n2):
                    np.testing.assert_allclose(kde.evaluate(first.concatenate(second), kernel, h, points), expected,
                                               rtol=0, atol=1e-12)

    def test_translation_equivariance(self):
        rng = np.random.default_rng(12)
        for kernel in (Kernel("gaussian"), Kernel("epanechnikov")):
            for shift in (-3.5, 0.25, 10.0):
                sample = kde.Sample(rng.normal(size=50))
                points, h = rng.uniform(-3.0, 3.0, size=40), rng.uniform(0.1, 1.0)
                with self.subTest(kernel=kernel, shift=shift):
                    np.testing.assert_allclose(kde.evaluate(sample.shifted([shift]), kernel, h, points + shift),
                                               kde.evaluate(sample, kernel, h, points), rtol=0, atol=1e-10)

    def test_dimension_mismatch(self):
        with self.assertRaises(InvalidArgument):
            kde.evaluate(kde.Sample([0.0, 1.0]), Kernel("gaussian"), (0.5, 0.5), [0.0])

    def test_bivariate(self):
        sample = kde.Sample(normal_sample(20, 2))
        values = kde.evaluate(sample, Kernel("gaussian"), (0.5, 0.8), [[0.0, 0.0], [1.0, -1.0]])
        self.assertEqual(values.shape, (2,))


class EstimateTests(unittest.TestCase):
    def test_integrates_to_one(self):
        for kernel in (Kernel("gaussian"), Kernel("epanechnikov")):
            with self.subTest(kernel=kernel):
                estimate = kde.estimate(kde.Sample(normal_sample(50)), kernel, 0.4)
                self.assertLess(kde.normalization_error(estimate), 0.01)

    def test_bivariate_integrates_to_one(self):
        estimate = kde.estimate(kde.Sample(normal_sample(20, 2)), Kernel("gaussian"), (0.5, 0.7), size=128)
        self.assertEqual(estimate.values.shape, (128, 128))
        self.assertLess(kde.normalization_error(estimate), 0.01)

    def test_panel_axes_are_exact_for_compact_kernels(self):
        sample = kde.Sample(normal_sample(10))
        kernel = Kernel("epanechnikov")
        axes, weights = kde.panel_axes(sample, kernel, [0.3], -5.0, 5.0)
        estimate = kde.estimate(sample, kernel, 0.3, axes=axes, weights=weights)
        self.assertAlmostEqual(estimate.integrate(), 1.0, places=12)

    def test_squared_distance_needs_the_same_grid(self):
        sample = kde.Sample(normal_sample(10))
        first = kde.estimate(sample, Kernel("gaussian"), 0.3, size=64)
        second = kde.estimate(sample, Kernel("gaussian"), 0.6, size=64)
        with self.assertRaises(InvalidArgument):
            first.squared_distance(second)
        self.assertEqual(first.squared_distance(first), 0.0)

    def test_trapezoid_weights(self):
        np.testing.assert_allclose(kde.trapezoid_weights([0.0, 1.0, 3.0]), [0.5, 1.5, 1.0])
        with self.assertRaises(InvalidArgument):
            kde.trapezoid_weights([0.0])


class PopulationSmoothingTests(unittest.TestCase):
    def test_uniform_center(self):
        value = kde.population_smoothing(uniform(), Kernel("gaussian"), 0.1, [0.5])
        self.assertLess(abs(value[0] - 1.0), 1e-4)

    def test_gaussian_closed_form(self):
        value = kde.population_smoothing(standard_normal(), Kernel("gaussian"), 0.5, [0.0])
        self.assertAlmostEqual(value[0], 1 / math.sqrt(2 * math.pi * 1.25), places=14)

    def test_small_bandwidths_recover_the_density(self):
        f = standard_normal()
        for kernel in (Kernel("gaussian"), Kernel("epanechnikov")):
            for method in ("auto", "quadrature"):
                value = kde.population_smoothing(f, kernel, 1e-3, [0.0], method=method)
                with self.subTest(kernel=kernel, method=method):
                    self.assertLess(abs(value[0] - f.pdf([0.0])[0]), 1e-3)

    def test_needs_a_registered_density(self):
        with self.assertRaises(InvalidArgument):
            kde.population_smoothing(lambda x: x, Kernel("gaussian"), 0.1, [0.5])


if __name__ == "__main__":
    unittest.main()
