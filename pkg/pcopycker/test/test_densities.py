#!/usr/bin/env python3

"""
Tests for the test densities of the simulation laboratory
"""


import math
import unittest

import numpy as np
from scipy import stats

from pcopycker import quadrature
from pcopycker.densities import density_from_id, gaussian_mixture, registered_mixtures, standard_normal, uniform
from pcopycker.exceptions import InvalidArgument
from pcopycker.kernels import Kernel


__author__ = "PcoPycker developers"


class DensityTests(unittest.TestCase):
    def test_registry(self):
        self.assertTrue({"claw", "bimodal"} <= set(registered_mixtures()))

    def test_mass_is_one(self):
        for identifier in ("standard_normal", "claw", "bimodal"):
            f = density_from_id(identifier)
            with self.subTest(density=identifier):
                mass = quadrature.integrate(f.pdf, -12.0, 12.0)
                self.assertLess(abs(mass - 1.0), 1e-8)

    def test_uniform_mass(self):
        f = uniform()
        self.assertAlmostEqual(quadrature.integrate(f.pdf, -1.0, 2.0, breakpoints=(0.0, 1.0)), 1.0, places=10)

    def test_closed_form_norms(self):
        self.assertAlmostEqual(standard_normal().l2_norm_sq, 1 / (2 * math.sqrt(math.pi)), places=14)
        self.assertAlmostEqual(uniform().l2_norm_sq, 1.0, places=14)
        f = density_from_id("claw")
        oracle = quadrature.integrate(lambda x: f.pdf(x) ** 2, -12.0, 12.0)
        self.assertAlmostEqual(f.l2_norm_sq, oracle, places=10)

    def test_sampler_matches_distribution(self):
        for identifier in ("standard_normal", "claw", "bimodal"):
            f = density_from_id(identifier)
            with self.subTest(density=identifier):
                draws = f.sample(100000, np.random.default_rng(11))[:, 0]
                self.assertLess(stats.kstest(draws, f.cdf).statistic, 0.01)

    def test_sample_shape(self):
        draws = standard_normal(3).sample(10, np.random.default_rng(0))
        self.assertEqual(draws.shape, (10, 3))
        with self.assertRaises(InvalidArgument):
            standard_normal().sample(0, np.random.default_rng(0))

    def test_smoothed_uniform(self):
        value = uniform().smoothed(Kernel("gaussian"), 0.1, [0.5])
        self.assertLess(abs(value[0] - 1.0), 1e-4)

    def test_smoothing_methods_agree(self):
        f = density_from_id("bimodal")
        points = np.linspace(-3.0, 3.0, 7)
        for kernel in (Kernel("gaussian"), Kernel("epanechnikov")):
            with self.subTest(kernel=kernel):
                closed = f.smoothed(kernel, 0.3, points)
                numeric = f.smoothed(kernel, 0.3, points, method="quadrature")
                np.testing.assert_allclose(closed, numeric, rtol=1e-8, atol=1e-12)

    def test_mass_in_box(self):
        self.assertAlmostEqual(standard_normal(2).mass_in_box(0.0, math.inf), 0.25, places=14)
        self.assertAlmostEqual(uniform().mass_in_box(0.25, 0.5), 0.25, places=14)

    def test_scaling(self):
        f = standard_normal()
        scaled = f.scaled(2.0)
        self.assertEqual(scaled.scale, 2.0)
        self.assertAlmostEqual(scaled.l2_norm_sq, f.l2_norm_sq / 2, places=14)
        self.assertAlmostEqual(float(scaled.pdf([0.0])[0]), float(f.pdf([0.0])[0]) / 2, places=14)

    def test_mixture_from_mapping(self):
        f = density_from_id({"id": "gaussian_mixture", "weights": [0.3, 0.7], "means": [0.0, 2.0], "sds": [1.0, 0.5]})
        self.assertEqual(f.dimension, 1)
        self.assertAlmostEqual(float(f.cdf(100.0)), 1.0, places=14)

    def test_invalid_densities(self):
        with self.assertRaises(InvalidArgument):
            density_from_id("cauchy")
        with self.assertRaises(InvalidArgument):
            density_from_id({"id": "standard_normal", "colour": "blue"})
        with self.assertRaises(InvalidArgument):
            gaussian_mixture([0.5, 0.6], [0.0, 1.0], [1.0, 1.0])


if __name__ == "__main__":
    unittest.main()
