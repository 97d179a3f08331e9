#!/usr/bin/env python3

"""
Tests for the reference selectors
"""


import unittest

import numpy as np

from pcopycker import kde
from pcopycker.baselines import BaselineMethod, BaselineSpec, baseline_select, gl_select, gl_table, lepski_select, \
    lscv_scores, lscv_select
from pcopycker.exceptions import InvalidArgument, UnsupportedOperation
from pcopycker.kernels import Bandwidth, Kernel, ProductKernel
from pcopycker.pco import BandwidthGrid, ComparisonProfile, PairwiseSums
from pcopycker.test import normal_sample


__author__ = "PcoPycker developers"


GAUSSIAN = Kernel("gaussian")


class BaselineSpecTests(unittest.TestCase):
    def test_defaults(self):
        spec = BaselineSpec()
        self.assertIs(spec.method, BaselineMethod.gl)
        self.assertEqual(spec.kappa2, 2 * spec.kappa1)

    def test_invalid_constants(self):
        for kappa in (-1.0, float("inf"), float("nan")):
            with self.subTest(kappa=kappa), self.assertRaises(InvalidArgument):
                BaselineSpec(kappa1=kappa)
        with self.assertRaises(ValueError):
            BaselineSpec("bootstrap")


class SelectorTests(unittest.TestCase):
    def setUp(self):
        self.sample = kde.Sample(normal_sample(150, seed=31))
        self.grid = BandwidthGrid.geometric(0.01, 1.0, 12)
        self.sums = PairwiseSums(self.sample, GAUSSIAN)

    def test_singleton_grid(self):
        grid = BandwidthGrid([0.4])
        for method in BaselineMethod:
            with self.subTest(method=method):
                self.assertEqual(baseline_select(BaselineSpec(method), self.sample, GAUSSIAN, grid), Bandwidth(0.4))

    def test_selections_are_grid_members(self):
        for method in BaselineMethod:
            with self.subTest(method=method):
                selected = baseline_select(BaselineSpec(method), self.sample, GAUSSIAN, self.grid, self.sums)
                self.assertIn(selected, self.grid.bandwidths)

    def test_lepski_extremes(self):
        self.assertEqual(lepski_select(self.sample, GAUSSIAN, self.grid, BaselineSpec("lepski", kappa1=1e12)),
                         self.grid.hmax)
        self.assertEqual(lepski_select(self.sample, GAUSSIAN, self.grid, BaselineSpec("lepski", kappa1=0.0)),
                         self.grid.hmin)

    def test_lepski_is_univariate(self):
        sample = kde.Sample(normal_sample(20, 2))
        with self.assertRaises(UnsupportedOperation):
            lepski_select(sample, GAUSSIAN, BandwidthGrid([(0.2, 0.2), (0.4, 0.4)]))

    def test_gl_with_huge_constant(self):
        self.assertEqual(gl_select(self.sample, GAUSSIAN, self.grid, BaselineSpec(kappa1=1e12)), self.grid.hmax)

    def test_gl_table(self):
        table = gl_table(self.sample, GAUSSIAN, self.grid, sums=self.sums)
        np.testing.assert_allclose(table.total, table.bias_proxy + table.variance_proxy)
        self.assertTrue(np.all(table.bias_proxy >= 0))
        self.assertEqual(table.total[table.selected_index], table.total.min())

    def test_gl_without_variance_is_a_comparison_to_overfitting(self):
        kappa2 = 2.0
        table = gl_table(self.sample, GAUSSIAN, self.grid, BaselineSpec(kappa1=0.0, kappa2=kappa2), self.sums)
        profile = ComparisonProfile(self.sample, GAUSSIAN, self.grid, sums=self.sums)
        np.testing.assert_array_less(profile.comparison - 1e-15, table.bias_proxy)
        if not np.all(table.maximizer == 0):
            self.skipTest("the supremum is not attained at h_min on this sample")
        np.testing.assert_allclose(table.bias_proxy, profile.comparison, rtol=1e-12, atol=1e-15)
        kernel = ProductKernel(GAUSSIAN)
        penalties = [kappa2 * kernel.l2_norm_scaled(h) / self.sample.n for h in self.grid]
        self.assertEqual(table.selected, profile.table_with_penalty(penalties).selected)

    def test_multivariate_gl(self):
        sample = kde.Sample(normal_sample(40, 2, seed=2))
        grid = BandwidthGrid.geometric((0.1, 0.1), (1.0, 1.0), (4, 4))
        self.assertIn(gl_select(sample, GAUSSIAN, grid), grid.bandwidths)


class CrossValidationTests(unittest.TestCase):
    def test_needs_two_observations(self):
        with self.assertRaises(InvalidArgument):
            lscv_select(kde.Sample([0.3]), GAUSSIAN, BandwidthGrid([0.1, 0.2]))

    def test_score_matches_leave_one_out(self):
        sample = kde.Sample(normal_sample(12, seed=5))
        grid = BandwidthGrid([0.2, 0.5])
        scores = lscv_scores(sample, GAUSSIAN, grid)
        observations = sample.observations[:, 0]
        sums = PairwiseSums(sample, GAUSSIAN)
        for position, h in enumerate(grid):
            leave_one_out = [kde.evaluate(kde.Sample(np.delete(observations, i)), GAUSSIAN, h, [observations[i]])[0]
                             for i in range(sample.n)]
            expected = sums.convolution_sum(h, h) - 2 * np.mean(leave_one_out)
            with self.subTest(h=h):
                self.assertAlmostEqual(scores[position], expected, places=12)

    def test_selection(self):
        sample = kde.Sample(normal_sample(300, seed=17))
        selected = lscv_select(sample, GAUSSIAN, BandwidthGrid.geometric(0.01, 1.0, 15))
        self.assertGreater(selected.volume, 0.05)


if __name__ == "__main__":
    unittest.main()
