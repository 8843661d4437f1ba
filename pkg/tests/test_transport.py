"""Testing of one dimensional and sliced Wasserstein distances."""

import logging
import sys
from unittest import TestCase, main

import numpy as np

from sliced_cnp.diffmath import check_gradient
from sliced_cnp.exceptions import ContractError
from sliced_cnp.transport import (EmpiricalDistribution, ProjectionSet,
                                  sample_projections, sliced_wasserstein_pow,
                                  sliced_wasserstein_report,
                                  wasserstein_1d_bruteforce,
                                  wasserstein_1d_pow)

logging.basicConfig(stream=sys.stderr)
log = logging.getLogger(__name__)
log.setLevel(logging.DEBUG)


class TestWasserstein1D(TestCase):

    def test_identical_samples(self):
        self.assertEqual(wasserstein_1d_pow([3, 1, 2], [1, 2, 3]).item(), 0.0)

    def test_shifted_samples(self):
        d = wasserstein_1d_pow([0.0, 1.0], [2.0, 3.0], p=2).item()
        self.assertAlmostEqual(d, 4.0)

    def test_matrix_inputs(self):
        a = np.array([[0.0], [1.0], [2.0]])
        b = np.array([[1.0, 2.0, 3.0]])
        self.assertAlmostEqual(wasserstein_1d_pow(a, b).item(), 1.0)

    def test_count_mismatch(self):
        with self.assertRaises(ContractError):
            wasserstein_1d_pow([1.0, 2.0], [1.0])

    def test_empty(self):
        with self.assertRaises(ContractError):
            wasserstein_1d_pow([], [])

    def test_power_below_one(self):
        with self.assertRaises(ContractError):
            wasserstein_1d_pow([1.0], [2.0], p=0.5)

    def test_matches_bruteforce(self):
        gen = np.random.default_rng(0)
        for _ in range(200):
            m = int(gen.integers(1, 8))
            p = float(gen.choice([1.0, 1.5, 2.0]))
            a, b = gen.uniform(-1, 1, m), gen.uniform(-1, 1, m)
            with self.subTest(m=m, p=p):
                self.assertAlmostEqual(wasserstein_1d_pow(a, b, p).item(),
                                       wasserstein_1d_bruteforce(a, b, p),
                                       delta=1e-12)

    def test_bruteforce_limit(self):
        with self.assertRaises(ContractError):
            wasserstein_1d_bruteforce(np.zeros(9), np.zeros(9))


class TestProjections(TestCase):

    def test_unit_rows(self):
        proj = sample_projections(100, 5, rng=1)
        self.assertEqual(proj.directions.shape, (100, 5))
        np.testing.assert_allclose(
            np.linalg.norm(proj.directions, axis=1), 1.0, atol=1e-12)

    def test_seed_reproducible(self):
        a = sample_projections(10, 3, rng=7).directions
        b = sample_projections(10, 3, rng=7).directions
        np.testing.assert_array_equal(a, b)

    def test_invalid_sizes(self):
        with self.assertRaises(ContractError):
            sample_projections(0, 2)
        with self.assertRaises(ContractError):
            sample_projections(5, 0)


class TestSlicedWasserstein(TestCase):

    def setUp(self):
        self.gen = np.random.default_rng(5)

    def test_zero_for_identical_clouds(self):
        X = self.gen.normal(size=(20, 3))
        proj = sample_projections(30, 3, rng=0)
        self.assertAlmostEqual(sliced_wasserstein_pow(X, X, proj).item(), 0.0)

    def test_one_dimension_reduces_to_1d(self):
        x, y = self.gen.normal(size=15), self.gen.normal(size=15)
        proj = sample_projections(7, 1, rng=2)
        for p in (1.0, 2.0, 3.0):
            with self.subTest(p=p):
                self.assertAlmostEqual(
                    sliced_wasserstein_pow(x, y, proj, p).item(),
                    wasserstein_1d_pow(x, y, p).item(), delta=1e-10)

    def test_point_mass_calibration(self):
        c, m = 2.0, 10
        X = np.zeros((m, 2))
        Y = np.tile([c, 0.0], (m, 1))
        proj = sample_projections(1000, 2, rng=3)
        value = sliced_wasserstein_pow(X, Y, proj, p=2).item()
        self.assertAlmostEqual(value, c ** 2 / 2, delta=0.1 * c ** 2 / 2)

    def test_separation_monotone(self):
        X = self.gen.normal(size=(30, 2))
        proj = sample_projections(2000, 2, rng=4)
        values = [sliced_wasserstein_pow(X, X + [shift, 0.0], proj).item()
                  for shift in (0.0, 0.5, 1.0, 2.0)]
        self.assertEqual(values, sorted(values))

    def test_gradient(self):
        Y = self.gen.normal(size=(12, 2))
        proj = sample_projections(20, 2, rng=6)
        err = check_gradient(
            lambda t: sliced_wasserstein_pow(t, Y, proj, p=2),
            self.gen.normal(size=(12, 2)))
        self.assertLessEqual(err, 1e-4)

    def test_dimension_mismatch(self):
        proj = sample_projections(5, 3, rng=0)
        with self.assertRaises(ContractError):
            sliced_wasserstein_pow(np.ones((4, 2)), np.ones((4, 2)), proj)

    def test_count_mismatch(self):
        proj = sample_projections(5, 2, rng=0)
        with self.assertRaises(ContractError):
            sliced_wasserstein_pow(np.ones((4, 2)), np.ones((3, 2)), proj)

    def test_non_finite_samples(self):
        with self.assertRaises(ContractError):
            EmpiricalDistribution.from_array([[0.0, np.nan]])

    def test_fixed_directions(self):
        proj = ProjectionSet(np.array([[1.0, 0.0]]))
        X = np.array([[0.0, 5.0], [1.0, -5.0]])
        Y = np.array([[2.0, 0.0], [3.0, 0.0]])
        self.assertAlmostEqual(
            sliced_wasserstein_pow(X, Y, proj, p=1).item(), 2.0)

    def test_report_is_rooted(self):
        X = np.zeros((10, 2))
        Y = np.tile([2.0, 0.0], (10, 1))
        pow_value = sliced_wasserstein_pow(
            X, Y, sample_projections(50, 2, rng=9), p=2).item()
        report = sliced_wasserstein_report(X, Y, n_proj=50, p=2, seed=9)
        self.assertAlmostEqual(report, np.sqrt(pow_value))


if __name__ == "__main__":
    main()
