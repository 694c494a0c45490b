import unittest

import numpy as np
import sympy

from pushcast.bounds import (TailBoundQuery, azuma_bound, binomial_tail, chernoff_bound,
        median_mean_diagnostic, talagrand_bound)
from pushcast.util import InvalidParameterException


class TestClosedForms(unittest.TestCase):

    def assertRelativelyClose(self, actual, expected):
        self.assertLessEqual(abs(actual - expected), 1e-12 * abs(expected))

    def test_chernoff(self):
        expected = 2 * sympy.exp(-sympy.Rational(25) / (2 * (10 + sympy.Rational(5, 3))))
        self.assertRelativelyClose(chernoff_bound(10, 5), float(expected))

    def test_azuma(self):
        self.assertRelativelyClose(azuma_bound(4, 3), float(2 * sympy.exp(-sympy.Rational(9, 8))))

    def test_talagrand(self):
        self.assertRelativelyClose(talagrand_bound(5, 3), float(4 * sympy.exp(-sympy.Rational(9, 32))))
        # ψ(m + x) rounds up
        self.assertRelativelyClose(talagrand_bound(4.5, 2), float(4 * sympy.exp(-sympy.Rational(4, 28))))

    def test_reference_values(self):
        self.assertRelativelyClose(chernoff_bound(100, 30), float(2 * sympy.exp(-sympy.Rational(900, 220))))
        self.assertRelativelyClose(azuma_bound(100, 20), float(2 * sympy.exp(-2)))
        self.assertRelativelyClose(talagrand_bound(100, 50), float(4 * sympy.exp(-sympy.Rational(2500, 600))))
        self.assertAlmostEqual(azuma_bound(100, 20), 0.270670, places=6)
        self.assertAlmostEqual(talagrand_bound(100, 50), 0.062033, places=6)

    def test_zero_deviation(self):
        self.assertEqual(chernoff_bound(3, 0), 2.0)
        self.assertEqual(azuma_bound(3, 0), 2.0)
        self.assertEqual(talagrand_bound(3, 0), 4.0)

    def test_decreasing_in_x(self):
        # Integer steps keep ψ(m + x) from jumping between samples
        xs = np.arange(1, 60)
        for f in [lambda x: chernoff_bound(20, x), lambda x: azuma_bound(20, x), lambda x: talagrand_bound(20, x)]:
            values = [f(x) for x in xs]
            for a, b in zip(values, values[1:]):
                self.assertLessEqual(b, a)

    def test_invalid_arguments(self):
        with self.assertRaises(InvalidParameterException):
            chernoff_bound(-1, 2)
        with self.assertRaises(InvalidParameterException):
            chernoff_bound(1, -2)
        with self.assertRaises(InvalidParameterException):
            azuma_bound(0, 1)
        with self.assertRaises(InvalidParameterException):
            talagrand_bound(float('nan'), 1)


class TestBinomialTail(unittest.TestCase):

    def test_small_values(self):
        self.assertAlmostEqual(binomial_tail(2, 0.5, 1), 0.5)
        self.assertAlmostEqual(binomial_tail(2, 0.5, 0), 1.0)
        self.assertEqual(binomial_tail(4, 0.5, 3), 0.0)

    def test_chernoff_dominates(self):
        for n in range(1, 31):
            for p in [0.1, 0.5, 0.9]:
                for x in range(n + 1):
                    self.assertLessEqual(binomial_tail(n, p, x), chernoff_bound(n * p, x) + 1e-15,
                            "n={} p={} x={}".format(n, p, x))

    def test_invalid_parameters(self):
        with self.assertRaises(InvalidParameterException):
            binomial_tail(-1, 0.5, 1)
        with self.assertRaises(InvalidParameterException):
            binomial_tail(5, 1.5, 1)


class TestMedianMeanDiagnostic(unittest.TestCase):

    def test_values(self):
        mean, median, gap = median_mean_diagnostic([10, 1, 3, 2])
        self.assertEqual(mean, 4.0)
        self.assertEqual(median, 2.0)
        self.assertAlmostEqual(gap, 1.0)

    def test_constant_sample(self):
        self.assertEqual(median_mean_diagnostic([0, 0, 0]), (0.0, 0.0, 0.0))
        self.assertEqual(median_mean_diagnostic([7])[2], 0.0)

    def test_empty(self):
        with self.assertRaises(InvalidParameterException):
            median_mean_diagnostic([])


class TestTailBoundQuery(unittest.TestCase):

    def test_dispatch(self):
        self.assertEqual(TailBoundQuery('chernoff', x=5, mean=10).evaluate(), chernoff_bound(10, 5))
        self.assertEqual(TailBoundQuery('azuma', x=3, sum_c_sq=4).evaluate(), azuma_bound(4, 3))
        self.assertEqual(TailBoundQuery('talagrand', x=3, median=5).evaluate(), talagrand_bound(5, 3))

    def test_missing_parameter(self):
        with self.assertRaises(InvalidParameterException):
            TailBoundQuery('chernoff', x=5).evaluate()

    def test_unknown_kind(self):
        with self.assertRaises(InvalidParameterException):
            TailBoundQuery('hoeffding', x=1, mean=1).evaluate()


if __name__ == '__main__':
    unittest.main()
