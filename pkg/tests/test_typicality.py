import math
import os
import unittest

from pushcast.graph import VertexSet, complete_graph, from_edges, generate_gnp, gnp_probability, star_graph
from pushcast.push import run_push
from pushcast.typicality import (PROPERTY_I, PROPERTY_II, PROPERTY_III, audit, audit_trace,
        big_set_budget, check_property_I, check_property_I_derived, check_property_II,
        check_property_III, check_singletons_III, exceptional_set_brute_force,
        finishing_stay_probability, size_classes)
from pushcast.util import InvalidParameterException, make_rng

SLOW = os.environ.get('PUSHCAST_SLOW_TESTS') == '1'


class TestPropertyI(unittest.TestCase):

    def test_complete_graph(self):
        g = complete_graph(50)
        S = VertexSet(50, ids=range(10, 35))
        r = check_property_I(g, S, 1.0, 0.5)
        self.assertEqual(r.property, PROPERTY_I)
        self.assertEqual(r.violating.size, 0)
        self.assertTrue(r.passed)

    def test_edgeless_graph(self):
        n = 100
        g = from_edges(n, [])
        r = check_property_I(g, range(n // 2), 0.5, 0.1)
        self.assertEqual(r.violating.tolist(), list(range(n // 2, n)))
        self.assertAlmostEqual(r.budget, 8.0 * n / math.log(n))
        self.assertEqual(r.passed, n / 2 <= 8.0 * n / math.log(n))

    def test_invalid_epsilon(self):
        with self.assertRaises(InvalidParameterException):
            check_property_I(complete_graph(5), [0], 1.0, 0.0)

    def test_budget(self):
        self.assertAlmostEqual(big_set_budget(10**4), 8.0 * 10**4 / math.log(10**4))


class TestPropertyII(unittest.TestCase):

    def test_empty_set(self):
        r = check_property_II(generate_gnp(50, 0.2, 1), [], 0.2, 0.5, 4.0)
        self.assertEqual(r.property, PROPERTY_II)
        self.assertEqual(r.violating.size, 0)
        self.assertTrue(r.passed)

    def test_star_center(self):
        g = star_graph(9)
        r = check_property_II(g, [0], 0.1, 0.5, 1.0)
        self.assertEqual(r.violating.tolist(), list(range(1, 10)))
        self.assertAlmostEqual(r.budget, 2.0)
        self.assertFalse(r.passed)

    def test_invalid_alpha(self):
        with self.assertRaises(InvalidParameterException):
            check_property_II(complete_graph(5), [0], 1.0, 0.5, 0.0)

    def test_random_small_set(self):
        n = 10**4
        alpha = 10.0
        p = gnp_probability(n, alpha)
        g = generate_gnp(n, p, 17)
        rng = make_rng(3)
        S = rng.choice(n, size=50, replace=False)
        self.assertTrue(check_property_II(g, S, p, alpha ** -0.5, alpha).passed)


class TestPropertyIII(unittest.TestCase):

    def test_complete_graph(self):
        g = complete_graph(20)
        for size in [1, 7, 19]:
            r = check_property_III(g, range(size), 1.0, 0.01)
            self.assertEqual(r.property, PROPERTY_III)
            self.assertEqual(r.observed, size * (20 - size))
            self.assertTrue(r.passed)
            self.assertIsNone(r.budget)

    def test_degenerate_sets(self):
        g = complete_graph(5)
        with self.assertRaises(InvalidParameterException):
            check_property_III(g, [], 1.0, 0.1)
        with self.assertRaises(InvalidParameterException):
            check_property_III(g, range(5), 1.0, 0.1)

    def test_open_interval(self):
        # The center with zero width is outside the open interval
        r = check_property_III(complete_graph(4), [0], 1.0, 0.0001)
        self.assertTrue(r.passed)
        lo, hi = r.interval
        self.assertLess(lo, r.observed)
        self.assertLess(r.observed, hi)

    def test_cut_symmetry(self):
        g = generate_gnp(200, 0.1, 5)
        rng = make_rng(8)
        for size in [1, 20, 100]:
            S = VertexSet(200, ids=rng.choice(200, size=size, replace=False))
            a = check_property_III(g, S, 0.1, 0.3)
            b = check_property_III(g, S.complement(), 0.1, 0.3)
            self.assertEqual(a.observed, b.observed)

    def test_singletons_are_degree_checks(self):
        n = 300
        p = 0.05
        g = generate_gnp(n, p, 21)
        singles = check_singletons_III(g, p, 0.2)
        self.assertEqual(len(singles), n)
        for v, r in enumerate(singles):
            self.assertEqual(r.observed, g.degree(v))
            self.assertEqual(r.passed, check_property_III(g, [v], p, 0.2).passed)


class TestCheckerProperties(unittest.TestCase):

    def setUp(self):
        self.n = 400
        self.p = 0.05
        self.g = generate_gnp(self.n, self.p, 33)
        self.rng = make_rng(4)

    def random_set(self, size):
        return VertexSet(self.n, ids=self.rng.choice(self.n, size=size, replace=False))

    def test_violating_sets_match_brute_force(self):
        eps = 0.3
        for size in [1, 10, 80, 200, 399]:
            S = self.random_set(size)
            lo = (1 - eps) * self.p * size
            hi = (1 + eps) * self.p * size
            r = check_property_I(self.g, S, self.p, eps)
            self.assertEqual(r.violating.tolist(),
                exceptional_set_brute_force(self.g, S, lambda c: c <= lo or c >= hi).tolist())
            r = check_property_II(self.g, S, self.p, eps, 10.0)
            self.assertEqual(r.violating.tolist(),
                exceptional_set_brute_force(self.g, S, lambda c: c > eps * self.p * self.n).tolist())
            r = check_property_I_derived(self.g, S, self.p, eps)
            self.assertEqual(r.violating.tolist(),
                exceptional_set_brute_force(self.g, S, lambda c: c > 2 * eps * self.p * self.n).tolist())

    def test_violating_disjoint_from_set(self):
        for size in [5, 50, 300]:
            S = self.random_set(size)
            for r in [check_property_I(self.g, S, self.p, 0.2), check_property_II(self.g, S, self.p, 0.01, 10.0)]:
                self.assertFalse(set(r.violating.tolist()) & set(S))

    def test_monotone_in_epsilon(self):
        for size in [1, 20, 150, 300]:
            S = self.random_set(size)
            for eps in [0.05, 0.1, 0.2, 0.4]:
                if check_property_I(self.g, S, self.p, eps).passed:
                    self.assertTrue(check_property_I(self.g, S, self.p, 2 * eps).passed)
                if check_property_III(self.g, S, self.p, eps).passed:
                    self.assertTrue(check_property_III(self.g, S, self.p, 2 * eps).passed)


class TestAudit(unittest.TestCase):

    def test_edgeless_graph_fails(self):
        report = audit(from_edges(50, []), 0.2, 10.0, 3, make_rng(1))
        self.assertFalse(report.all_passed)
        self.assertTrue(report.failed())

    def test_complete_graph_passes(self):
        report = audit(complete_graph(200), 1.0, 10.0, 5, make_rng(1))
        self.assertTrue(report.all_passed, [r.to_json_dict() for r in report.failed()])
        self.assertEqual(report.sampled_sets['singleton'], 200)
        self.assertEqual(report.sampled_sets['half'], 5)

    def test_invalid_samples(self):
        with self.assertRaises(InvalidParameterException):
            audit(complete_graph(10), 1.0, 10.0, 0, make_rng(1))

    def test_size_classes(self):
        n = 10**4
        alpha = 10.0
        p = gnp_probability(n, alpha)
        eps = alpha ** -0.5
        classes = size_classes(n, p, alpha, eps)
        self.assertEqual(classes['one'], 1)
        self.assertEqual(classes['eps_pn'], math.ceil(eps * p * n))
        self.assertEqual(classes['n_over_alpha'], 1000)
        self.assertEqual(classes['half'], 5000)
        self.assertEqual(classes['all_but_sqrt_ln_n'], n - 4)

    def test_random_graph_passes(self):
        n = 2000
        alpha = 10.0
        p = gnp_probability(n, alpha)
        g = generate_gnp(n, p, 2)
        report = audit(g, p, alpha, 10, make_rng(6))
        self.assertTrue(report.all_passed, [r.to_json_dict() for r in report.failed()])

    @unittest.skipUnless(SLOW, "set PUSHCAST_SLOW_TESTS=1 to run")
    def test_random_graph_passes_full_scale(self):
        n = 10**4
        alpha = 10.0
        p = gnp_probability(n, alpha)
        g = generate_gnp(n, p, 2)
        report = audit(g, p, alpha, 100, make_rng(6))
        self.assertTrue(all(r.passed for r in report.results if r.size_class == 'singleton'))
        self.assertTrue(report.all_passed)

    def test_json_records(self):
        report = audit(complete_graph(30), 1.0, 10.0, 1, make_rng(0))
        d = report.to_json_dict()
        self.assertEqual(len(d['records']), len(report.results))
        self.assertEqual(set(d['records'][0]), {'property', 'size', 'violating_count', 'budget', 'passed'})

    def test_audit_trace(self):
        n = 500
        alpha = 10.0
        p = gnp_probability(n, alpha)
        g = generate_gnp(n, p, 1)
        trace = run_push(g, 0, make_rng(1), snapshot=True)
        report = audit_trace(g, trace, p, alpha)
        self.assertEqual(report.sampled_sets['informed_sets'], len(trace.informed_sets))
        sizes = {r.S_size for r in report.results}
        self.assertIn(1, sizes)
        self.assertNotIn(n, sizes)

    def test_audit_trace_needs_snapshots(self):
        g = complete_graph(10)
        trace = run_push(g, 0, make_rng(1))
        with self.assertRaises(InvalidParameterException):
            audit_trace(g, trace, 1.0, 10.0)


class TestFinishing(unittest.TestCase):

    def test_stay_probability_below_two_over_e(self):
        n = 10**5
        p = gnp_probability(n, 10.0)
        for eps in [0.001, 0.01, 0.05]:
            self.assertLessEqual(finishing_stay_probability(n, p, eps), 2.0 / math.e)

    def test_stay_probability_approaches_inverse_e(self):
        self.assertAlmostEqual(finishing_stay_probability(10**6, 0.1, 0.0), math.exp(-1.0), places=4)


if __name__ == '__main__':
    unittest.main()
