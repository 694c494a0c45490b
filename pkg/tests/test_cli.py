import contextlib
import io
import json
import math
import os
import tempfile
import unittest

from pushcast import __version__
from pushcast.bounds import binomial_tail, chernoff_bound
from pushcast.pushcast import EXIT_STALLED, main


class TestCommandLine(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def run_main(self, *argv):
        """
        Runs the command line and returns (exit code, stdout, stderr).
        """
        stdout = io.StringIO()
        stderr = io.StringIO()
        code = 0
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            try:
                main(['--no-color', '-q'] + list(argv))
            except SystemExit as e:
                code = e.code
        return code, stdout.getvalue(), stderr.getvalue()

    def test_version(self):
        code, out, _ = self.run_main('--version')
        self.assertEqual(code, 0)
        self.assertIn(__version__, out)

    def test_bounds(self):
        code, out, _ = self.run_main('bounds', 'chernoff', '--mean', '10', '--x', '5')
        self.assertEqual(code, 0)
        self.assertAlmostEqual(float(out), chernoff_bound(10, 5), places=11)

        code, out, _ = self.run_main('bounds', 'chernoff', '--mean', '5', '--x', '2', '--exact-n', '10')
        lines = out.split()
        self.assertEqual(len(lines), 2)
        self.assertAlmostEqual(float(lines[1]), binomial_tail(10, 0.5, 2), places=11)

        code, out, _ = self.run_main('bounds', 'azuma', '--sum-c-sq', '4', '--x', '3')
        self.assertAlmostEqual(float(out), 2 * math.exp(-9 / 8), places=11)

        code, out, _ = self.run_main('bounds', 'talagrand', '--median', '5', '--x', '3')
        self.assertAlmostEqual(float(out), 4 * math.exp(-9 / 32), places=11)

    def test_bounds_invalid(self):
        code, _, err = self.run_main('bounds', 'azuma', '--sum-c-sq', '0', '--x', '3')
        self.assertEqual(code, 1)
        self.assertIn('ERROR', err)

    def test_oracle_json(self):
        code, out, _ = self.run_main('oracle', '--topology', 'complete', '--n', '3', '--format', 'json', '--exact')
        self.assertEqual(code, 0)
        d = json.loads(out)
        self.assertAlmostEqual(d['mean'], 7 / 3, places=9)
        self.assertEqual(d['exact_mean'], '7/3')

    def test_oracle_text(self):
        code, out, _ = self.run_main('oracle', '--topology', 'star', '--n', '3')
        self.assertEqual(code, 0)
        mean_line = [line for line in out.splitlines() if line.startswith('mean T = ')][0]
        self.assertAlmostEqual(float(mean_line.split('=')[1]), 3.0, places=8)

    def test_oracle_capacity(self):
        code, _, err = self.run_main('oracle', '--topology', 'complete', '--n', '15')
        self.assertEqual(code, 1)
        self.assertIn('n <= 14', err)

    def test_oracle_unreachable(self):
        path = self.path('split.txt')
        with open(path, 'w') as f:
            f.write("3 1\n0 1\n")
        code, _, _ = self.run_main('oracle', '--graph-file', path)
        self.assertEqual(code, EXIT_STALLED)

    def test_oracle_bad_graph_file(self):
        path = self.path('bad.txt')
        with open(path, 'w') as f:
            f.write("3 1\n1 1\n")
        code, _, err = self.run_main('oracle', '--graph-file', path)
        self.assertEqual(code, 1)
        self.assertIn('self-loop', err)

    def test_simulate(self):
        out_path = self.path('report.json')
        code, _, _ = self.run_main('simulate', '--n', '80', '--alpha', '4', '--trials', '3', '--seed', '5', '-o', out_path)
        self.assertEqual(code, 0)
        with open(out_path) as f:
            d = json.load(f)
        self.assertEqual(d['config']['n'], 80)
        self.assertEqual(d['config']['alpha'], 4.0)
        self.assertEqual(d['config']['master_seed'], 5)
        self.assertEqual(len(d['trials']), 3)

    def test_simulate_stdout(self):
        code, out, _ = self.run_main('simulate', '--n', '2', '--complete', '--trials', '2')
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)['aggregates']['T']['mean'], 1.0)

    def test_simulate_with_experiment_file(self):
        conf = self.path('experiment.conf')
        out_path = self.path('report.csv')
        with open(conf, 'w') as f:
            f.write('experiment {\n\tn 40;\n\talpha 5;\n\ttrials 2;\n\toutput { format csv; path "' + out_path + '"; }\n}\n')
        code, _, _ = self.run_main('simulate', '-C', conf, '--trials', '4')
        self.assertEqual(code, 0)
        with open(out_path) as f:
            self.assertEqual(len(f.read().splitlines()), 5)
        self.assertTrue(os.path.isfile(out_path + '.config.json'))

    def test_simulate_all_stalled(self):
        code, _, _ = self.run_main('simulate', '--n', '20', '--p', '1e-12', '--trials', '2', '-o', self.path('r.json'))
        self.assertEqual(code, EXIT_STALLED)

    def test_invalid_arguments(self):
        code, _, _ = self.run_main('simulate', '--trials', '0')
        self.assertEqual(code, 1)
        code, _, _ = self.run_main('simulate', '--p', '0.1', '--alpha', '2')
        self.assertEqual(code, 1)
        code, _, _ = self.run_main('simulate', '--n', '10', '--start', '10')
        self.assertEqual(code, 1)

    def test_typicality_json(self):
        code, out, _ = self.run_main('typicality', '--n', '300', '--alpha', '10', '--samples', '2', '--format', 'json')
        self.assertEqual(code, 0)
        d = json.loads(out)
        self.assertIn('all_passed', d)
        self.assertEqual(d['sampled_sets']['singleton'], 300)

    def test_typicality_from_trace(self):
        code, out, _ = self.run_main('typicality', '--n', '200', '--alpha', '10', '--from-trace', '--format', 'json')
        self.assertEqual(code, 0)
        self.assertIn('informed_sets', json.loads(out)['sampled_sets'])


if __name__ == '__main__':
    unittest.main()
