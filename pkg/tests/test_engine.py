import json
import math
import tempfile
import unittest
import sys
import os

# Add src to path
sys.path.append(os.path.join(os.path.dirname(__file__), '../src'))

from threshscatter.config import validate_config
from threshscatter.engine import RunEngine, RunResult
from threshscatter.errors import UsageError
from threshscatter.profiles import LogGrid, write_profile
from threshscatter.renderers.summary import check_entry
from threshscatter.threshold import manufactured_from_jet, resonance_jet


def engine_for(tmp_dir=None, **data):
    config = validate_config(data)
    return RunEngine(config, base_dir=tmp_dir)


class TestConstantsTask(unittest.TestCase):

    def test_odd_dimension(self):
        result = engine_for(task='constants', m=5).run()
        self.assertTrue(result.passed, result.failed)
        identities = {c['identity'] for c in result.checks}
        self.assertEqual(identities, {'c0c1', 'dm-e1', 'binomial-sum'})

    def test_m3_coker(self):
        result = engine_for(task='constants', m=3).run()
        self.assertTrue(result.passed)
        self.assertAlmostEqual(result.checks[0]['value'], 1.0 / (4.0 * math.pi), places=12)

    def test_even_dimension(self):
        result = engine_for(task='constants', m=6).run()
        self.assertTrue(result.passed, result.failed)
        self.assertEqual(len(result.details['dmj']), 3)
        self.assertIn('shin', {c['identity'] for c in result.checks})

    def test_m4_checks_superposition_only(self):
        result = engine_for(task='constants', m=4).run()
        self.assertTrue(result.passed, result.failed)
        self.assertEqual({c['identity'] for c in result.checks}, {'tja1'})


class TestNumericTasks(unittest.TestCase):

    def test_kernel_check_odd(self):
        result = engine_for(task='kernel-check', m=5, samples=5, seed=1).run()
        self.assertTrue(result.passed, result.checks)
        self.assertEqual(len(result.rows), 5)

    def test_kernel_check_is_seeded(self):
        first = engine_for(task='kernel-check', m=3, samples=3, seed=7).run()
        second = engine_for(task='kernel-check', m=3, samples=3, seed=7).run()
        self.assertEqual([row[:2] for row in first.rows], [row[:2] for row in second.rows])

    def test_kernel_check_samples_low_energies(self):
        result = engine_for(task='kernel-check', m=3, samples=20, seed=3).run()
        lams = [row[0] for row in result.rows]
        radii = [row[1] for row in result.rows]
        self.assertTrue(all(0.0 < lam <= 2.0 for lam in lams), lams)
        self.assertTrue(all(0.1 < r <= 10.0 for r in radii), radii)
        self.assertTrue(result.passed, result.checks)

    def test_representation(self):
        grid = {'n': 2048, 'r_max': 40.0}
        result = engine_for(task='representation', m=3, grid=grid, seed=2, **{'lambda': 0.8}).run()
        self.assertTrue(result.passed, result.checks)
        self.assertEqual(len(result.rows), 10)

    def test_identity_probe(self):
        result = engine_for(task='probe', operator='identity', p=2.0, expect='bounded').run()
        self.assertTrue(result.passed)
        self.assertEqual(result.header['verdict'], 'bounded')
        failing = engine_for(task='probe', operator='identity', p=2.0, expect='growing').run()
        self.assertEqual(failing.failed, ['identity at p=2'])

    def test_probe_without_expectation_has_no_checks(self):
        result = engine_for(task='probe', operator='identity', scales=[1, 2]).run()
        self.assertEqual(result.checks, [])
        self.assertTrue(result.passed)


class TestThresholdTask(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_first_kind_file(self):
        V, _ = manufactured_from_jet(LogGrid(), resonance_jet, 0, "resonance")
        write_profile(os.path.join(self.tmp.name, "v.txt"), V.V, m=3, ell=0)
        # relative paths resolve against the engine's base directory
        result = engine_for(self.tmp.name, task='threshold', potential='v.txt').run()
        self.assertEqual(result.details['kind'], 'first')
        self.assertTrue(result.passed, result.failed)
        self.assertEqual({c['identity'] for c in result.checks}, {'kind', 'L-value', 'canonical'})
        (unit_tail,) = [c for c in result.checks if c['name'] == 'L(phi) at unit 1/r tail']
        self.assertAlmostEqual(unit_tail['value'], 1.0, delta=1e-3)

    def test_missing_inputs(self):
        with self.assertRaises(UsageError):
            engine_for(self.tmp.name, task='threshold').run()
        with self.assertRaises(FileNotFoundError):
            engine_for(self.tmp.name, task='threshold', potential='absent.txt').run()


class TestReports(unittest.TestCase):

    def test_reports_are_deterministic(self):
        with tempfile.TemporaryDirectory() as tmp:
            payloads = []
            for name in ("a", "b"):
                engine = engine_for(os.path.join(tmp, name), task='constants', m=7, output={'out_dir': 'reports'})
                table, summary = engine.write_reports(engine.run())
                self.assertTrue(os.path.isfile(table))
                with open(summary, 'rb') as f:
                    payloads.append(f.read())
            self.assertEqual(payloads[0], payloads[1])
        summary = json.loads(payloads[0])
        self.assertTrue(summary['passed'])
        self.assertEqual(summary['task'], 'constants')
        self.assertIn('lambda', summary['config'])
        self.assertEqual(summary['tolerances']['identity_tol'], 1e-10)

    def test_failed_checks_are_listed(self):
        result = RunResult('constants', checks=[check_entry('a', 'dm-e1', 1.0, 0.0, True),
                                                check_entry('b', 'djm', 2.0, 0.0, False)])
        self.assertFalse(result.passed)
        self.assertEqual(result.failed, ['b'])


if __name__ == '__main__':
    unittest.main()
