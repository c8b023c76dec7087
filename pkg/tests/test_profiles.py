import math
import tempfile
import unittest
import sys
import os

import numpy as np

# Add src to path
sys.path.append(os.path.join(os.path.dirname(__file__), '../src'))

from threshscatter.errors import DecayError, DomainError, GridMismatchError
from threshscatter.profiles import (LogGrid, RadialProfile, SectorFunction, angular_lp, read_profile,
                                    sphere_area, write_profile)


class TestGrid(unittest.TestCase):

    def test_endpoints_and_weights(self):
        grid = LogGrid(1e-2, 1e2, 401)
        self.assertAlmostEqual(grid.r[0], 1e-2)
        self.assertEqual(grid.r[-1], 1e2)
        self.assertAlmostEqual(float(grid.integrate(grid.r ** 2 * np.exp(-grid.r))), 2.0, places=5)

    def test_invalid_grids(self):
        with self.assertRaises(DomainError):
            LogGrid(1.0, 0.5, 64)
        with self.assertRaises(DomainError):
            LogGrid(n=4)

    def test_coarsened(self):
        grid = LogGrid(n=1024)
        self.assertEqual(grid.coarsened().n, 512)
        self.assertTrue(grid.same_as(LogGrid(n=1024)))

    def test_sphere_area(self):
        self.assertAlmostEqual(sphere_area(3), 4 * math.pi)
        self.assertAlmostEqual(sphere_area(4), 2 * math.pi ** 2)


class TestRadialProfile(unittest.TestCase):

    def setUp(self):
        self.grid = LogGrid(1e-3, 50.0, 1024)
        self.u = RadialProfile.from_function(self.grid, lambda r: np.exp(-r * r), provenance="gauss")

    def test_lp_norm_of_gaussian(self):
        self.assertAlmostEqual(self.u.lp_norm(2.0) ** 2, (math.pi / 2) ** 1.5, places=7)
        self.assertAlmostEqual(self.u.lp_norm(1.0), math.pi ** 1.5, places=7)

    def test_dilation_scales_norms(self):
        t = 3.0
        ratio = self.u.dilate(t).lp_norm(4.0) / self.u.lp_norm(4.0)
        self.assertAlmostEqual(ratio, t ** 0.75, places=5)

    def test_spline_evaluation_and_tail(self):
        self.assertAlmostEqual(float(self.u(1.3)), math.exp(-1.69), places=8)
        self.assertEqual(float(self.u(100.0)), 0.0)
        power = RadialProfile.from_function(self.grid, lambda r: (1 + r * r) ** -1.0, decay_exponent=2.0)
        self.assertAlmostEqual(float(power(100.0)) / float(power(50.0)), 0.25, places=10)

    def test_derivatives(self):
        r = self.grid.r
        sel = (r > 0.05) & (r < 3.0)
        np.testing.assert_allclose(self.u.derivative(1)[sel], -2 * r[sel] * np.exp(-r[sel] ** 2), atol=1e-6)
        with self.assertRaises(DomainError):
            self.u.derivative(3)

    def test_grid_mismatch(self):
        other = RadialProfile.zeros(LogGrid(1e-3, 50.0, 512))
        with self.assertRaises(GridMismatchError):
            self.u + other
        with self.assertRaises(GridMismatchError):
            RadialProfile(self.grid, np.zeros(10))

    def test_tail_check(self):
        good = RadialProfile.from_function(self.grid, lambda r: (1 + r * r) ** -1.5, decay_exponent=3.0)
        self.assertTrue(good.tail_check())
        with self.assertLogs('threshscatter.profiles', level='WARNING') as logs:
            bad = RadialProfile.from_function(self.grid, lambda r: (1 + r * r) ** -0.25, decay_exponent=3.0,
                                              provenance="slow")
        self.assertFalse(bad.tail_check())
        self.assertIn("'slow' exceeds its claimed decay", logs.output[0])


class TestSectorFunction(unittest.TestCase):

    def test_angular_integrals(self):
        self.assertAlmostEqual(angular_lp(1, 2.0), 4 * math.pi / 3)
        # int |cos|^4 over the sphere = 4 pi / 5
        self.assertAlmostEqual(angular_lp(1, 4.0), 4 * math.pi / 5, places=10)

    def test_inner_respects_sectors(self):
        grid = LogGrid(1e-3, 50.0, 512)
        g = RadialProfile.from_function(grid, lambda r: r * np.exp(-r * r))
        a = SectorFunction(1, g)
        b = SectorFunction(0, g)
        self.assertEqual(a.inner(b), 0.0)
        # ||x_1 e^{-r^2}||^2 = (4 pi / 3) int r^4 e^{-2 r^2} dr
        expected = 4 * math.pi / 3 * 3 * math.sqrt(math.pi / 2) / 32
        self.assertAlmostEqual(a.norm() ** 2, expected, places=8)
        with self.assertRaises(DomainError):
            a + b


class TestExchangeFormat(unittest.TestCase):

    def test_round_trip_is_bit_exact(self):
        grid = LogGrid(1e-3, 1e3, 257)
        profile = RadialProfile.from_function(grid, lambda r: -3.0 / (1 + r * r) ** 2,
                                              decay_exponent=4.0, provenance="resonance")
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "v.txt")
            write_profile(path, profile, m=3, ell=0)
            back, m, ell = read_profile(path)
        self.assertEqual((m, ell), (3, 0))
        self.assertEqual(back.decay_exponent, 4.0)
        self.assertTrue(np.array_equal(back.values, profile.values))
        self.assertTrue(np.array_equal(back.grid.r, grid.r))

    def test_overclaimed_decay_rejected_on_read(self):
        grid = LogGrid(1e-3, 1e3, 257)
        slow = RadialProfile.from_function(grid, lambda r: (1 + r * r) ** -0.25, decay_exponent=4.0)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "slow.txt")
            write_profile(path, slow)
            with self.assertRaises(DecayError):
                read_profile(path)

    def test_missing_header(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "bad.txt")
            with open(path, 'w') as f:
                f.write("0.1 1.0\n0.2 2.0\n")
            with self.assertRaises(DomainError):
                read_profile(path)


if __name__ == '__main__':
    unittest.main()
