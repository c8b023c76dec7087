import math
import unittest
import sys
import os

import numpy as np

# Add src to path
sys.path.append(os.path.join(os.path.dirname(__file__), '../src'))

from threshscatter.errors import DomainError, PreconditionError
from threshscatter.means import line_transform
from threshscatter.profiles import SectorFunction
from threshscatter.threshold import ThresholdBasis, manufactured_from_jet, resonance_jet
from threshscatter.waveop.expansion import projection_operator
from threshscatter.waveop.probe import rank_one_correction
from threshscatter.waveop.zs import (CutoffSpec, apply_Zs1_m3, apply_Zs_m3, apply_channels, axial_gradient,
                                     axial_potential, boundary_identity, k0_majorant_constants, k0_profile,
                                     newton_potential, pairing_mean, zs0_channels, zs1_channels, zs_channels)
from test_expansion import GRID, first_kind_basis, gauss, second_kind_basis

A_FIRST = 3j * math.pi / 16
WINDOW = (GRID.r > 0.1) & (GRID.r < 10.0)


def assert_close_on_window(test, got, expected, rel):
    scale = np.max(np.abs(expected[WINDOW]))
    test.assertGreater(scale, 0.0)
    test.assertLess(np.max(np.abs(got[WINDOW] - expected[WINDOW])) / scale, rel)


class TestCutoff(unittest.TestCase):

    def test_values(self):
        F = CutoffSpec(0.5)
        np.testing.assert_array_equal(F([0.0, 0.1, 0.25]), [1.0, 1.0, 1.0])
        np.testing.assert_array_equal(F([0.5, 0.7]), [0.0, 0.0])
        self.assertAlmostEqual(float(F(0.375)), 0.5, places=14)
        self.assertEqual(float(F(-0.1)), 1.0)

    def test_derivative_matches_differences(self):
        F = CutoffSpec(0.5)
        lam = np.linspace(0.26, 0.49, 7)
        h = 1e-6
        numeric = (F(lam + h) - F(lam - h)) / (2 * h)
        np.testing.assert_allclose(F.derivative(lam), numeric, atol=1e-6)
        self.assertEqual(float(F.derivative(0.1)), 0.0)

    def test_radius_must_be_positive(self):
        with self.assertRaises(DomainError):
            CutoffSpec(0.0)


class TestK0(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        V, phi = manufactured_from_jet(GRID, resonance_jet, 0, "resonance")
        vphi = SectorFunction(0, phi.with_values(V.V.values * phi.values))
        cls.mean = pairing_mean(vphi, gauss())
        cls.F = CutoffSpec()

    def test_odd_moment_vanishes(self):
        odd = line_transform(self.mean.profile, 1, np.array([0.0]))[0]
        even = line_transform(self.mean.profile, 0, np.array([0.0]))[0]
        self.assertLess(abs(odd), 1e-12 * abs(even))

    def test_routes_agree(self):
        rho = np.array([0.5, 1.0, 2.0, 4.0, 10.0])
        direct = k0_profile(self.mean, self.F, rho, "k0-def")
        scale = np.max(np.abs(direct))
        for route in ("parts-10", "k0-def-a"):
            other = k0_profile(self.mean, self.F, rho, route)
            self.assertLess(np.max(np.abs(other - direct)) / scale, 1e-7, route)

    def test_route_checks(self):
        with self.assertRaises(DomainError):
            k0_profile(self.mean, self.F, 1.0, "fourier")
        with self.assertRaises(DomainError):
            k0_profile(self.mean, self.F, 0.0, "parts-10")
        with self.assertRaises(DomainError):
            k0_profile(self.mean, self.F, -1.0)
        self.assertIsInstance(k0_profile(self.mean, self.F, 1.0), complex)

    def test_majorant_constants_are_finite(self):
        report = k0_majorant_constants(self.mean, self.F, log2_samples=10)
        self.assertTrue(np.isfinite(report.near) and report.near > 0)
        self.assertTrue(np.isfinite(report.far))


class TestSectorHelpers(unittest.TestCase):

    def test_axial_round_trip(self):
        f = gauss(1)
        back = axial_gradient(axial_potential(f))
        assert_close_on_window(self, back.radial.values, f.radial.values, 1e-5)
        with self.assertRaises(DomainError):
            axial_potential(gauss(0))

    def test_cross_sector_mean_is_zero(self):
        mean = pairing_mean(gauss(0), gauss(1))
        self.assertFalse(np.any(mean.profile.values))

    def test_boundary_identity(self):
        V, phi = manufactured_from_jet(GRID, resonance_jet, 0, "resonance")
        vphi = SectorFunction(0, phi.with_values(V.V.values * phi.values))
        for u in (gauss(0), gauss(0).dilate(3.0)):
            check = boundary_identity(vphi, u)
            self.assertLess(check.residual / abs(check.rhs), 1e-5)

    def test_boundary_identity_dipole_sector(self):
        check = boundary_identity(gauss(1), gauss(1).dilate(2.0))
        self.assertLess(check.residual / abs(check.rhs), 1e-4)


class TestFirstKindZs(unittest.TestCase):
    """V = -3 (1+r^2)^{-2} with its exact resonance; a = 3 pi i / 16."""

    @classmethod
    def setUpClass(cls):
        cls.V, cls.phi = manufactured_from_jet(GRID, resonance_jet, 0, "resonance")
        cls.F = CutoffSpec()
        cls.u = gauss().radial

    def test_resonance_is_newton_fixed_point(self):
        vphi = SectorFunction(0, self.phi.with_values(self.V.V.values * self.phi.values))
        d0 = newton_potential(vphi).radial.values
        assert_close_on_window(self, -d0, self.phi.values, 1e-5)

    def test_boundary_part_cancels_rank_one_correction(self):
        boundary = apply_Zs_m3(self.u, self.V, self.phi, A_FIRST, self.F, part="boundary")
        correction = rank_one_correction(self.phi, self.V, A_FIRST)(SectorFunction(0, self.u))
        total = boundary.values + correction.radial.values
        scale = np.max(np.abs(correction.radial.values[WINDOW]))
        self.assertLess(np.max(np.abs(total[WINDOW])) / scale, 1e-4)

    def test_full_routes_agree(self):
        direct = apply_Zs_m3(self.u, self.V, self.phi, A_FIRST, self.F, route="k0-def")
        split = apply_Zs_m3(self.u, self.V, self.phi, A_FIRST, self.F, route="k0-def-a")
        assert_close_on_window(self, split.values, direct.values, 1e-6)

    def test_parts_sum_to_full(self):
        full = apply_Zs_m3(self.u, self.V, self.phi, A_FIRST, self.F)
        boundary = apply_Zs_m3(self.u, self.V, self.phi, A_FIRST, self.F, part="boundary")
        interior = apply_Zs_m3(self.u, self.V, self.phi, A_FIRST, self.F, part="interior")
        assert_close_on_window(self, boundary.values + interior.values, full.values, 1e-3)

    def test_linear_in_coefficient(self):
        one = apply_Zs_m3(self.u, self.V, self.phi, A_FIRST, self.F)
        two = apply_Zs_m3(self.u, self.V, self.phi, 2 * A_FIRST, self.F)
        np.testing.assert_allclose(two.values, 2 * one.values, rtol=1e-12, atol=1e-300)

    def test_unknown_part(self):
        with self.assertRaises(DomainError):
            apply_Zs_m3(self.u, self.V, self.phi, A_FIRST, self.F, part="edge")


class TestChannels(unittest.TestCase):

    def test_generic_has_no_channels(self):
        V, _ = manufactured_from_jet(GRID, resonance_jet, 0, "resonance")
        tb = ThresholdBasis((), "generic", V)
        self.assertEqual(zs_channels(tb), [])
        with self.assertRaises(PreconditionError):
            apply_channels([], gauss(), CutoffSpec())

    def test_first_kind_channel(self):
        (channel,) = zs_channels(first_kind_basis())
        self.assertEqual(channel.label, "Zs")
        self.assertEqual(channel.source.ell, 0)

    def test_second_kind_channels(self):
        tb = second_kind_basis()
        self.assertEqual(len(zs0_channels(tb)), 1)
        self.assertEqual(len(zs1_channels(tb)), 1)
        self.assertEqual([ch.label for ch in zs_channels(tb)], ["Zs0[0,0]", "Zs1[0]"])
        # c = 1 for the P V / lambda^2 term
        self.assertEqual(zs1_channels(tb)[0].coefficient, -1j / (2 * math.pi))


class TestSecondKindZs1(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.tb = second_kind_basis()
        cls.F = CutoffSpec()

    def test_boundary_part_cancels_projection(self):
        u = gauss(1)
        boundary = apply_Zs1_m3(u, self.tb, self.F, part="boundary")
        projected = projection_operator(self.tb, times_v=False)(u)
        total = boundary.radial.values + projected.radial.values
        scale = np.max(np.abs(projected.radial.values[WINDOW]))
        self.assertLess(np.max(np.abs(total[WINDOW])) / scale, 1e-3)

    def test_other_sector_is_annihilated(self):
        out = apply_Zs1_m3(gauss(0), self.tb, self.F)
        self.assertFalse(np.any(out.radial.values))


if __name__ == '__main__':
    unittest.main()
