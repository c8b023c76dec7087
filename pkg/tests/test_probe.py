import math
import unittest
import sys
import os

import numpy as np

# Add src to path
sys.path.append(os.path.join(os.path.dirname(__file__), '../src'))

from threshscatter.errors import DomainError, RangeError
from threshscatter.profiles import LogGrid, RadialProfile, SectorFunction
from threshscatter.threshold import manufactured_from_jet, resonance_jet
from threshscatter.waveop.probe import (combine, identity, lp_probe, lp_probes, rank_one_correction,
                                        standard_scales, tail_slope, upward_spread, verdict_for)
from threshscatter.waveop.zs import CutoffSpec, apply_Zs_m3

A_FIRST = 3j * math.pi / 16
PLAIN_PS = (1.5, 2.0, 2.5, 4.0, 6.0)


class TestVerdict(unittest.TestCase):

    def test_growing(self):
        scales = [1, 2, 4, 8]
        verdict, slope = verdict_for(scales, [1, 2, 4, 8])
        self.assertEqual(verdict, "growing")
        self.assertAlmostEqual(slope, 1.0, places=12)

    def test_bounded(self):
        verdict, slope = verdict_for([1, 2, 4], [0.7, 0.7, 0.7])
        self.assertEqual(verdict, "bounded")
        self.assertAlmostEqual(slope, 0.0, places=12)

    def test_indeterminate(self):
        ratios = [1.0, 2.0, 4.0, 4.3, 4.6]
        verdict, slope = verdict_for([1, 2, 4, 8, 16], ratios)
        self.assertEqual(verdict, "indeterminate")
        self.assertAlmostEqual(slope, math.log(4.6 / 4.0) / math.log(4.0), places=12)

    def test_settled_tail_is_bounded(self):
        # a rise past the spread limit that has levelled off
        verdict, slope = verdict_for([1, 2, 4, 8, 16, 32], [3.1, 6.0, 9.5, 11.5, 11.75, 11.7])
        self.assertEqual(verdict, "bounded")
        self.assertLess(slope, 0.075)
        verdict, _ = verdict_for([1, 2, 4, 8, 16, 32], [3.1, 6.0, 9.5, 11.5, 11.75, 11.7], settle_limit=0.0)
        self.assertEqual(verdict, "indeterminate")

    def test_spread_ignores_decay(self):
        self.assertEqual(upward_spread([3.0, 2.0, 1.0]), 1.0)
        self.assertEqual(upward_spread([1.0, 0.5, 2.0]), 4.0)

    def test_slope_uses_last_points(self):
        self.assertAlmostEqual(tail_slope([1, 2, 4, 8], [100.0, 1.0, 2.0, 4.0]), 1.0, places=12)

    def test_standard_scales(self):
        self.assertEqual(standard_scales(4), [1.0, 2.0, 4.0, 8.0])


class TestProbeFamilies(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.grid = LogGrid()
        cls.u = RadialProfile.from_function(cls.grid, lambda r: np.exp(-r * r), provenance="gauss")
        cls.V, cls.phi = manufactured_from_jet(cls.grid, resonance_jet, 0, "resonance")
        cls.rank_one = rank_one_correction(cls.phi, cls.V, A_FIRST)

    def test_identity_is_bounded(self):
        for family in ("dilation", "window"):
            report = lp_probe(identity, 2.0, self.u, standard_scales(7), "identity", family)
            self.assertEqual(report.verdict, "bounded", family)
            self.assertEqual(len(report.ratios), 7)
        report = lp_probe(identity, 3.0, self.u, standard_scales(4))
        np.testing.assert_allclose(report.ratios, 1.0, rtol=1e-12)

    def test_rank_one_grows_at_p4(self):
        # <psi, u_t> grows like t while ||u_t||_4 grows like t^{3/4}
        report = lp_probe(self.rank_one, 4.0, self.u, standard_scales(7), "rank-one")
        self.assertEqual(report.verdict, "growing")
        self.assertAlmostEqual(report.slope, 0.25, delta=0.05)

    def test_rank_one_leaves_l2_through_its_tail(self):
        # phi ~ 1/r is not square integrable
        report = lp_probe(self.rank_one, 2.0, self.u, standard_scales(7), "rank-one", "window")
        self.assertEqual(report.verdict, "growing")
        self.assertAlmostEqual(report.slope, 0.5, delta=0.05)

    def test_combine_adds(self):
        doubled = combine(identity, identity)
        out = doubled(SectorFunction(0, self.u))
        np.testing.assert_allclose(out.radial.values, 2.0 * self.u.values)
        report = lp_probe(doubled, 2.0, self.u, [1.0, 2.0])
        np.testing.assert_allclose(report.ratios, 2.0, rtol=1e-12)

    def test_input_checks(self):
        with self.assertRaises(DomainError):
            lp_probe(identity, 0.5, self.u, [1.0, 2.0])
        with self.assertRaises(DomainError):
            lp_probe(identity, 2.0, self.u, [1.0, 2.0], family="shell")
        with self.assertRaises(DomainError):
            lp_probe(identity, 2.0, self.u, [2.0, 1.0])
        with self.assertRaises(DomainError):
            lp_probe(identity, 2.0, self.u, [1.0])
        with self.assertRaises(RangeError):
            lp_probe(identity, 2.0, self.u, [1.0, 1e4])
        with self.assertRaises(RangeError):
            lp_probe(identity, 2.0, self.u, [1.0, 1e4], family="window")

    def test_report_serializes(self):
        payload = lp_probe(identity, 2.0, self.u, [1.0, 2.0], "identity").to_dict()
        self.assertEqual(payload['operator'], "identity")
        self.assertEqual(payload['verdict'], "bounded")
        self.assertEqual(payload['spread'], 1.0)


class TestZsDichotomy(unittest.TestCase):
    """
    Z_s is bounded on L^p below p = 3 and grows above it through the boundary
    term -a phi <psi, u>; adding a phi (x) psi removes the growth.
    """

    @classmethod
    def setUpClass(cls):
        grid = LogGrid()
        cls.u = RadialProfile.from_function(grid, lambda r: np.exp(-r * r), provenance="gauss")
        V, phi = manufactured_from_jet(grid, resonance_jet, 0, "resonance")
        F = CutoffSpec()

        def zs(u):
            return SectorFunction(0, apply_Zs_m3(u.radial, V, phi, A_FIRST, F))

        correction = rank_one_correction(phi, V, A_FIRST)
        cls.scales = standard_scales(7)
        cls.plain = dict(zip(PLAIN_PS, lp_probes(zs, PLAIN_PS, cls.u, cls.scales, "zs", workers=2)))
        corrected = lp_probes(combine(zs, correction), (4.0, 6.0), cls.u, cls.scales, "zs+correction", workers=2)
        cls.corrected = dict(zip((4.0, 6.0), corrected))
        cls.rank_one = lp_probe(correction, 4.0, cls.u, cls.scales, "rank-one")

    def test_bounded_below_three(self):
        for p in (1.5, 2.0, 2.5):
            self.assertEqual(self.plain[p].verdict, "bounded", f"p={p}")

    def test_growing_above_three(self):
        for p in (4.0, 6.0):
            self.assertEqual(self.plain[p].verdict, "growing", f"p={p}")

    def test_correction_removes_growth(self):
        for p in (4.0, 6.0):
            self.assertEqual(self.corrected[p].verdict, "bounded", f"p={p}")

    def test_boundary_term_leads_for_spread_out_input(self):
        """
        ||Z_s u_t + a phi <psi, u_t>||_4 / ||a phi <psi, u_t>||_4 falls like t^{-1/4}:
        the remainder is bounded on L^4 while the rank-one part grows like t.
        """
        index = {t: i for i, t in enumerate(self.scales)}
        rel = {t: self.corrected[4.0].ratios[index[t]] / self.rank_one.ratios[index[t]]
               for t in (16.0, 32.0, 64.0)}
        self.assertLess(rel[64.0], rel[16.0])
        self.assertGreater(rel[32.0], 0.1)
        self.assertLess(rel[32.0], 1.0)
        scaled = [rel[t] * t ** 0.25 for t in (16.0, 32.0, 64.0)]
        self.assertLess(max(scaled) / min(scaled), 1.5)


if __name__ == '__main__':
    unittest.main()
