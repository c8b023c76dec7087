import math
import unittest
import sys
import os

import numpy as np

# Add src to path
sys.path.append(os.path.join(os.path.dirname(__file__), '../src'))

from threshscatter.errors import DimensionError, DomainError, PreconditionError
from threshscatter.profiles import LogGrid, RadialProfile, SectorFunction
from threshscatter.threshold import (BasisElement, ThresholdBasis, canonical_resonance, ell1_profile,
                                     manufactured_from_jet, moments, resonance_jet)
from threshscatter.waveop.expansion import (FiniteRankOperator, eigen_cross_matrix, projection_minus_e1,
                                            projection_operator, singular_expansion, unit_eigenfunctions)

GRID = LogGrid()


def first_kind_basis():
    """Exact resonance of V = -3 (1+r^2)^{-2}, without going through the null space solver."""
    V, phi = manufactured_from_jet(GRID, resonance_jet, 0, "resonance")
    table = moments(V, phi, 0)
    element = BasisElement(0, phi, 0.0, table.monopole, 0.0, table.in_E0, table.in_E1)
    return ThresholdBasis((element,), "first", V)


def second_kind_basis():
    V, g = manufactured_from_jet(GRID, ell1_profile(), 1, "ell1")
    table = moments(V, g, 1)
    element = BasisElement(1, g, 0.0, 0.0, table.dipole[0], table.in_E0, table.in_E1)
    return ThresholdBasis((element,), "second", V)


def gauss(ell=0):
    if ell == 0:
        return SectorFunction(0, RadialProfile.from_function(GRID, lambda r: np.exp(-r * r)))
    return SectorFunction(1, RadialProfile.from_function(GRID, lambda r: r * np.exp(-r * r)))


class TestFiniteRankOperator(unittest.TestCase):

    def test_apply(self):
        f, g, u = gauss(), gauss(), gauss()
        op = FiniteRankOperator((f,), (g,), np.array([[2.0]]))
        out = op(u)
        expected = 2.0 * g.inner(u) * f.radial.values
        np.testing.assert_allclose(out.radial.values, expected, rtol=1e-12)
        self.assertEqual(op.rank_bound, 1)
        self.assertEqual(op.numerical_rank(0), 1)
        self.assertEqual(op.numerical_rank(1), 0)

    def test_shape_and_sector_checks(self):
        with self.assertRaises(DomainError):
            FiniteRankOperator((gauss(),), (gauss(), gauss()), np.eye(1))
        op = FiniteRankOperator((gauss(1),), (gauss(0),), np.eye(1))
        with self.assertRaises(DomainError):
            op(gauss(0))

    def test_sum_is_block_diagonal(self):
        a = FiniteRankOperator((gauss(),), (gauss(),), np.eye(1))
        b = FiniteRankOperator((gauss(1),), (gauss(1),), np.eye(1))
        total = a + b
        self.assertEqual(total.matrix.shape, (2, 2))
        self.assertEqual(total.rank_bound, 2)
        self.assertEqual(total.matrix[0, 1], 0)


class TestFirstKindExpansion(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.tb = first_kind_basis()

    def test_single_resonant_term(self):
        expansion = singular_expansion(3, self.tb)
        self.assertEqual(expansion.source, "m3-first")
        (term,) = expansion.terms
        self.assertEqual(term.label, "-(a/lambda)|phi><phi|V")
        self.assertEqual((term.lambda_power, term.log_power), (-1, 0))
        self.assertEqual(term.rank_bound, 1)
        self.assertEqual(term.payload.numerical_rank(0), 1)
        a = canonical_resonance(self.tb).a
        self.assertAlmostEqual(abs(term.coefficient + a), 0.0, places=12)
        self.assertAlmostEqual(abs(a - 3j * math.pi / 16) / (3 * math.pi / 16), 0.0, delta=1e-3)

    def test_no_eigenfunctions(self):
        self.assertEqual(unit_eigenfunctions(self.tb), [])

    def test_higher_dimensions_reject_resonance(self):
        with self.assertRaises(PreconditionError):
            singular_expansion(5, self.tb)
        with self.assertRaises(PreconditionError):
            singular_expansion(5, cr=canonical_resonance(self.tb))


class TestSecondKindExpansion(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.tb = second_kind_basis()

    def test_terms(self):
        expansion = singular_expansion(3, self.tb)
        self.assertEqual(expansion.source, "m3-second")
        self.assertEqual(expansion.orders(), [(-2, 0), (-1, 0)])
        pv = expansion.term("PV/lambda^2")
        self.assertEqual(pv.rank_bound, 3)
        self.assertEqual(pv.payload.numerical_rank(1), 1)
        with self.assertRaises(KeyError):
            expansion.term("missing")

    def test_cross_matrix_is_dipole_square(self):
        (unit,) = unit_eigenfunctions(self.tb)
        self.assertAlmostEqual(unit.norm(), 1.0, places=10)
        dipole = moments(self.tb.potential, unit.radial, 1).dipole[0]
        a = eigen_cross_matrix(self.tb)
        self.assertEqual(a.shape, (1, 1))
        self.assertLess(a[0, 0], 0.0)
        self.assertAlmostEqual(a[0, 0] / (-dipole ** 2 / (12 * math.pi ** 2)), 1.0, places=10)

    def test_projection_is_idempotent_on_eigenfunction(self):
        (unit,) = unit_eigenfunctions(self.tb)
        image = projection_operator(self.tb, times_v=False)(unit)
        np.testing.assert_allclose(image.radial.values, unit.radial.values, rtol=1e-8, atol=1e-14)
        # the eigenfunction carries a dipole, so it is outside E_1
        self.assertEqual(len(projection_minus_e1(self.tb).left), 1)


class TestExpansionStructure(unittest.TestCase):

    def test_m3_needs_basis(self):
        with self.assertRaises(PreconditionError):
            singular_expansion(3)

    def test_m4_has_no_expansion(self):
        with self.assertRaises(DimensionError):
            singular_expansion(4)

    def test_m5(self):
        expansion = singular_expansion(5)
        self.assertEqual(expansion.source, "m5")
        self.assertEqual(expansion.terms[1].coefficient, -1j / (24 * math.pi ** 2))
        self.assertTrue(expansion.terms[0].symbolic)

    def test_odd_m_above_five(self):
        self.assertEqual(singular_expansion(7).orders(), [(-2, 0)])

    def test_m6(self):
        expansion = singular_expansion(6, phi_norm=1.0)
        self.assertEqual(expansion.operator, "V(I + G0 V)^-1")
        self.assertEqual(expansion.orders(), [(-2, 0), (0, 1), (2, 2), (2, 1)])
        self.assertEqual(expansion.terms[3].rank_bound, 8)
        self.assertIsNotNone(expansion.terms[2].coefficient)
        self.assertIsNone(singular_expansion(6).terms[2].coefficient)

    def test_even_log_term_absorbed_from_twelve(self):
        for m, absorbed in ((8, False), (10, False), (12, True)):
            term = singular_expansion(m).terms[1]
            self.assertEqual((term.lambda_power, term.log_power), (m - 6, 1))
            self.assertIsNone(term.coefficient)
            self.assertEqual(term.absorbable, absorbed, f"m={m}")

    def test_serializable(self):
        payload = singular_expansion(6).to_dict()
        self.assertEqual(payload['m'], 6)
        self.assertTrue(all(t['symbolic'] for t in payload['terms']))


if __name__ == '__main__':
    unittest.main()
