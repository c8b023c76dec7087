"""
Singular part S(lambda) of (I + G0(lambda) V)^{-1} near lambda = 0.

Each term is lambda^k log^j(lambda) times a finite-rank operator. For m = 3 the
operators are assembled on the radial grid from the threshold basis; for
m >= 5 only the structure and the known constants are recorded.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import DimensionError, DomainError, PreconditionError
from ..profiles import RadialProfile, SectorFunction
from ..threshold import CanonicalResonance, ThresholdBasis, canonical_resonance, dj_operator
from .constants import log2_coefficient_m6, log_coefficient_m6, res5_coefficient

logger = logging.getLogger(__name__)

RANK_RTOL = 1e-10
# In m >= 12 the lambda^{m-6} log(lambda) term is regular enough to be part of E(lambda).
ABSORBABLE_FROM = 12
F2_RANK_BOUND = 8


@dataclass(eq=False)
class FiniteRankOperator:
    """
    u -> sum_{j,k} left_j matrix[j, k] <right_k, u>, on zonal sector functions.
    """
    left: Tuple[SectorFunction, ...]
    right: Tuple[SectorFunction, ...]
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.atleast_2d(np.asarray(self.matrix, dtype=complex))
        if self.matrix.shape != (len(self.left), len(self.right)):
            raise DomainError(f"matrix shape {self.matrix.shape} does not match "
                              f"{len(self.left)} x {len(self.right)} factors")

    @property
    def rank_bound(self) -> int:
        """Rank counted with the 2l+1 members of every sector."""
        return sum(f.multiplicity for f in self.left)

    def pairings(self, u: SectorFunction) -> np.ndarray:
        return np.array([g.inner(u) for g in self.right], dtype=complex)

    def apply(self, u: SectorFunction) -> SectorFunction:
        weights = self.matrix @ self.pairings(u)
        out = RadialProfile.zeros(u.grid).with_values(np.zeros(u.grid.n, dtype=complex))
        for f, w in zip(self.left, weights):
            if w == 0:
                continue
            if f.ell != u.ell:
                raise DomainError(f"operator maps sector {u.ell} into sector {f.ell}")
            out = out + f.radial * complex(w)
        return SectorFunction(u.ell, out)

    def __call__(self, u: SectorFunction) -> SectorFunction:
        return self.apply(u)

    def grid_matrix(self, ell: int) -> np.ndarray:
        """The kernel on the radial grid of sector ell, including quadrature weights."""
        grid = self.left[0].grid
        ang = 4.0 * math.pi / (2 * ell + 1)
        w = ang * grid.weights * grid.r ** 2
        lefts = np.array([f.radial.values if f.ell == ell else np.zeros(grid.n) for f in self.left])
        rights = np.array([np.conj(g.radial.values) * w if g.ell == ell else np.zeros(grid.n)
                           for g in self.right])
        return lefts.T @ self.matrix @ rights

    def numerical_rank(self, ell: int, rtol: float = RANK_RTOL) -> int:
        sigma = np.linalg.svd(self.grid_matrix(ell), compute_uv=False)
        if sigma.size == 0 or sigma[0] == 0.0:
            return 0
        return int(np.sum(sigma > rtol * sigma[0]))

    def __add__(self, other: "FiniteRankOperator") -> "FiniteRankOperator":
        left = self.left + other.left
        right = self.right + other.right
        top = np.hstack([self.matrix, np.zeros((self.matrix.shape[0], other.matrix.shape[1]))])
        bottom = np.hstack([np.zeros((other.matrix.shape[0], self.matrix.shape[1])), other.matrix])
        return FiniteRankOperator(left, right, np.vstack([top, bottom]))


@dataclass(frozen=True)
class SingularTerm:
    lambda_power: int
    log_power: int
    label: str
    coefficient: Optional[complex] = None
    payload: Optional[FiniteRankOperator] = field(default=None, repr=False)
    rank_bound: Optional[int] = None
    absorbable: bool = False

    @property
    def symbolic(self) -> bool:
        return self.payload is None

    def to_dict(self) -> dict:
        coeff = None if self.coefficient is None else [self.coefficient.real, self.coefficient.imag]
        return {'lambda_power': self.lambda_power, 'log_power': self.log_power, 'label': self.label,
                'coefficient': coeff, 'rank_bound': self.rank_bound,
                'absorbable': self.absorbable, 'symbolic': self.symbolic}


@dataclass(frozen=True)
class SingularExpansion:
    m: int
    terms: Tuple[SingularTerm, ...]
    source: str
    operator: str = "(I + G0 V)^-1"

    def orders(self) -> List[Tuple[int, int]]:
        return [(t.lambda_power, t.log_power) for t in self.terms]

    def term(self, label: str) -> SingularTerm:
        for t in self.terms:
            if t.label == label:
                return t
        raise KeyError(label)

    def to_dict(self) -> dict:
        return {'m': self.m, 'source': self.source, 'operator': self.operator,
                'terms': [t.to_dict() for t in self.terms]}


# --- THRESHOLD DATA ON THE GRID ---

def _times_potential(tb: ThresholdBasis, f: SectorFunction) -> SectorFunction:
    V = tb.potential
    radial = f.radial.with_values(np.real(V.V.values) * f.radial.values,
                                  decay_exponent=f.radial.decay_exponent + V.delta)
    return SectorFunction(f.ell, radial, f.multiplicity)


def unit_eigenfunctions(tb: ThresholdBasis) -> List[SectorFunction]:
    """L^2-normalized zonal members of the eigenfunctions in tb."""
    units = []
    for e in tb.eigenfunctions():
        sector = e.as_sector()
        units.append(sector.scaled(1.0 / sector.norm()))
    return units


def d3_pairing(tb: ThresholdBasis, f: SectorFunction, g: SectorFunction) -> float:
    """
    <f | V D_3 V | g> for eigenfunctions f, g.

    Cross-sector pairs vanish. For ell = 1 only the -2 x.y part of |x-y|^2
    survives, giving -(1/12 pi) <x_1 V, f><x_1 V, g>; for ell = 0 D_3 is applied
    on the grid.
    """
    if f.ell != g.ell:
        return 0.0
    vf = _times_potential(tb, f)
    vg = _times_potential(tb, g)
    if f.ell == 0:
        d3 = dj_operator(3, vg.radial)
        return float(np.real(vf.inner(SectorFunction(0, d3))))
    if f.ell == 1:
        grid = f.grid
        r = grid.r
        dip_f = 4.0 * math.pi / 3.0 * float(np.real(grid.integrate(vf.radial.values * r ** 3)))
        dip_g = 4.0 * math.pi / 3.0 * float(np.real(grid.integrate(vg.radial.values * r ** 3)))
        return -dip_f * dip_g / (12.0 * math.pi)
    raise DomainError(f"D_3 pairing is implemented for ell <= 1, got {f.ell}")


def eigen_cross_matrix(tb: ThresholdBasis, units: Optional[Sequence[SectorFunction]] = None) -> np.ndarray:
    """a_jk = pi^{-1} <phi_j | V D_3 V | phi_k> over the real orthonormal eigenbasis."""
    units = list(units) if units is not None else unit_eigenfunctions(tb)
    n = len(units)
    a = np.zeros((n, n))
    for j in range(n):
        for k in range(j, n):
            a[j, k] = a[k, j] = d3_pairing(tb, units[j], units[k]) / math.pi
    return a


def projection_operator(tb: ThresholdBasis, times_v: bool = True,
                        subset: Optional[Sequence[SectorFunction]] = None) -> FiniteRankOperator:
    """P V (or P when times_v is False) over the given unit eigenfunctions."""
    units = list(subset) if subset is not None else unit_eigenfunctions(tb)
    right = tuple(_times_potential(tb, f) if times_v else f for f in units)
    return FiniteRankOperator(tuple(units), right, np.eye(len(units)))


def projection_minus_e1(tb: ThresholdBasis) -> FiniteRankOperator:
    """P minus the projection onto E_1, on the zonal eigenfunctions that carry a dipole."""
    units = [u for u, e in zip(unit_eigenfunctions(tb), tb.eigenfunctions()) if not e.in_E1]
    return projection_operator(tb, times_v=False, subset=units)


def resonance_operator(tb: ThresholdBasis, cr: CanonicalResonance) -> FiniteRankOperator:
    """-a |phi> <phi| V with the canonical resonance."""
    phi = SectorFunction(0, cr.phi_c)
    return FiniteRankOperator((phi,), (_times_potential(tb, phi),), np.array([[-cr.a]]))


# --- EXPANSIONS ---

def _expansion_m3(tb: ThresholdBasis, cr: Optional[CanonicalResonance]) -> SingularExpansion:
    terms: List[SingularTerm] = []
    if tb.kind in ("second", "third"):
        units = unit_eigenfunctions(tb)
        pv = projection_operator(tb)
        a = eigen_cross_matrix(tb, units)
        right = tuple(_times_potential(tb, f) for f in units)
        cross = FiniteRankOperator(tuple(units), right, 1j * math.pi * a)
        terms.append(SingularTerm(-2, 0, "PV/lambda^2", 1.0, pv, pv.rank_bound))
        terms.append(SingularTerm(-1, 0, "iPVD3VPV/lambda", 1j, cross, pv.rank_bound))
    if tb.kind in ("first", "third"):
        cr = cr or canonical_resonance(tb)
        op = resonance_operator(tb, cr)
        terms.append(SingularTerm(-1, 0, "-(a/lambda)|phi><phi|V", -cr.a, op, 1))
    return SingularExpansion(3, tuple(terms), f"m3-{tb.kind}")


def _check_no_resonance(tb: Optional[ThresholdBasis], m: int):
    if tb is not None and tb.resonance() is not None:
        raise PreconditionError(f"m={m} admits no threshold resonances, but the basis has one")


def singular_expansion(m: int, tb: Optional[ThresholdBasis] = None,
                       cr: Optional[CanonicalResonance] = None,
                       phi_norm: Optional[float] = None) -> SingularExpansion:
    """
    Term list of S(lambda). m = 3 needs tb; m >= 5 accepts tb for the PV payload
    and phi_norm (the L^2 norm of PV, V as a function) for the m = 6 coefficient.
    """
    if m == 3:
        if tb is None:
            raise PreconditionError("m = 3 expansion needs a threshold basis")
        if tb.potential.m != 3:
            raise PreconditionError(f"threshold basis was computed for m={tb.potential.m}, not 3")
        return _expansion_m3(tb, cr)
    if m < 5:
        raise DimensionError(f"no singular expansion is available for m={m}")
    if cr is not None:
        raise PreconditionError(f"m={m} has no canonical resonance")
    _check_no_resonance(tb, m)

    pv = projection_operator(tb) if tb is not None and tb.elements else None
    rank = pv.rank_bound if pv is not None else None
    lead = SingularTerm(-2, 0, "PV/lambda^2", 1.0, pv, rank)
    if m % 2:
        if m == 5:
            a0 = res5_coefficient()
            return SingularExpansion(m, (lead, SingularTerm(-1, 0, "-(a0/lambda)|phi><phi|V", -a0)), "m5")
        return SingularExpansion(m, (lead,), "m-odd")

    lead = SingularTerm(-2, 0, "VPV/lambda^2", 1.0, None, rank)
    if m == 6:
        log2 = log2_coefficient_m6(phi_norm) if phi_norm is not None else None
        terms = (
            lead,
            SingularTerm(0, 1, "log(lambda) (Vphi x Vphi)", log_coefficient_m6(), None, 1),
            SingularTerm(2, 2, "lambda^2 log^2(lambda) (Vphi x Vphi)", log2, None, 1),
            SingularTerm(2, 1, "lambda^2 log(lambda) F2", None, None, F2_RANK_BOUND),
        )
        return SingularExpansion(6, terms, "m6", "V(I + G0 V)^-1")
    cm_term = SingularTerm(m - 6, 1, f"c_{m} lambda^{m - 6} log(lambda) (Vphi x Vphi)", None, None, 1,
                           absorbable=m >= ABSORBABLE_FROM)
    if cm_term.absorbable:
        logger.info(f"m={m}: the lambda^{m - 6} log term is absorbed into E(lambda)")
    return SingularExpansion(m, (lead, cm_term), "m-even", "V(I + G0 V)^-1")
