"""
Closed-form constants of the finite-rank corrections for m >= 5.

Integrals over [1, inf) are done with scipy's adaptive quadrature; Gamma
ratios go through lgamma so that m up to 12 does not lose digits.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple

from scipy.integrate import quad

from ..errors import DimensionError, DomainError
from ..profiles import sphere_area

logger = logging.getLogger(__name__)

QUAD_EPSABS = 1e-15
QUAD_EPSREL = 1e-13


def _require_odd(m: int):
    if m < 5 or m % 2 == 0:
        raise DimensionError(f"expected an odd dimension >= 5, got m={m}")


def _require_even(m: int, low: int = 6):
    if m < low or m % 2:
        raise DimensionError(f"expected an even dimension >= {low}, got m={m}")


def _gamma_ratio(a: float, b: float) -> float:
    """Gamma(a) / Gamma(b)."""
    return math.exp(math.lgamma(a) - math.lgamma(b))


def _tail_integral(m: int, j: int = 0) -> float:
    """int_1^inf (x^2 - 1)^j (x^2 + 1)^{-(m-1)} dx."""
    value, err = quad(lambda x: (x * x - 1.0) ** j * (x * x + 1.0) ** (1 - m), 1.0, math.inf,
                      epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
    logger.debug(f"tail integral m={m}, j={j}: {value:.16g} (+/- {err:.1e})")
    return value


def _even_prefactor(m: int) -> float:
    """2^m Gamma(m/2) / (sqrt(pi) Gamma((m-1)/2))."""
    return 2.0 ** m * _gamma_ratio(m / 2.0, (m - 1) / 2.0) / math.sqrt(math.pi)


def dm_constant(m: int) -> float:
    """
    D_m, the weight of the eigenprojection in the large-p correction.

    odd m:  Gamma((m-2)/2) / (sqrt(pi) Gamma((m-1)/2))
    even m: 2^m Gamma(m/2) / (sqrt(pi) Gamma((m-1)/2)) int_1^inf (x^2+1)^{-(m-1)} dx
    """
    if m < 5:
        raise DimensionError(f"D_m is defined for m >= 5, got m={m}")
    if m % 2:
        return _gamma_ratio((m - 2) / 2.0, (m - 1) / 2.0) / math.sqrt(math.pi)
    return _even_prefactor(m) * _tail_integral(m)


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float
    residual: float

    def to_dict(self) -> dict:
        return {'lhs': self.lhs, 'rhs': self.rhs, 'residual': self.residual}


def shin_rhs(m: int) -> float:
    """Gamma(m-3/2)/(4 Gamma(m-1)) (sqrt(pi) - sum_{j=1}^{m-2} Gamma(j) 2^{1-j} / Gamma(j+1/2))."""
    terms = [math.exp(math.lgamma(j) - math.lgamma(j + 0.5) + (1 - j) * math.log(2.0))
             for j in range(1, m - 1)]
    bracket = math.sqrt(math.pi) - math.fsum(terms)
    return _gamma_ratio(m - 1.5, m - 1.0) / 4.0 * bracket


def shin_identity(m: int) -> IdentityCheck:
    """Quadrature of int_1^inf (x^2+1)^{-(m-1)} dx against its Gamma-function closed form."""
    _require_even(m)
    lhs = _tail_integral(m)
    rhs = shin_rhs(m)
    return IdentityCheck(lhs, rhs, abs(lhs - rhs))


@dataclass(frozen=True)
class DmjTable:
    m: int
    values: Tuple[float, ...]

    @property
    def total(self) -> float:
        return math.fsum(self.values)

    @property
    def residual(self) -> float:
        return abs(self.total - 1.0)

    def to_dict(self) -> dict:
        return {'m': self.m, 'values': list(self.values), 'total': self.total, 'residual': self.residual}


def dmj_constant(m: int, j: int) -> float:
    """D_{m,j} = 2^m C(nu,j) Gamma(m/2)/(sqrt(pi) Gamma((m-1)/2)) int_1^inf (x^2-1)^j (x^2+1)^{-(m-1)} dx."""
    _require_even(m)
    nu = (m - 2) // 2
    if not 0 <= j <= nu:
        raise DomainError(f"j must lie in 0..{nu} for m={m}, got {j}")
    return _even_prefactor(m) * math.comb(nu, j) * _tail_integral(m, j)


def dmj_constants(m: int) -> DmjTable:
    """All D_{m,j}, j = 0..(m-2)/2; they sum to 1."""
    _require_even(m)
    nu = (m - 2) // 2
    table = DmjTable(m, tuple(dmj_constant(m, j) for j in range(nu + 1)))
    logger.info(f"D_{{{m},j}} sum to {table.total:.15g}")
    return table


@dataclass(frozen=True)
class BinomialSums:
    """The three equal forms of the odd-dimensional sum, in exact arithmetic."""
    n: int
    factorial_form: Fraction
    reversed_form: Fraction
    direct_form: Fraction

    @property
    def residuals(self) -> Tuple[Fraction, Fraction, Fraction]:
        return tuple(abs(v - 1) for v in (self.factorial_form, self.reversed_form, self.direct_form))

    @property
    def value(self) -> float:
        return float(self.direct_form)

    def to_dict(self) -> dict:
        return {'n': self.n, 'factorial_form': str(self.factorial_form),
                'reversed_form': str(self.reversed_form), 'direct_form': str(self.direct_form)}


def binomial_sums(n: int) -> BinomialSums:
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    m = 2 * n + 3
    factorial_form = sum(
        (Fraction(math.factorial(m - 3 - j), 2 ** (m - 3 - j) * math.factorial(n) * math.factorial(n - j))
         for j in range(n + 1)), Fraction(0))
    reversed_form = sum(
        (Fraction(math.comb(2 * n - k, n - k), 2 ** (2 * n - k)) for k in range(n + 1)), Fraction(0))
    direct_form = sum(
        (Fraction(math.comb(n + k, k), 2 ** (n + k)) for k in range(n + 1)), Fraction(0))
    return BinomialSums(n, factorial_form, reversed_form, direct_form)


def tilde_dm_odd(m: int) -> BinomialSums:
    """D~_m for odd m >= 5, n = (m-3)/2; each form equals 1."""
    _require_odd(m)
    return binomial_sums((m - 3) // 2)


def res5_coefficient() -> complex:
    """a_0 of the m = 5 resonant term."""
    return 1j / (24.0 * math.pi ** 2)


def log_coefficient_m6() -> float:
    """Coefficient of log(lambda) (V phi x V phi) in m = 6: w_5 / (2 pi)^6."""
    return sphere_area(6) / (2.0 * math.pi) ** 6


def log2_coefficient_m6(phi_norm: float) -> float:
    """Coefficient of lambda^2 log^2(lambda) (V phi x V phi) in m = 6."""
    return (sphere_area(6) * phi_norm / (2.0 * math.pi) ** 6) ** 2


def constant_suite(m_max: int = 12) -> List[dict]:
    """Every constant check for 5 <= m <= m_max, one record per (name, m)."""
    records = []
    for m in range(5, m_max + 1):
        records.append({'name': 'dm_constant', 'm': m, 'value': dm_constant(m)})
        if m % 2:
            sums = tilde_dm_odd(m)
            records.append({'name': 'tilde_dm_odd', 'm': m, 'value': sums.value,
                            'residual': float(max(sums.residuals))})
        else:
            check = shin_identity(m)
            records.append({'name': 'shin_identity', 'm': m, 'value': check.lhs, 'residual': check.residual})
            table = dmj_constants(m)
            records.append({'name': 'dmj_constants', 'm': m, 'value': table.total, 'residual': table.residual})
    return records
