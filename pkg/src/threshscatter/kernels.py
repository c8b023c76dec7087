"""
Free resolvent kernels G0(lambda, x) = (-Delta - lambda^2)^{-1}(x) for m >= 3.

Three routes are provided:
- the general one-dimensional t-integral (any m),
- the exponential-polynomial closed form (odd m),
- the superposition over a > 0 of exponential-polynomials (even m).
"""
import cmath
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn

from .errors import AccuracyError, DimensionError, DomainError, RangeError
from .profiles import sphere_area
from .quadrature import compactified_rule, laguerre_rule

logger = logging.getLogger(__name__)

DEFAULT_LAGUERRE_NODES = 200
DEFAULT_SUPERPOSITION_NODES = 96
DEFAULT_OSCILLATION_CAP = 1e3
DEFAULT_KERNEL_RTOL = 1e-9
EVEN_ROUTES = ("contour", "rule")
RULE_KAPPA_MAX = 1.0


def _require_dimension(m: int, parity: Optional[str] = None) -> None:
    if not isinstance(m, (int, np.integer)) or m < 3:
        raise DimensionError(f"dimension must be an integer >= 3, got {m!r}")
    if parity == "odd" and m % 2 == 0:
        raise DimensionError(f"route needs an odd dimension, got m={m}")
    if parity == "even" and m % 2 == 1:
        raise DimensionError(f"route needs an even dimension, got m={m}")


def green_constant(m: int) -> float:
    """C0 = 1 / ((m-2) w_{m-1}), the zero-energy Green constant."""
    _require_dimension(m)
    return 1.0 / ((m - 2) * sphere_area(m))


# --- ODD DIMENSIONS ---

def exact_coeff_ratios(m: int) -> List[Fraction]:
    """
    Rational parts q_j of the odd-dimensional coefficients,
    C_j = (-i)^j q_j pi^{-(m-1)/2}.
    """
    _require_dimension(m, "odd")
    half = (m - 3) // 2
    return [
        Fraction(math.factorial(m - 3 - j),
                 2 ** (m - 1 - j) * math.factorial(j) * math.factorial(half - j))
        for j in range(half + 1)
    ]


def c0c1_holds(m: int) -> bool:
    """i C0 + C1 = 0, decided in exact arithmetic (q0 == q1)."""
    q = exact_coeff_ratios(m)
    if len(q) < 2:
        raise DimensionError("i C0 + C1 = 0 needs m >= 5")
    return q[0] == q[1]


def odd_kernel_coeffs(m: int) -> List[complex]:
    """Coefficients C_j, j = 0..(m-3)/2, of G0 = e^{i lambda r} r^{-(m-2)} sum_j C_j (lambda r)^j."""
    scale = math.pi ** (-(m - 1) / 2)
    return [complex((-1j) ** j) * float(q) * scale for j, q in enumerate(exact_coeff_ratios(m))]


def eval_kernel_closed(m: int, lam: complex, r: float) -> complex:
    _require_dimension(m, "odd")
    if r <= 0:
        raise DomainError(f"radius must be positive, got {r}")
    kappa = lam * r
    poly = sum(c * kappa ** j for j, c in enumerate(odd_kernel_coeffs(m)))
    return complex(cmath.exp(1j * kappa) * poly / r ** (m - 2))


# --- GENERAL ROUTE ---

def eval_kernel_general(m: int, lam: complex, r: float,
                        nodes: int = DEFAULT_LAGUERRE_NODES,
                        rtol: float = DEFAULT_KERNEL_RTOL) -> complex:
    """
    G0 through the t-integral

        e^{i lambda r} / (2 (2 pi)^{(m-1)/2} Gamma((m-1)/2) r^{m-2})
            * int_0^inf e^{-t} t^alpha (t/2 - i lambda r)^alpha dt,   alpha = (m-3)/2.

    Gauss-Laguerre with weight t^alpha e^{-t} is tried first (exact for odd m);
    when the n and n/2 rules disagree the integral is redone adaptively.
    """
    _require_dimension(m)
    lam = complex(lam)
    if lam.imag < 0:
        raise DomainError(f"lambda must lie in the closed upper half-plane, got {lam}")
    if r <= 0:
        raise DomainError(f"radius must be positive, got {r}")
    if lam == 0:
        return complex(green_constant(m) / r ** (m - 2))

    alpha = (m - 3) / 2.0
    kappa = lam * r

    def amplitude(t):
        return (t / 2.0 - 1j * kappa) ** alpha

    x, w = laguerre_rule(nodes, alpha)
    fine = np.dot(w, amplitude(x))
    xc, wc = laguerre_rule(max(nodes // 2, 8), alpha)
    coarse = np.dot(wc, amplitude(xc))
    value = fine
    if abs(fine - coarse) > rtol * abs(fine):
        logger.debug(f"Laguerre rule unsettled for m={m}, lambda r={kappa}; switching to adaptive quadrature")
        value = _adaptive_t_integral(alpha, amplitude, rtol)

    pref = 1.0 / (2.0 * (2.0 * math.pi) ** ((m - 1) / 2) * math.gamma((m - 1) / 2) * r ** (m - 2))
    return complex(cmath.exp(1j * kappa) * pref * value)


def _adaptive_t_integral(alpha: float, amplitude: Callable, rtol: float) -> complex:
    # t = v^2 removes the t^alpha endpoint behaviour for half-integer alpha
    def part(v, which):
        t = v * v
        val = 2.0 * v ** (2.0 * alpha + 1.0) * math.exp(-t) * amplitude(t)
        return val.real if which == 0 else val.imag

    re, err_re = integrate.quad(part, 0.0, np.inf, args=(0,), epsabs=0.0, epsrel=rtol, limit=400)
    im, err_im = integrate.quad(part, 0.0, np.inf, args=(1,), epsabs=0.0, epsrel=rtol, limit=400)
    value = complex(re, im)
    estimate = math.hypot(err_re, err_im)
    if estimate > 10.0 * rtol * max(abs(value), 1e-300):
        raise AccuracyError(f"t-integral did not converge (estimate {estimate:.3e})", estimate=estimate)
    return value


# --- EVEN DIMENSIONS ---

@dataclass(frozen=True)
class SuperpositionRule:
    """
    T_j^(a)[f] = prefactor * int_0^inf (1+a)^{-s} a^{-1/2} f(a) da,  s = 2 nu - j + 1/2.
    """
    m: int
    j: int
    s: float
    prefactor: complex
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def nu(self) -> int:
        return (self.m - 2) // 2

    def weight(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        return (1.0 + a) ** (-self.s) * a ** -0.5

    def reference_mass(self) -> float:
        """int_0^inf (1+a)^{-s} a^{-1/2} da = sqrt(pi) Gamma(s-1/2) / Gamma(s)."""
        return math.sqrt(math.pi) * math.gamma(self.s - 0.5) / math.gamma(self.s)

    def quadrature_mass(self) -> float:
        return float(np.sum(self.weights))

    def apply(self, f: Callable, reduced: bool = False) -> complex:
        values = np.asarray(f(self.nodes))
        if values.shape == ():
            values = np.full(self.nodes.shape, values)
        total = complex(np.dot(self.weights, values))
        pref = self.prefactor
        if reduced:
            pref = pref / ((-2j) ** self.j * math.comb(self.nu, self.j))
        return pref * total


def superposition_prefactor(m: int, j: int) -> complex:
    """C_{m,j} w_{m-1} = (-2i)^j Gamma(2nu-j+1/2) binom(nu, j) / ((m-2)! sqrt(pi))."""
    _require_dimension(m, "even")
    nu = (m - 2) // 2
    if not 0 <= j <= nu:
        raise DomainError(f"j must lie in 0..{nu} for m={m}, got {j}")
    s = 2 * nu - j + 0.5
    return (-2j) ** j * math.gamma(s) * math.comb(nu, j) / (math.factorial(m - 2) * math.sqrt(math.pi))


def superposition_rule(m: int, j: int, nodes: int = DEFAULT_SUPERPOSITION_NODES) -> SuperpositionRule:
    pref = superposition_prefactor(m, j)
    nu = (m - 2) // 2
    s = 2 * nu - j + 0.5
    a, w = compactified_rule(nodes, s)
    return SuperpositionRule(m=m, j=j, s=s, prefactor=pref, nodes=a, weights=w)


def _growth_exponent(f: Callable) -> Optional[float]:
    probe = np.array([1e6, 1e8])
    with np.errstate(all="ignore"):
        vals = np.abs(np.asarray(f(probe), dtype=complex) * np.ones(2))
    if not np.all(np.isfinite(vals)):
        return math.inf
    if np.any(vals == 0):
        return None
    return float(np.log(vals[1] / vals[0]) / np.log(probe[1] / probe[0]))


def superposition_functional(m: int, j: int, f: Callable, reduced: bool = False,
                             nodes: int = DEFAULT_SUPERPOSITION_NODES) -> complex:
    """
    T_j^(a)[f] for a vectorised callable f(a).

    With reduced=True the factor (-2i)^j binom(nu, j) is divided out; the
    reduced functional maps 1 to (m-3-j)!/(m-2)!.
    """
    rule = superposition_rule(m, j, nodes)
    limit = 2 * rule.nu - j
    growth = _growth_exponent(f)
    if growth is not None and growth >= limit - 1e-6:
        raise DomainError(f"integrand grows like a^{growth:.2f}; T_{j} needs degree < {limit} for m={m}")
    return rule.apply(f, reduced=reduced)


def t_unit(m: int, j: int) -> Fraction:
    """(m-3-j)!/(m-2)!, the reduced T_j^(a)[1]."""
    _require_dimension(m, "even")
    return Fraction(math.factorial(m - 3 - j), math.factorial(m - 2))


def tja1_closed_form(m: int, j: int, k: int) -> complex:
    """
    T_j^(a)[(1+2a)^{-k}] for k >= 1:

        (-i)^j 2^{m-1} Gamma(2nu-j+k) binom(nu,j) / ((m-2)! Gamma(k))
            * int_1^inf (x^2-1)^{k-1} (x^2+1)^{-(2nu-j+k)} dx
    """
    _require_dimension(m, "even")
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    nu = (m - 2) // 2
    if not 0 <= j <= nu:
        raise DomainError(f"j must lie in 0..{nu} for m={m}, got {j}")
    power = 2 * nu - j + k
    tail, _ = integrate.quad(lambda x: (x * x - 1.0) ** (k - 1) * (x * x + 1.0) ** (-power),
                             1.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    pref = (-1j) ** j * 2.0 ** (m - 1) * math.gamma(power) * math.comb(nu, j)
    pref /= math.factorial(m - 2) * math.gamma(k)
    return complex(pref * tail)


def _rotated_integral(kappa: float, s: float, nodes: int, rtol: float) -> complex:
    """int_0^inf t^{-1/2} e^{-t} (1 + i t/(2 kappa))^{-s} dt."""
    def amplitude(t):
        return (1.0 + 1j * t / (2.0 * kappa)) ** (-s)

    x, w = laguerre_rule(nodes, -0.5)
    fine = np.dot(w, amplitude(x))
    xc, wc = laguerre_rule(max(nodes // 2, 8), -0.5)
    coarse = np.dot(wc, amplitude(xc))
    if abs(fine - coarse) <= rtol * abs(fine):
        return complex(fine)
    logger.debug(f"rotated contour: Laguerre unsettled at lambda r={kappa}; using adaptive quadrature")
    return _adaptive_t_integral(-0.5, amplitude, rtol)


def eval_kernel_even(m: int, lam: float, r: float,
                     cap: float = DEFAULT_OSCILLATION_CAP,
                     nodes: int = DEFAULT_LAGUERRE_NODES,
                     rtol: float = DEFAULT_KERNEL_RTOL,
                     route: str = "contour",
                     rule_nodes: int = DEFAULT_SUPERPOSITION_NODES) -> complex:
    """
    G0 = w_{m-1}^{-1} sum_j T_j^(a)[e^{i lambda r (1+2a)} (lambda r)^j r^{-(m-2)}].

    route="contour" takes the oscillatory a-integral along a = i b, where it
    becomes a Laguerre-type integral; lambda r above `cap` raises RangeError.
    route="rule" applies the SuperpositionRule of each j to e^{2i lambda r a}
    directly. The compactified nodes resolve that oscillation only for small
    lambda r, so it serves as a cross-check of the contour below RULE_KAPPA_MAX.
    """
    _require_dimension(m, "even")
    if route not in EVEN_ROUTES:
        raise DomainError(f"unknown even-dimension route {route!r}; expected one of {EVEN_ROUTES}")
    if r <= 0:
        raise DomainError(f"radius must be positive, got {r}")
    if lam < 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    omega = sphere_area(m)
    if lam == 0:
        t0 = superposition_functional(m, 0, lambda a: np.ones_like(a))
        return complex(t0 / (omega * r ** (m - 2)))

    kappa = lam * r
    if kappa > cap:
        raise RangeError(f"lambda r = {kappa:.3g} exceeds the oscillation cap {cap:.3g}")

    nu = (m - 2) // 2
    total = 0j
    if route == "rule":
        if kappa > RULE_KAPPA_MAX:
            raise RangeError(f"the superposition rule resolves lambda r <= {RULE_KAPPA_MAX:g}, got {kappa:.3g}")
        for j in range(nu + 1):
            rule = superposition_rule(m, j, rule_nodes)
            total += rule.apply(lambda a: np.exp(2j * kappa * a)) * kappa ** j
        return complex(cmath.exp(1j * kappa) * total / (omega * r ** (m - 2)))

    rotation = cmath.exp(1j * math.pi / 4) / math.sqrt(2.0 * kappa)
    for j in range(nu + 1):
        s = 2 * nu - j + 0.5
        inner = _rotated_integral(kappa, s, nodes, rtol)
        total += superposition_prefactor(m, j) * kappa ** j * rotation * inner
    return complex(cmath.exp(1j * kappa) * total / (omega * r ** (m - 2)))


# --- MODEL ---

@dataclass(frozen=True)
class KernelModel:
    """Dimension-dependent description of G0(lambda, .)."""
    m: int
    parity: str
    coeffs: Tuple[complex, ...] = ()
    nu: Optional[int] = None

    @classmethod
    def for_dimension(cls, m: int) -> "KernelModel":
        _require_dimension(m)
        if m % 2:
            return cls(m=m, parity="odd", coeffs=tuple(odd_kernel_coeffs(m)))
        return cls(m=m, parity="even", nu=(m - 2) // 2)

    @property
    def c0(self) -> float:
        return green_constant(self.m)

    def rules(self, nodes: int = DEFAULT_SUPERPOSITION_NODES) -> List[SuperpositionRule]:
        if self.parity != "even":
            raise DimensionError(f"superposition rules exist for even m only, got m={self.m}")
        return [superposition_rule(self.m, j, nodes) for j in range(self.nu + 1)]

    def evaluate(self, lam: complex, r: float, cap: float = DEFAULT_OSCILLATION_CAP) -> complex:
        """Closed form for odd m, superposition for even m."""
        if self.parity == "odd":
            return eval_kernel_closed(self.m, lam, r)
        return eval_kernel_even(self.m, float(np.real(lam)), r, cap=cap)

    def to_dict(self) -> dict:
        return {
            'm': self.m,
            'parity': self.parity,
            'coeffs': [[c.real, c.imag] for c in self.coeffs],
            'nu': self.nu,
        }
