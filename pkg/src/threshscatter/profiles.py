"""
Radial profiles on log-uniform grids, plus the two-column profile exchange format.
"""
import math
import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.special import eval_legendre, gamma, roots_legendre

from .errors import DecayError, DomainError, GridMismatchError

logger = logging.getLogger(__name__)

MIN_POINTS = 16
HEADER_TAG = "# threshscatter-profile"

Number = Union[int, float, complex]


def sphere_area(m: int) -> float:
    """Area of the unit sphere in R^m, i.e. 2 pi^(m/2) / Gamma(m/2)."""
    return 2.0 * math.pi ** (m / 2.0) / float(gamma(m / 2.0))


@dataclass(frozen=True)
class LogGrid:
    """
    Log-uniform radii r_i = r_min * exp(i*h), i = 0..n-1.

    The quadrature weights are the trapezoid rule in s = log r (weight h*r_i,
    halved at both ends) plus r_min on the first node for the missing [0, r_min].
    """
    r_min: float = 1e-3
    r_max: float = 1e3
    n: int = 2048

    def __post_init__(self):
        if self.n < MIN_POINTS:
            raise DomainError(f"grid needs at least {MIN_POINTS} points, got {self.n}")
        if not 0 < self.r_min < self.r_max:
            raise DomainError("grid needs 0 < r_min < r_max")

    @cached_property
    def log_step(self) -> float:
        return math.log(self.r_max / self.r_min) / (self.n - 1)

    @cached_property
    def r(self) -> np.ndarray:
        r = self.r_min * np.exp(self.log_step * np.arange(self.n))
        r[-1] = self.r_max
        r.setflags(write=False)
        return r

    @cached_property
    def weights(self) -> np.ndarray:
        w = self.log_step * self.r.copy()
        w[0] *= 0.5
        w[-1] *= 0.5
        w[0] += self.r_min
        w.setflags(write=False)
        return w

    def integrate(self, values: np.ndarray) -> Number:
        """Approximates the integral over (0, r_max) of sampled values."""
        return np.dot(self.weights, values)

    def coarsened(self) -> "LogGrid":
        """Same range with half the points (double log step)."""
        return LogGrid(self.r_min, self.r_max, max(MIN_POINTS, self.n // 2))

    def same_as(self, other: "LogGrid") -> bool:
        return (self.n == other.n and math.isclose(self.r_min, other.r_min, rel_tol=1e-14)
                and math.isclose(self.r_max, other.r_max, rel_tol=1e-14))


@dataclass(eq=False)
class RadialProfile:
    """
    A real or complex function of the radius sampled on a LogGrid.

    decay_exponent is the claimed delta with |f(r)| <= C <r>^(-delta); it also
    drives extrapolation beyond r_max.
    """
    grid: LogGrid
    values: np.ndarray
    decay_exponent: float = math.inf
    provenance: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.grid.n,):
            raise GridMismatchError(
                f"profile has {self.values.shape} samples for a grid of {self.grid.n} points"
            )
        if not self.tail_check():
            logger.warning(f"profile '{self.provenance or '-'}' exceeds its claimed decay "
                           f"r^-{self.decay_exponent:g} near r_max")

    # --- construction ---

    @classmethod
    def from_function(cls, grid: LogGrid, fn: Callable[[np.ndarray], np.ndarray],
                      decay_exponent: float = math.inf, provenance: str = "") -> "RadialProfile":
        return cls(grid, np.asarray(fn(grid.r)), decay_exponent, provenance)

    @classmethod
    def zeros(cls, grid: LogGrid) -> "RadialProfile":
        return cls(grid, np.zeros(grid.n), math.inf, "zero")

    # --- evaluation ---

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    @cached_property
    def _splines(self):
        s = np.log(self.grid.r)
        if self.is_complex:
            return CubicSpline(s, self.values.real), CubicSpline(s, self.values.imag)
        return CubicSpline(s, self.values), None

    def __call__(self, r) -> np.ndarray:
        """Evaluates the profile at arbitrary radii (cubic spline in log r)."""
        r = np.asarray(r, dtype=float)
        inner = np.clip(r, self.grid.r_min, self.grid.r_max)
        s = np.log(inner)
        re, im = self._splines
        out = re(s) if im is None else re(s) + 1j * im(s)
        beyond = r > self.grid.r_max
        if np.any(beyond):
            if math.isinf(self.decay_exponent):
                tail = np.zeros(np.count_nonzero(beyond))
            else:
                tail = self.values[-1] * (r[beyond] / self.grid.r_max) ** (-self.decay_exponent)
            out = np.asarray(out, dtype=np.result_type(out, tail))
            out[beyond] = tail
        return out

    def derivative(self, order: int = 1) -> np.ndarray:
        """d^k f / dr^k on the grid from the log-r spline (k = 1 or 2)."""
        re, im = self._splines
        s = np.log(self.grid.r)
        r = self.grid.r

        def _d(spl):
            d1 = spl(s, 1) / r
            if order == 1:
                return d1
            return (spl(s, 2) - spl(s, 1)) / r ** 2

        if order not in (1, 2):
            raise DomainError("only first and second derivatives are available")
        return _d(re) if im is None else _d(re) + 1j * _d(im)

    # --- arithmetic ---

    def _check(self, other: "RadialProfile"):
        if not self.grid.same_as(other.grid):
            raise GridMismatchError("profiles live on different grids")

    def __add__(self, other):
        if isinstance(other, RadialProfile):
            self._check(other)
            return RadialProfile(self.grid, self.values + other.values,
                                 min(self.decay_exponent, other.decay_exponent), "sum")
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, RadialProfile):
            return self + (-1.0) * other
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, RadialProfile):
            self._check(other)
            return RadialProfile(self.grid, self.values * other.values,
                                 self.decay_exponent + other.decay_exponent, "product")
        if np.isscalar(other):
            return RadialProfile(self.grid, self.values * other, self.decay_exponent, self.provenance)
        return NotImplemented

    __rmul__ = __mul__

    def conj(self) -> "RadialProfile":
        return RadialProfile(self.grid, np.conj(self.values), self.decay_exponent, self.provenance)

    def with_values(self, values: np.ndarray, provenance: Optional[str] = None,
                    decay_exponent: Optional[float] = None) -> "RadialProfile":
        return RadialProfile(
            self.grid, values,
            self.decay_exponent if decay_exponent is None else decay_exponent,
            self.provenance if provenance is None else provenance,
        )

    def dilate(self, t: float) -> "RadialProfile":
        """u_t(r) = u(r/t) on the same grid."""
        return self.with_values(self(self.grid.r / t), provenance=f"{self.provenance}@t={t:g}")

    def resample(self, grid: LogGrid) -> "RadialProfile":
        return RadialProfile(grid, self(grid.r), self.decay_exponent, self.provenance)

    # --- integrals ---

    def moment(self, power: float) -> Number:
        """Integral of r^power f(r) over (0, r_max)."""
        return self.grid.integrate(self.grid.r ** power * self.values)

    def integral(self, m: int) -> Number:
        """Integral of the radial function over R^m."""
        return sphere_area(m) * self.moment(m - 1)

    def lp_norm(self, p: float, m: int = 3, angular: Optional[float] = None) -> float:
        """L^p(R^m) norm; `angular` replaces the sphere area for non-radial sectors."""
        ang = sphere_area(m) if angular is None else angular
        return float((ang * self.grid.integrate(np.abs(self.values) ** p * self.grid.r ** (m - 1))) ** (1.0 / p))

    def tail_check(self) -> bool:
        """
        |f(r_N)| <r_N>^delta must stay below ten times the median of the same
        product over the last decade of the grid.
        """
        if math.isinf(self.decay_exponent):
            return True
        r = self.grid.r
        weight = np.sqrt(1.0 + r ** 2) ** self.decay_exponent
        product = np.abs(self.values) * weight
        decade = r >= r[-1] / 10.0
        median = float(np.median(product[decade]))
        if median == 0.0:
            return product[-1] == 0.0
        return bool(product[-1] <= 10.0 * median)


@dataclass(eq=False)
class SectorFunction:
    """
    A function g(r) P_ell(cos theta) on R^3: radial factor times a zonal harmonic.
    ell = 0 is a plain radial function, ell = 1 is x_1 g(r) / r.
    """
    ell: int
    radial: RadialProfile
    multiplicity: int = field(default=1)

    @property
    def grid(self) -> LogGrid:
        return self.radial.grid

    def angular_lp(self, p: float) -> float:
        return angular_lp(self.ell, p)

    def inner(self, other: "SectorFunction") -> complex:
        """L^2(R^3) pairing, conjugate-linear in self."""
        if self.ell != other.ell:
            return 0.0
        ang = 4.0 * math.pi / (2 * self.ell + 1)
        return ang * self.grid.integrate(np.conj(self.radial.values) * other.radial.values * self.grid.r ** 2)

    def norm(self) -> float:
        return math.sqrt(abs(self.inner(self)))

    def lp_norm(self, p: float) -> float:
        return self.radial.lp_norm(p, m=3, angular=self.angular_lp(p))

    def scaled(self, c: Number) -> "SectorFunction":
        return SectorFunction(self.ell, c * self.radial, self.multiplicity)

    def __add__(self, other: "SectorFunction") -> "SectorFunction":
        if self.ell != other.ell:
            raise DomainError("cannot add functions from different angular sectors")
        return SectorFunction(self.ell, self.radial + other.radial, self.multiplicity)

    def dilate(self, t: float) -> "SectorFunction":
        return SectorFunction(self.ell, self.radial.dilate(t), self.multiplicity)


@lru_cache(maxsize=64)
def angular_lp(ell: int, p: float) -> float:
    """Integral of |P_ell(cos theta)|^p over the unit sphere of R^3."""
    if ell == 0:
        return 4.0 * math.pi
    if p == 2:
        return 4.0 * math.pi / (2 * ell + 1)
    zeros, _ = roots_legendre(ell)
    value, _ = quad(lambda mu: abs(eval_legendre(ell, mu)) ** p, -1.0, 1.0,
                    points=list(zeros), limit=200)
    return 2.0 * math.pi * value


# --- EXCHANGE FORMAT ---

def write_profile(path: str, profile: RadialProfile, m: int = 3, ell: int = 0) -> None:
    """
    Writes the two-column exchange format: a header line with m, ell and delta,
    then one `radius value` line per node (a third column holds Im for complex data).
    Floats are written with repr(), which round-trips bit-exactly.
    """
    lines = [f"{HEADER_TAG} m={m} ell={ell} delta={profile.decay_exponent!r} provenance={profile.provenance or '-'}"]
    cplx = profile.is_complex
    for r, v in zip(profile.grid.r, profile.values):
        if cplx:
            lines.append(f"{float(r)!r} {float(v.real)!r} {float(v.imag)!r}")
        else:
            lines.append(f"{float(r)!r} {float(v)!r}")
    with open(path, 'w', encoding='utf-8') as f:
        f.write("\n".join(lines) + "\n")


def read_profile(path: str) -> Tuple[RadialProfile, int, int]:
    """Reads the exchange format; returns (profile, m, ell)."""
    with open(path, 'r', encoding='utf-8') as f:
        raw = [line.strip() for line in f if line.strip()]
    if not raw or not raw[0].startswith(HEADER_TAG):
        raise DomainError(f"{path}: missing '{HEADER_TAG}' header line")

    meta = {}
    for token in raw[0][len(HEADER_TAG):].split():
        key, _, value = token.partition("=")
        meta[key] = value
    try:
        m = int(meta["m"])
        ell = int(meta["ell"])
        delta = float(meta["delta"])
    except (KeyError, ValueError) as exc:
        raise DomainError(f"{path}: malformed header ({exc})")
    provenance = meta.get("provenance", "-")

    rows = [line.split() for line in raw[1:] if not line.startswith("#")]
    radii = np.array([float(row[0]) for row in rows])
    if any(len(row) == 3 for row in rows):
        values = np.array([complex(float(row[1]), float(row[2]) if len(row) == 3 else 0.0) for row in rows])
    else:
        values = np.array([float(row[1]) for row in rows])

    grid = LogGrid(float(radii[0]), float(radii[-1]), len(radii))
    if not np.allclose(grid.r, radii, rtol=1e-12, atol=0.0):
        raise GridMismatchError(f"{path}: radii are not log-uniform")
    logger.info(f"Loaded profile {path}: n={grid.n}, m={m}, ell={ell}, delta={delta}")
    profile = RadialProfile(grid, values, delta, "" if provenance == "-" else provenance)
    if not profile.tail_check():
        raise DecayError(f"{path}: samples near r_max do not decay like r^-{delta:g}")
    return profile, m, ell
