"""
Zero-energy threshold analysis for radial potentials in R^3.

The Birman-Schwinger operator 1 + G0(0)V is discretized sector by sector
(zonal harmonics P_ell), its null space is classified into resonances and
eigenfunctions, and the moment subspaces E0 / E1 are flagged.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space as orthogonal_complement
from scipy.special import gamma as gamma_fn, roots_legendre

from .errors import (AmbiguityError, DecayError, DimensionError, DomainError,
                     NoResonanceError, PreconditionError, RangeError)
from .means import fourier_multiplier, shell_primitive
from .profiles import LogGrid, RadialProfile, SectorFunction, sphere_area
from .quadrature import running_integral

logger = logging.getLogger(__name__)

DEFAULT_ELL_MAX = 2
DEFAULT_NULL_FACTOR = 5.0
DEFAULT_NULL_CAP = 1e-2
DEFAULT_MOMENT_TOL = 1e-6
FIT_RESIDUAL_LIMIT = 1e-2
CANONICAL_MIN_DECAY = 3.5

KINDS = ("generic", "first", "second", "third")


# --- POTENTIALS ---

@dataclass(frozen=True)
class PotentialSpec:
    """A real radial potential V with its decay exponent."""
    V: RadialProfile
    delta: float
    provenance: str = "user-supplied"
    m: int = 3

    def __post_init__(self):
        if self.V.is_complex and np.any(np.imag(self.V.values) != 0):
            raise DomainError("potential must be real-valued")
        if self.delta <= 2.0:
            raise DecayError(f"potential decay exponent must exceed 2, got {self.delta}")

    @property
    def grid(self) -> LogGrid:
        return self.V.grid

    @classmethod
    def from_profile(cls, V: RadialProfile, provenance: str = "user-supplied") -> "PotentialSpec":
        return cls(V.with_values(np.real(V.values)), V.decay_exponent, provenance)


def estimate_decay(values: np.ndarray, r: np.ndarray) -> float:
    """Log-log slope of |V| over the last decade of the grid; inf when V vanishes there."""
    tail = r >= r[-1] / 10.0
    mag = np.abs(values[tail])
    scale = max(np.abs(values).max(), 1e-300)
    if np.all(mag <= 1e-14 * scale):
        return math.inf
    keep = mag > 1e-14 * scale
    slope = np.polyfit(np.log(r[tail][keep]), np.log(mag[keep]), 1)[0]
    return float(-slope)


# --- MANUFACTURED DATA ---

def quintic_blend(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """b = 10x^3 - 15x^4 + 6x^5 clipped to [0, 1], with first and second derivatives."""
    x = np.clip(x, 0.0, 1.0)
    b = x ** 3 * (10.0 - 15.0 * x + 6.0 * x * x)
    db = 30.0 * x * x * (1.0 - x) ** 2
    d2b = 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x)
    return b, db, d2b


Jet = Tuple[np.ndarray, np.ndarray, np.ndarray]


def glued(inner: Callable[[np.ndarray], Jet], outer: Callable[[np.ndarray], Jet],
          r0: float, r1: float) -> Callable[[np.ndarray], Jet]:
    """Joins two jets (value, d/dr, d2/dr2) across [r0, r1] with a quintic blend."""
    width = r1 - r0

    def jet(r: np.ndarray) -> Jet:
        f0, f0p, f0pp = inner(r)
        f1, f1p, f1pp = outer(r)
        b, db, d2b = quintic_blend((r - r0) / width)
        db = db / width
        d2b = d2b / width ** 2
        diff = f1 - f0
        value = (1.0 - b) * f0 + b * f1
        first = (1.0 - b) * f0p + b * f1p + db * diff
        second = (1.0 - b) * f0pp + b * f1pp + 2.0 * db * (f1p - f0p) + d2b * diff
        return value, first, second

    return jet


def resonance_jet(r: np.ndarray) -> Jet:
    """(1+r^2)^{-1/2}: the zero-energy resonance of V = -3 (1+r^2)^{-2}."""
    q = 1.0 + r * r
    return q ** -0.5, -r * q ** -1.5, (2.0 * r * r - 1.0) * q ** -2.5


def inverse_square_jet(r: np.ndarray) -> Jet:
    q = 1.0 + r * r
    return 1.0 / q, -2.0 * r / q ** 2, (6.0 * r * r - 2.0) / q ** 3


def power_jet(k: float) -> Callable[[np.ndarray], Jet]:
    """r^{-k} (harmonic in its sector for the right k)."""
    def jet(r: np.ndarray) -> Jet:
        return r ** -k, -k * r ** (-k - 1.0), k * (k + 1.0) * r ** (-k - 2.0)
    return jet


def ell1_profile(r0: float = 1.0, r1: float = 2.0) -> Callable[[np.ndarray], Jet]:
    """
    Radial factor g = r h of an ell=1 eigenfunction x_1 h(r): h = (1+r^2)^{-1}
    inside, h = r^{-3} outside, quintic glue on [r0, r1].
    """
    h = glued(inverse_square_jet, power_jet(3.0), r0, r1)

    def jet(r: np.ndarray) -> Jet:
        hv, hp, hpp = h(r)
        return r * hv, hv + r * hp, 2.0 * hp + r * hpp

    return jet


def green_tail_profile(radius: float) -> Callable[[np.ndarray], Jet]:
    """Resonance glued to its own Green tail c/r on [radius, radius+1]."""
    c = 1.0
    return glued(resonance_jet, lambda r: (c / r, -c / r ** 2, 2.0 * c / r ** 3), radius, radius + 1.0)


def manufacture_potential(phi: RadialProfile, ell: int = 0,
                          derivatives: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> PotentialSpec:
    """
    V = Delta(g P_ell) / (g P_ell) = (g'' + 2g'/r - ell(ell+1) g/r^2) / g, so that
    (-Delta + V)(g P_ell) = 0. Derivatives come from `derivatives` when given,
    otherwise from the log-r spline of phi.
    """
    g = np.real(phi.values)
    r = phi.grid.r
    if np.any(g <= 0):
        raise DomainError("radial factor must be positive to manufacture a potential")
    if derivatives is None:
        gp, gpp = np.real(phi.derivative(1)), np.real(phi.derivative(2))
    else:
        gp, gpp = derivatives
    V = (gpp + 2.0 * gp / r - ell * (ell + 1) * g / r ** 2) / g
    delta = estimate_decay(V, r)
    if delta <= 2.0:
        raise DecayError(f"manufactured potential decays like r^-{delta:.2f}; need delta > 2")
    profile = RadialProfile(phi.grid, V, delta, f"manufactured(ell={ell})")
    logger.info(f"Manufactured potential in sector ell={ell}: delta~{delta:.3g}")
    return PotentialSpec(profile, delta, provenance=f"manufactured-from-phi(ell={ell})")


def manufactured_from_jet(grid: LogGrid, jet: Callable[[np.ndarray], Jet], ell: int = 0,
                          provenance: str = "") -> Tuple[PotentialSpec, RadialProfile]:
    """Grid profile g and its potential, with exact derivatives from the jet."""
    g, gp, gpp = jet(grid.r)
    phi = RadialProfile(grid, g, provenance=provenance or f"jet(ell={ell})")
    return manufacture_potential(phi, ell, derivatives=(gp, gpp)), phi


# --- BIRMAN-SCHWINGER ---

def sector_kernel(r: np.ndarray, s: np.ndarray, ell: int) -> np.ndarray:
    """r_<^ell / ((2 ell + 1) r_>^{ell+1})."""
    lo = np.minimum(r[:, None], s[None, :])
    hi = np.maximum(r[:, None], s[None, :])
    return (lo / hi) ** ell / ((2 * ell + 1) * hi)


def bs_matrix(V: PotentialSpec, ell: int, grid: Optional[LogGrid] = None) -> np.ndarray:
    """A = I + K, K_ij = k_ell(r_i, r_j) V(r_j) r_j^2 w_j."""
    profile = V.V
    if grid is not None and not grid.same_as(profile.grid):
        profile = profile.resample(grid)
    grid = profile.grid
    r = grid.r
    K = sector_kernel(r, r, ell) * (np.real(profile.values) * r * r * grid.weights)[None, :]
    return np.eye(grid.n) + K


def _sector_singular(V: PotentialSpec, ell: int, grid: LogGrid):
    A = bs_matrix(V, ell, grid)
    _, sigma, vh = np.linalg.svd(A)
    return sigma, vh


@dataclass(frozen=True)
class BasisElement:
    """One (real) null vector of 1 + G0(0)V in sector ell, as its radial factor."""
    ell: int
    radial: RadialProfile
    singular_value: float
    monopole: float = 0.0
    dipole: float = 0.0
    in_E0: bool = True
    in_E1: bool = True

    @property
    def multiplicity(self) -> int:
        return 2 * self.ell + 1

    @property
    def is_resonance(self) -> bool:
        return not self.in_E0

    @property
    def L_value(self) -> float:
        """L(phi) = -(1/4pi) int V phi."""
        return -self.monopole / (4.0 * math.pi)

    def as_sector(self) -> SectorFunction:
        return SectorFunction(self.ell, self.radial, self.multiplicity)


@dataclass(frozen=True)
class MomentTable:
    monopole: float
    dipole: Tuple[float, float, float]
    in_E0: bool
    in_E1: bool
    scale: float

    def to_dict(self) -> dict:
        return {'monopole': self.monopole, 'dipole': list(self.dipole),
                'in_E0': self.in_E0, 'in_E1': self.in_E1}


def moments(V: PotentialSpec, phi: RadialProfile, ell: int = 0, tol: float = DEFAULT_MOMENT_TOL) -> MomentTable:
    """
    <V, phi> and <x_i V, phi> for phi = g(r) P_ell(cos theta) (zonal about x_1).
    ell = 0 contributes only the monopole, ell = 1 only the x_1 dipole.
    """
    grid = phi.grid
    r = grid.r
    vg = np.real(V.V.values) * np.real(phi.values)
    scale = 4.0 * math.pi * float(grid.integrate(np.abs(vg) * r * r * (1.0 + r)))
    monopole = 4.0 * math.pi * float(grid.integrate(vg * r * r)) if ell == 0 else 0.0
    dipole_x1 = 4.0 * math.pi / 3.0 * float(grid.integrate(vg * r ** 3)) if ell == 1 else 0.0
    bound = tol * max(scale, 1e-300)
    in_E0 = abs(monopole) <= bound
    in_E1 = in_E0 and abs(dipole_x1) <= bound
    return MomentTable(monopole, (dipole_x1, 0.0, 0.0), in_E0, in_E1, scale)


def l_value(V: PotentialSpec, phi: RadialProfile) -> float:
    """L(phi) = -(1/4 pi) int V phi dx for a radial phi."""
    return -float(phi.grid.integrate(np.real(V.V.values) * np.real(phi.values) * phi.grid.r ** 2))


@dataclass(frozen=True)
class ThresholdBasis:
    """Discretized null space of 1 + G0(0)V with its classification."""
    elements: Tuple[BasisElement, ...]
    kind: str
    potential: PotentialSpec = field(repr=False)
    tolerances: Dict[int, float] = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return sum(e.multiplicity for e in self.elements)

    @property
    def L_values(self) -> Tuple[float, ...]:
        return tuple(e.L_value for e in self.elements)

    @property
    def flags_E0(self) -> Tuple[bool, ...]:
        return tuple(e.in_E0 for e in self.elements)

    @property
    def flags_E1(self) -> Tuple[bool, ...]:
        return tuple(e.in_E1 for e in self.elements)

    def resonance(self) -> Optional[BasisElement]:
        for e in self.elements:
            if e.is_resonance:
                return e
        return None

    def eigenfunctions(self) -> List[BasisElement]:
        return [e for e in self.elements if not e.is_resonance]

    def moment_table(self) -> List[dict]:
        return [{'ell': e.ell, 'monopole': e.monopole, 'dipole': e.dipole,
                 'in_E0': e.in_E0, 'in_E1': e.in_E1, 'L': e.L_value} for e in self.elements]


def _null_tolerance(V: PotentialSpec, ell: int, sigma_fine: np.ndarray, factor: float, cap: float) -> float:
    coarse = V.grid.coarsened()
    sigma_coarse, _ = _sector_singular(V, ell, coarse)
    estimate = abs(sigma_fine[-1] - sigma_coarse[-1])
    tol = min(factor * estimate, cap)
    logger.debug(f"sector ell={ell}: sigma_min fine={sigma_fine[-1]:.3e}, coarse={sigma_coarse[-1]:.3e}, tol={tol:.3e}")
    return tol


def _orient(values: np.ndarray) -> np.ndarray:
    idx = int(np.argmax(np.abs(values)))
    v = values / values[idx]
    return v


def null_space(V: PotentialSpec, tol: Optional[float] = None, ell_max: int = DEFAULT_ELL_MAX,
               factor: float = DEFAULT_NULL_FACTOR, cap: float = DEFAULT_NULL_CAP,
               moment_tol: float = DEFAULT_MOMENT_TOL) -> ThresholdBasis:
    """
    Null vectors of 1 + G0(0)V for ell = 0..ell_max.

    Without an explicit tol each sector uses factor * |sigma_min(N) - sigma_min(N/2)|
    (capped). Singular values inside (tol, 10 tol) raise AmbiguityError.
    """
    grid = V.grid
    elements: List[BasisElement] = []
    tolerances: Dict[int, float] = {}
    for ell in range(ell_max + 1):
        sigma, vh = _sector_singular(V, ell, grid)
        sector_tol = tol if tol is not None else _null_tolerance(V, ell, sigma, factor, cap)
        tolerances[ell] = sector_tol
        cluster = sigma[(sigma > sector_tol) & (sigma < 10.0 * sector_tol)]
        if cluster.size:
            raise AmbiguityError(
                f"sector ell={ell}: singular values {cluster.tolist()} within 10x of tol={sector_tol:.3e}",
                cluster=cluster.tolist(),
            )
        picked = np.nonzero(sigma <= sector_tol)[0] if sector_tol > 0 else np.array([], dtype=int)
        if picked.size == 0:
            continue
        vectors = vh[picked]
        values = [RadialProfile(grid, _orient(v), provenance=f"null(ell={ell})") for v in vectors]
        if ell == 0 and len(values) > 1:
            values = _split_monopole(V, values)
        for prof, s in zip(values, sigma[picked]):
            table = moments(V, prof, ell, moment_tol)
            prof = _sign_normalize(prof, table)
            table = moments(V, prof, ell, moment_tol)
            elements.append(BasisElement(ell, prof, float(s), table.monopole, table.dipole[0],
                                         table.in_E0, table.in_E1))
        logger.info(f"sector ell={ell}: {picked.size} null vector(s), tol={sector_tol:.3e}")

    kind = classify(elements)
    logger.info(f"threshold kind: {kind}")
    return ThresholdBasis(tuple(elements), kind, V, tolerances)


def _split_monopole(V: PotentialSpec, profiles: List[RadialProfile]) -> List[RadialProfile]:
    """Rotates an ell=0 basis so that at most its first element carries the monopole."""
    mono = np.array([moments(V, p, 0).monopole for p in profiles])
    if np.allclose(mono, 0.0):
        return profiles
    stack = np.array([p.values for p in profiles])
    first = mono @ stack / np.linalg.norm(mono)
    rest = orthogonal_complement(mono[None, :]).T @ stack
    grid = profiles[0].grid
    return [RadialProfile(grid, _orient(v), provenance="null(ell=0)") for v in [first, *rest]]


def _sign_normalize(profile: RadialProfile, table: MomentTable) -> RadialProfile:
    if not table.in_E0 and table.monopole > 0:
        # L(phi) = -<V,phi>/4pi must be positive for the resonance
        return profile * -1.0
    return profile


def classify(elements: Sequence[BasisElement]) -> str:
    if not elements:
        return "generic"
    has_resonance = any(e.is_resonance for e in elements)
    has_eigen = any(not e.is_resonance for e in elements)
    if has_resonance and has_eigen:
        return "third"
    return "first" if has_resonance else "second"


# --- OPERATORS ---

def _cumulative(r: np.ndarray, integrand: np.ndarray, head_power: float) -> np.ndarray:
    """int_0^{r_i} integrand ds, with the integrand ~ c s^head_power below r_min."""
    head = integrand[0] * r[0] / (head_power + 1.0)
    return head + running_integral(integrand * r, np.log(r))


def dj_operator(j: int, u: RadialProfile) -> RadialProfile:
    """
    D_j u(x) = (1 / (4 pi j!)) int |x-y|^{j-1} u(y) dy for radial u in R^3:

        D_j u(r) = 1/(j!(j+1) r) sum_{k odd} C(j+1, k) [ r^{j+1-k} int_0^r u s^{k+1} ds
                                                        + r^k int_r^inf u s^{j+2-k} ds ]
    """
    if j not in (0, 1, 2, 3):
        raise DomainError(f"D_j is available for j = 0..3, got {j}")
    delta = u.decay_exponent
    if delta <= j + 2:
        raise DecayError(f"D_{j} needs decay exponent > {j + 2}, got {delta}")
    r = u.grid.r
    vals = u.values
    n = j + 1
    total = np.zeros(r.shape, dtype=np.result_type(vals, float))
    for k in range(1, n + 1, 2):
        inner = _cumulative(r, vals * r ** (k + 1), k + 1)
        p = n - k + 1
        outer_run = _cumulative(r, vals * r ** p, p)
        outer = outer_run[-1] - outer_run
        if not math.isinf(delta):
            outer = outer + vals[-1] * r[-1] ** (p + 1) / (delta - p - 1)
        total += math.comb(n, k) * (r ** (n - k) * inner + r ** k * outer)
    values = total / (math.factorial(j) * (j + 1) * r)
    return u.with_values(values, provenance=f"D{j}({u.provenance})", decay_exponent=1.0 - j)


def riesz_constant(s: float, m: int = 3) -> float:
    """Gamma((m-s)/2) / (2^s pi^{m/2} Gamma(s/2)), the kernel constant of |D|^{-s}."""
    return float(gamma_fn((m - s) / 2.0) / (2.0 ** s * math.pi ** (m / 2.0) * gamma_fn(s / 2.0)))


def fractional_integral(s: float, u: RadialProfile, m: int = 3, chunk: int = 256,
                        panel_nodes: int = 128) -> RadialProfile:
    """
    |D|^{-s} u = c_s int |x-y|^{s-m} u(y) dy.

    For m = 3 and radial u:
        (2 pi c_s / r) int_0^inf rho^{s-2} [U(r+rho) - U(|r-rho|)] d rho,  U(t) = int_0^t u tau dtau.
    Other m go through the Fourier multiplier |xi|^{-s}.
    """
    if not 0.0 < s < m:
        raise DomainError(f"fractional order must lie in (0, {m}), got {s}")
    if u.decay_exponent <= s:
        raise DecayError(f"|D|^-{s} needs decay exponent > {s}, got {u.decay_exponent}")
    out_decay = m - s
    if m != 3:
        res = fourier_multiplier(u, lambda xi: np.where(xi > 0, xi, np.inf) ** (-s), m)
        return res.with_values(res.values, provenance=f"|D|^-{s:g}({u.provenance})", decay_exponent=out_decay)

    c_s = riesz_constant(s, m)
    grid = u.grid
    U = shell_primitive(u)
    eps = grid.r_min * 1e-2
    out = np.empty(grid.n, dtype=np.result_type(u.values, float))
    for start in range(0, grid.n, chunk):
        r = grid.r[start:start + chunk, None]
        # rho in (eps, r/2), integrated in log rho
        rho, w = _log_panel(eps, r / 2.0, panel_nodes)
        near = (U(r + rho) - U(np.abs(r - rho))) * rho ** (s - 2.0) * w
        # rho = r - q and rho = r + q, q in (eps, ...), integrated in log q
        q, wq = _log_panel(eps, r / 2.0, panel_nodes)
        below = (U(2.0 * r - q) - U(q)) * (r - q) ** (s - 2.0) * wq
        q, wq = _log_panel(eps, np.full_like(r, 2.0 * grid.r_max), panel_nodes)
        above = (U(2.0 * r + q) - U(q)) * (r + q) ** (s - 2.0) * wq
        total = near.sum(axis=1) + below.sum(axis=1) + above.sum(axis=1)
        # [0, eps] pieces: bracket ~ 2 r u(r) rho near rho = 0, ~ U(2r) near rho = r
        r1 = r[:, 0]
        total += 2.0 * r1 * u.values[start:start + chunk] * eps ** s / s
        total += 2.0 * eps * r1 ** (s - 2.0) * U(2.0 * r1)
        out[start:start + chunk] = total / r1
    values = 2.0 * math.pi * c_s * out
    return u.with_values(values, provenance=f"|D|^-{s:g}({u.provenance})", decay_exponent=out_decay)


@lru_cache(maxsize=8)
def _reference_rule(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def _log_panel(a: float, b: np.ndarray, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre in log t on [a, b] for every row of b; returns nodes t and weights dt."""
    x, w = _reference_rule(nodes)
    la = math.log(a)
    span = np.log(b) - la
    t = np.exp(la + span * x[None, :])
    return t, t * span * w[None, :]


# --- CANONICAL RESONANCE ---

def minus_v_inner(V: PotentialSpec, f: RadialProfile, g: RadialProfile, ell: int = 0) -> float:
    """-(V f, g) in sector ell."""
    r = f.grid.r
    ang = 4.0 * math.pi / (2 * ell + 1)
    return -ang * float(f.grid.integrate(np.real(V.V.values) * np.real(f.values) * np.real(g.values) * r * r))


@dataclass(frozen=True)
class CanonicalResonance:
    psi: RadialProfile
    phi_c: RadialProfile
    a: complex
    normalization: float
    L: float

    def to_dict(self) -> dict:
        return {'a': [self.a.real, self.a.imag], 'normalization': self.normalization, 'L': self.L}


def canonical_resonance(tb: ThresholdBasis, V: Optional[PotentialSpec] = None) -> CanonicalResonance:
    """
    psi in N with -(V psi, psi) = 1, -(V psi, phi) = 0 on the eigenspace, L(psi) > 0;
    phi_c = psi + P V D_2 V psi and a = 4 pi i |<V, phi_c>|^{-2}.
    """
    if tb.kind not in ("first", "third"):
        raise NoResonanceError(f"threshold of kind '{tb.kind}' carries no resonance")
    V = V or tb.potential
    res = tb.resonance()
    psi = res.radial
    grid = psi.grid
    eigen0 = [e.radial for e in tb.eigenfunctions() if e.ell == 0]

    if eigen0:
        gram = np.array([[minus_v_inner(V, a, b) for b in eigen0] for a in eigen0])
        rhs = np.array([minus_v_inner(V, a, psi) for a in eigen0])
        coeff = np.linalg.solve(gram, rhs)
        psi = psi.with_values(psi.values - sum(c * e.values for c, e in zip(coeff, eigen0)))

    norm = minus_v_inner(V, psi, psi)
    if norm <= 0:
        raise PreconditionError(f"-(V psi, psi) = {norm:.3e} is not positive")
    psi = psi * (1.0 / math.sqrt(norm))
    if l_value(V, psi) < 0:
        psi = psi * -1.0
    psi = psi.with_values(np.real(psi.values), provenance="canonical psi")

    phi_c = psi
    if eigen0:
        if V.delta <= CANONICAL_MIN_DECAY:
            raise DecayError(f"P V D_2 V psi needs potential decay > {CANONICAL_MIN_DECAY}, got {V.delta}")
        vpsi = psi.with_values(np.real(V.V.values) * psi.values, decay_exponent=V.delta + 1.0)
        d2 = dj_operator(2, vpsi)
        source = d2.with_values(np.real(V.V.values) * d2.values)
        correction = np.zeros(grid.n)
        for e in eigen0:
            unit = e.radial * (1.0 / SectorFunction(0, e.radial).norm())
            weight = SectorFunction(0, unit).inner(SectorFunction(0, source))
            correction += np.real(weight) * unit.values
        phi_c = psi.with_values(psi.values + correction, provenance="canonical phi_c")

    pairing = moments(V, phi_c, 0).monopole
    a = 4.0j * math.pi / abs(pairing) ** 2
    check = minus_v_inner(V, psi, psi)
    logger.info(f"canonical resonance: <V,phi_c>={pairing:.6g}, a={a:.6g}")
    return CanonicalResonance(psi, phi_c, complex(a), check, l_value(V, psi))


# --- ASYMPTOTICS ---

@dataclass(frozen=True)
class AsymptoticReport:
    alpha: float
    beta: float
    expected_alpha: float
    expected_beta: Optional[float]
    residual: float
    riesz_constant: Optional[float] = None
    expected_riesz_constant: Optional[float] = None

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            'alpha', 'beta', 'expected_alpha', 'expected_beta', 'residual',
            'riesz_constant', 'expected_riesz_constant')}


def _tail_fit(profile: RadialProfile, p1: float, p2: float) -> Tuple[float, float, float]:
    r = profile.grid.r
    tail = r >= r[-1] / 10.0
    y = np.real(profile.values[tail])
    basis = np.stack([r[tail] ** -p1, r[tail] ** -p2], axis=1)
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    resid = y - basis @ coef
    residual = float(np.linalg.norm(resid) / max(np.linalg.norm(y), 1e-300))
    if residual > FIT_RESIDUAL_LIMIT:
        raise RangeError(f"tail is not in the asymptotic regime (relative residual {residual:.2e})")
    return float(coef[0]), float(coef[1]), residual


def fit_asymptotics(phi: RadialProfile, V: PotentialSpec, ell: int = 0, m: int = 3,
                    riesz_source: Optional[RadialProfile] = None) -> AsymptoticReport:
    """
    Fits phi ~ alpha r^{-(m-2)} + beta r^{-(m-1)} on the last decade of the grid.

    Expected values: alpha = -C0 int V phi for ell = 0, and for ell = 1 the
    dipole coefficient beta = -w_{m-1}^{-1} int y_1 V phi. With riesz_source u
    the r^{-(m-1)} constant of |D|^{-1}u is fitted against (pi w_{m-2})^{-1} int u.
    """
    if m != 3:
        raise DimensionError("asymptotic fits are implemented for m = 3")
    alpha, beta, residual = _tail_fit(phi, m - 2, m - 1)
    table = moments(V, phi, ell)
    omega = sphere_area(m)
    if ell == 0:
        expected_alpha = -table.monopole / ((m - 2) * omega)
        expected_beta = None
    else:
        expected_alpha = 0.0
        expected_beta = -table.dipole[0] / omega if ell == 1 else None

    riesz, expected_riesz = None, None
    if riesz_source is not None:
        w = fractional_integral(1.0, riesz_source, m)
        riesz, _, _ = _tail_fit(w, m - 1, m)
        expected_riesz = float(np.real(riesz_source.integral(m))) / (math.pi * sphere_area(m - 1))
    return AsymptoticReport(alpha, beta, expected_alpha, expected_beta, residual, riesz, expected_riesz)
