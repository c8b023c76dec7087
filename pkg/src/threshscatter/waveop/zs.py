"""
Low-energy singular part Z_s of the wave operator in R^3.

Every piece of Z_s has the form

    Z u(x) = c int K(|x-y|) W(y) / |x-y| dy,
    K(rho) = (1/2pi) int_0^inf e^{i lambda rho} F(lambda) (int_R e^{-i r lambda} r M(r) dr) d lambda,

with W = V phi_j and M(r) the spherical mean of conj(g) * u_check for a pairing
function g (V phi_k or |D|^{-1} V phi_j). Functions in the ell = 1 sector are
handled through their axial potential: x_1 h(r) = d/dx_1 Omega(r).
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from ..errors import DomainError, PreconditionError
from ..harmonic import LineSignal, hilbert_transform, maximal
from ..means import (SphericalMean, effective_support, line_transform, radial_convolution_m3,
                     spherical_mean_of_convolution)
from ..profiles import RadialProfile, SectorFunction
from ..quadrature import filon_exp, running_integral, uniform_grid
from ..threshold import (CanonicalResonance, PotentialSpec, ThresholdBasis, canonical_resonance,
                         dj_operator, fractional_integral)
from .constants import IdentityCheck
from .expansion import eigen_cross_matrix, unit_eigenfunctions

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA0 = 0.5
DEFAULT_LAMBDA_SAMPLES = 2049
K0_ROUTES = ("k0-def", "parts-10", "k0-def-a")
PARTS = ("full", "boundary", "interior")
# kernel K0(rho)/rho decays like rho^-3
KERNEL_DECAY = 3.0


# --- CUTOFF ---

def _blend(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Degree-7 smoothstep s(x) and s'(x) on [0, 1]; s has three vanishing derivatives at both ends."""
    x2 = x * x
    s = x2 * x2 * (35.0 - 84.0 * x + 70.0 * x2 - 20.0 * x2 * x)
    ds = 140.0 * x2 * x * (1.0 - x) ** 3
    return s, ds


@dataclass(frozen=True)
class CutoffSpec:
    """Even cutoff F with F = 1 on [0, lambda0/2] and F = 0 beyond lambda0."""
    lambda0: float = DEFAULT_LAMBDA0

    def __post_init__(self):
        if not self.lambda0 > 0:
            raise DomainError(f"cutoff radius must be positive, got {self.lambda0}")

    @property
    def plateau(self) -> float:
        return self.lambda0 / 2.0

    def _x(self, lam) -> np.ndarray:
        lam = np.abs(np.asarray(lam, dtype=float))
        return np.clip((lam - self.plateau) / self.plateau, 0.0, 1.0)

    def __call__(self, lam) -> np.ndarray:
        s, _ = _blend(self._x(lam))
        return 1.0 - s

    def derivative(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        _, ds = _blend(self._x(lam))
        return -np.sign(lam) * ds / self.plateau


# --- K0 ---

def k0_boundary_term(M: SphericalMean) -> complex:
    """-(i/2pi) int_R M(r) dr, the rho-independent part of K0."""
    return complex(-1j / math.pi * M.profile.moment(0))


def k0_profile(M: SphericalMean, F: CutoffSpec, rho, route: str = "k0-def",
               samples: int = DEFAULT_LAMBDA_SAMPLES):
    """
    K0(rho) by Filon quadrature in lambda over the support of F.

    route "k0-def" integrates F(lambda) G_1(lambda) directly, "parts-10" the
    lambda-derivative form (i / 2 pi rho) int e^{i lambda rho} (F G_1)' and
    "k0-def-a" the boundary split -(i/2pi) int M + K0~(rho), where
    G_p(lambda) = int_R e^{-i r lambda} r^p M(r) dr.
    """
    if route not in K0_ROUTES:
        raise DomainError(f"unknown K0 route {route!r}; expected one of {K0_ROUTES}")
    arr = np.asarray(rho, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(arr < 0):
        raise DomainError("K0 is evaluated at rho >= 0")

    lam, dlam = uniform_grid(F.lambda0, samples)
    f = F(lam)
    if route == "k0-def":
        g1 = line_transform(M.profile, 1, lam)
        out = filon_exp(f * g1, dlam, arr) / (2.0 * math.pi)
    elif route == "parts-10":
        if np.any(arr == 0):
            raise DomainError("the integrated-by-parts form needs rho > 0")
        g1 = line_transform(M.profile, 1, lam)
        g2 = line_transform(M.profile, 2, lam)
        dh = F.derivative(lam) * g1 - 1j * f * g2
        out = 1j * filon_exp(dh, dlam, arr) / (2.0 * math.pi * arr)
    else:
        out = k0_boundary_term(M) + k0_tilde(M, F, arr, samples)
    return complex(out[0]) if scalar else out


def k0_tilde(M: SphericalMean, F: CutoffSpec, rho, samples: int = DEFAULT_LAMBDA_SAMPLES) -> np.ndarray:
    """K0~(rho) = -(i/2pi) int_0^inf (e^{i lambda rho} F)' G_0(lambda) d lambda."""
    arr = np.atleast_1d(np.asarray(rho, dtype=float))
    lam, dlam = uniform_grid(F.lambda0, samples)
    g0 = line_transform(M.profile, 0, lam)
    plain = filon_exp(F(lam) * g0, dlam, arr)
    slope = filon_exp(F.derivative(lam) * g0, dlam, arr)
    return -1j / (2.0 * math.pi) * (1j * arr * plain + slope)


# --- SECTOR HELPERS ---

def axial_potential(f: SectorFunction) -> RadialProfile:
    """Omega with d/dx_1 Omega(|x|) = f for ell = 1, i.e. Omega' = g and Omega(inf) = 0."""
    if f.ell != 1:
        raise DomainError(f"axial potentials are defined for ell = 1, got {f.ell}")
    g = f.radial
    r = g.grid.r
    running = running_integral(g.values * r, np.log(r))
    delta = g.decay_exponent
    tail = 0.0 if math.isinf(delta) else g.values[-1] * r[-1] / (delta - 1.0)
    values = -(running[-1] - running + tail)
    return g.with_values(values, provenance=f"Omega({g.provenance})", decay_exponent=delta - 1.0)


def axial_gradient(omega: RadialProfile) -> SectorFunction:
    """The ell = 1 function d/dx_1 Omega(|x|), as its radial factor Omega'."""
    values = omega.derivative(1)
    return SectorFunction(1, omega.with_values(values, decay_exponent=omega.decay_exponent + 1.0))


def _radial_map(f: SectorFunction, op: Callable[[RadialProfile], RadialProfile]) -> SectorFunction:
    """Applies a rotation-invariant operator given by its action on radial functions."""
    if f.ell == 0:
        return SectorFunction(0, op(f.radial), f.multiplicity)
    if f.ell == 1:
        out = axial_gradient(op(axial_potential(f)))
        return SectorFunction(1, out.radial, f.multiplicity)
    raise DomainError(f"sector ell={f.ell} is not supported; use ell <= 1")


def riesz_potential(f: SectorFunction) -> SectorFunction:
    """|D|^{-1} f."""
    return _radial_map(f, lambda g: fractional_integral(1.0, g, 3))


def newton_potential(f: SectorFunction) -> SectorFunction:
    """D_0 f = (4 pi |x|)^{-1} * f."""
    return _radial_map(f, lambda g: dj_operator(0, g))


def pairing_mean(g: SectorFunction, u: SectorFunction) -> SphericalMean:
    """M(r) = spherical mean at 0 of conj(g) * u_check, for g and u in the same sector."""
    if g.ell != u.ell:
        return SphericalMean(RadialProfile.zeros(u.grid), "cross-sector")
    if g.ell == 0:
        return spherical_mean_of_convolution(g.radial, u.radial)
    if g.ell == 1:
        # conj(g) * u = d_1^2 Q with Q = conj(Omega_g) * Omega_u; u_check = -u
        q = radial_convolution_m3(axial_potential(g).conj(), axial_potential(u))
        r = q.grid.r
        lap = q.derivative(2) + 2.0 * q.derivative(1) / r
        mean = q.with_values(-lap / 3.0, provenance="mean(ell=1)", decay_exponent=q.decay_exponent + 2.0)
        return SphericalMean(mean, "conj(g)*u_check")
    raise DomainError(f"sector ell={g.ell} is not supported; use ell <= 1")


def boundary_identity(source: SectorFunction, u: SectorFunction) -> IdentityCheck:
    """(1/pi) int_R M(r) dr against <|D|^{-1} source, u>, M built from source and u."""
    mean = pairing_mean(source, u)
    lhs = float(np.real(2.0 / math.pi * mean.profile.moment(0)))
    rhs = float(np.real(riesz_potential(source).inner(u)))
    return IdentityCheck(lhs, rhs, abs(lhs - rhs))


# --- Z ENGINE ---

@dataclass(frozen=True)
class ZChannel:
    """Z u = coefficient * int K(|x-y|) source(y)/|x-y| dy, K built from M(conj(pair) * u_check)."""
    source: SectorFunction
    pair: SectorFunction
    coefficient: complex
    label: str = ""

    @classmethod
    def from_term(cls, c: complex, source: SectorFunction, pair: SectorFunction,
                  label: str = "") -> "ZChannel":
        """The channel generated by a term (c / lambda)|phi><g| of S(lambda), source = V phi."""
        return cls(source, pair, -1j * c / (2.0 * math.pi), label)


def _zero_like(ch: ZChannel, u: SectorFunction) -> SectorFunction:
    return SectorFunction(ch.source.ell, RadialProfile.zeros(u.grid).with_values(np.zeros(u.grid.n, dtype=complex)))


def apply_channel(ch: ZChannel, u: SectorFunction, F: CutoffSpec, route: str = "k0-def",
                  part: str = "full", samples: int = DEFAULT_LAMBDA_SAMPLES) -> SectorFunction:
    """
    Applies one channel. part="boundary" keeps only the -(i/2pi) int M piece of K0,
    part="interior" only K0~; "full" uses the requested K0 route.
    """
    if part not in PARTS:
        raise DomainError(f"unknown part {part!r}; expected one of {PARTS}")
    mean = pairing_mean(ch.pair, u)
    if not np.any(mean.profile.values):
        return _zero_like(ch, u)

    if part == "boundary":
        # int W(y)/|x-y| dy = 4 pi D_0 W
        total = ch.coefficient * k0_boundary_term(mean) * 4.0 * math.pi
        d0 = newton_potential(ch.source)
        return SectorFunction(ch.source.ell, d0.radial * total)

    grid = u.grid
    r = grid.r
    if part == "interior":
        k0 = k0_tilde(mean, F, r, samples)
    else:
        k0 = k0_profile(mean, F, r, route, samples)
    kernel = RadialProfile(grid, k0 / r, KERNEL_DECAY, "K0/rho")

    if ch.source.ell == 0:
        conv = radial_convolution_m3(ch.source.radial, kernel)
        return SectorFunction(0, conv * ch.coefficient)
    omega = axial_potential(ch.source)
    conv = radial_convolution_m3(omega, kernel)
    return SectorFunction(1, axial_gradient(conv).radial * ch.coefficient)


def apply_channels(channels: List[ZChannel], u: SectorFunction, F: CutoffSpec,
                   route: str = "k0-def", part: str = "full") -> SectorFunction:
    out = None
    for ch in channels:
        piece = apply_channel(ch, u, F, route, part)
        out = piece if out is None else SectorFunction(piece.ell, out.radial + piece.radial)
    if out is None:
        raise PreconditionError("no Z_s channels to apply")
    return out


def _times(V: PotentialSpec, f: SectorFunction) -> SectorFunction:
    radial = f.radial.with_values(np.real(V.V.values) * f.radial.values,
                                  decay_exponent=f.radial.decay_exponent + V.delta)
    return SectorFunction(f.ell, radial, f.multiplicity)


def first_kind_channel(V: PotentialSpec, phi: RadialProfile, a: complex) -> ZChannel:
    vphi = _times(V, SectorFunction(0, phi))
    return ZChannel.from_term(-a, vphi, vphi, "Zs")


def apply_Zs_m3(u: RadialProfile, V: PotentialSpec, phi: RadialProfile, a: complex, F: CutoffSpec,
                route: str = "k0-def", part: str = "full") -> RadialProfile:
    """Z_s u = (a i / 2 pi) int K0(|x-y|) V(y) phi(y) / |x-y| dy for first-kind data."""
    out = apply_channel(first_kind_channel(V, phi, a), SectorFunction(0, u), F, route, part)
    return out.radial.with_values(out.radial.values, provenance=f"Zs({u.provenance})")


def zs0_channels(tb: ThresholdBasis) -> List[ZChannel]:
    """Channels of the i P V D_3 V P V / lambda term, one per (j, k) with a_jk != 0."""
    units = unit_eigenfunctions(tb)
    a = eigen_cross_matrix(tb, units)
    V = tb.potential
    channels = []
    for j, fj in enumerate(units):
        for k, fk in enumerate(units):
            if a[j, k] == 0.0:
                continue
            c = 1j * math.pi * a[j, k]
            channels.append(ZChannel.from_term(c, _times(V, fj), _times(V, fk), f"Zs0[{j},{k}]"))
    return channels


def zs1_channels(tb: ThresholdBasis) -> List[ZChannel]:
    """Channels of the P V / lambda^2 term, one per eigenfunction, paired with |D|^{-1} V phi_j."""
    V = tb.potential
    channels = []
    for j, f in enumerate(unit_eigenfunctions(tb)):
        w = _times(V, f)
        channels.append(ZChannel.from_term(1.0, w, riesz_potential(w), f"Zs1[{j}]"))
    return channels


def apply_Zs0_m3(u: SectorFunction, tb: ThresholdBasis, F: CutoffSpec, route: str = "k0-def") -> SectorFunction:
    channels = zs0_channels(tb)
    if not channels:
        return SectorFunction(u.ell, RadialProfile.zeros(u.grid))
    return apply_channels(channels, u, F, route)


def apply_Zs1_m3(u: SectorFunction, tb: ThresholdBasis, F: CutoffSpec, route: str = "k0-def",
                 part: str = "full") -> SectorFunction:
    return apply_channels(zs1_channels(tb), u, F, route, part)


def zs_channels(tb: ThresholdBasis, cr: Optional[CanonicalResonance] = None) -> List[ZChannel]:
    """All channels of Z_s for a threshold basis of any exceptional kind."""
    if tb.kind == "generic":
        return []
    channels: List[ZChannel] = []
    if tb.kind in ("second", "third"):
        channels += zs0_channels(tb) + zs1_channels(tb)
    if tb.kind in ("first", "third"):
        cr = cr or canonical_resonance(tb)
        channels.append(first_kind_channel(tb.potential, cr.phi_c, cr.a))
    return channels


# --- MAJORANTS ---

@dataclass(frozen=True)
class K0MajorantReport:
    """Smallest constants in |K0| <= C1 MH(rM) and, for rho >= 1, |K0| <= C2 (MH(r^2 M) + MH(rM)) / rho."""
    near: float
    far: float
    half_width: float
    log2_samples: int

    def to_dict(self) -> dict:
        return {'near': self.near, 'far': self.far, 'half_width': self.half_width,
                'log2_samples': self.log2_samples}


def k0_majorant_constants(M: SphericalMean, F: CutoffSpec, log2_samples: int = 12,
                          half_width: Optional[float] = None,
                          samples: int = DEFAULT_LAMBDA_SAMPLES) -> K0MajorantReport:
    """Empirical majorant constants on the midpoint grid of [-L, L]."""
    L = half_width or 2.0 * effective_support(M.profile, 2.0)
    try:
        first = LineSignal.from_function(lambda x: x * M(x), L, log2_samples)
        second = LineSignal.from_function(lambda x: x * x * M(x), L, log2_samples)
    except DomainError as exc:
        raise PreconditionError(f"spherical mean does not decay inside [-{L:g}, {L:g}]: {exc}") from exc

    mh1 = maximal(hilbert_transform(first)).values
    mh2 = maximal(hilbert_transform(second)).values
    x = first.x
    pos = x > 0
    k0 = np.abs(k0_profile(M, F, x[pos], "k0-def", samples))
    near_bound = mh1[pos]
    far = x[pos] >= 1.0
    far_bound = (mh2[pos] + mh1[pos])[far] / x[pos][far]

    with np.errstate(divide="ignore", invalid="ignore"):
        near = float(np.max(np.where(near_bound > 0, k0 / near_bound, 0.0)))
        far_c = float(np.max(np.where(far_bound > 0, k0[far] / far_bound, 0.0))) if np.any(far) else 0.0
    logger.info(f"K0 majorant constants: near={near:.4g}, far={far_c:.4g} (L={L:g}, n=2^{log2_samples})")
    return K0MajorantReport(near, far_c, L, log2_samples)
