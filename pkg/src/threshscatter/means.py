"""
Spherical means, radial Fourier transforms and the representation formulas
for the spectral-measure pairing <psi, (G0(lambda) - G0(-lambda)) u>.

Conventions: u^(xi) = int e^{-i x.xi} u(x) dx; radial functions live on a LogGrid
and are extended evenly to r < 0.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import jv, roots_jacobi

from .errors import DecayError, DimensionError, DomainError
from .kernels import odd_kernel_coeffs, superposition_rule
from .profiles import LogGrid, RadialProfile, sphere_area
from .quadrature import cos_integral, geometric_blocks, power_tail_exp, running_integral, sin_integral

logger = logging.getLogger(__name__)

# Filon integrals over r run on doubling blocks: samples per block and the first block edge.
DEFAULT_FILON_SAMPLES = 257
FILON_FIRST_BLOCK = 0.5
# The power-law tail series is summed from where k r reaches this.
TAIL_KZ = 50.0
NEGLIGIBLE = 1e-15


@dataclass(eq=False)
class SphericalMean:
    """M(r) for r in R, stored for r > 0 and mirrored on demand."""
    profile: RadialProfile
    provenance: str = ""

    @property
    def grid(self) -> LogGrid:
        return self.profile.grid

    @property
    def decay_exponent(self) -> float:
        return self.profile.decay_exponent

    def __call__(self, r) -> np.ndarray:
        return self.profile(np.abs(np.asarray(r, dtype=float)))

    def mirrored(self) -> Tuple[np.ndarray, np.ndarray]:
        """Samples on -r_N..-r_1, r_1..r_N; M(-r) = M(r) exactly."""
        r = self.grid.r
        v = self.profile.values
        return np.concatenate([-r[::-1], r]), np.concatenate([v[::-1], v])


# --- SPHERICAL AVERAGES ---

@lru_cache(maxsize=32)
def _zonal_rule(m: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    # int_{-1}^{1} g(t) (1-t^2)^{(m-3)/2} dt
    a = (m - 3) / 2.0
    t, w = roots_jacobi(order, a, a)
    return t, w


def _sphere_points(m: int, r: float, order: int, axial: bool) -> Tuple[np.ndarray, np.ndarray]:
    t, w = _zonal_rule(m, order)
    if axial:
        pts = np.zeros((order, m))
        pts[:, 0] = r * t
        pts[:, 1] = r * np.sqrt(1.0 - t * t)
        weights = w * sphere_area(m - 1) / sphere_area(m)
        return pts, weights
    if m != 3:
        raise DimensionError("non-axial spherical means are available for m=3 only")
    n_phi = 2 * order
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    tt, pp = np.meshgrid(t, phi, indexing="ij")
    st = np.sqrt(1.0 - tt * tt)
    pts = r * np.stack([tt.ravel(), (st * np.cos(pp)).ravel(), (st * np.sin(pp)).ravel()], axis=1)
    weights = (np.repeat(w, n_phi) * (2.0 * np.pi / n_phi)) / (4.0 * np.pi)
    return pts, weights


def spherical_mean(f: Callable[[np.ndarray], np.ndarray], r: float, m: int = 3,
                   order: int = 64, axial: bool = True) -> complex:
    """
    w_{m-1}^{-1} int_S f(r w) dw for f taking an (k, m) array of points.

    axial=True assumes f is symmetric about the x_1 axis and integrates in
    cos(theta) with Gauss-Jacobi nodes; axial=False (m=3) adds a uniform
    azimuthal rule.
    """
    if m < 3:
        raise DimensionError(f"dimension must be >= 3, got {m}")
    pts, weights = _sphere_points(m, r, order, axial)
    value = np.dot(weights, np.asarray(f(pts)))
    return complex(value) if np.iscomplexobj(value) else float(value)


def spherical_mean_profile(f: Callable[[np.ndarray], np.ndarray], grid: LogGrid, m: int = 3,
                           order: int = 64, axial: bool = True, provenance: str = "") -> SphericalMean:
    values = np.array([spherical_mean(f, r, m, order, axial) for r in grid.r])
    return SphericalMean(RadialProfile(grid, values, provenance=provenance), provenance)


# --- TILDE TRANSFORM ---

def tilde_mean(mean: SphericalMean) -> RadialProfile:
    """M~(rho) = int_rho^inf r M(r) dr on the grid of M."""
    delta = mean.decay_exponent
    if delta <= 3.0:
        raise DecayError(f"tilde transform needs decay exponent > 3, got {delta}")
    grid = mean.grid
    r = grid.r
    vals = mean.profile.values
    s = np.log(r)
    running = running_integral(r * r * vals, s)
    tail = 0.0
    if not math.isinf(delta):
        tail = vals[-1] * r[-1] ** 2 / (delta - 2.0)
    values = running[-1] - running + tail
    return RadialProfile(grid, values, delta - 2.0, f"tilde({mean.provenance})")


# --- RADIAL FOURIER TRANSFORM ---

def effective_support(profile: RadialProfile, power: float = 0.0) -> float:
    """Radius beyond which |f| r^power is negligible relative to its maximum."""
    r = profile.grid.r
    mag = np.abs(profile.values) * r ** power
    peak = mag.max()
    if peak == 0.0:
        return float(r[0])
    idx = np.nonzero(mag > NEGLIGIBLE * peak)[0][-1]
    return float(min(r[idx] * 1.25, profile.grid.r_max))


def _block_resample(profile: RadialProfile, power: float, stop: float, samples: int,
                    start: float = 0.0) -> List[Tuple[float, float, np.ndarray]]:
    """(x0, dx, r^power f) on each geometric block of [start, stop]."""
    blocks = geometric_blocks(stop, FILON_FIRST_BLOCK, samples, start)
    return [(x[0], dx, profile(x) * x ** power) for x, dx in blocks]


def line_transform(profile: RadialProfile, power: int, kappa, samples: int = DEFAULT_FILON_SAMPLES) -> np.ndarray:
    """
    int_R e^{-i kappa s} s^power M(s) ds for an even M given on r > 0,
    via Filon on geometric blocks of [0, R].
    """
    kappa = np.atleast_1d(np.asarray(kappa, dtype=float))
    length = effective_support(profile, power)
    total = np.zeros(kappa.shape, dtype=complex)
    for x0, dx, g in _block_resample(profile, power, length, samples):
        if power % 2:
            total += -2j * sin_integral(g, dx, kappa, x0)
        else:
            total += 2.0 * cos_integral(g, dx, kappa, x0)
    return total


def hankel_log(profile: RadialProfile, m: int, rho: np.ndarray, chunk: int = 128) -> np.ndarray:
    """(2pi)^{m/2} rho^{1-m/2} int J_{m/2-1}(rho r) r^{m/2} u(r) dr on the log grid."""
    r = profile.grid.r
    w = profile.grid.weights * r ** (m / 2.0) * profile.values
    rho = np.asarray(rho, dtype=float)
    out = np.empty(rho.shape, dtype=np.result_type(w, float))
    flat_in = rho.ravel()
    flat_out = out.reshape(-1)
    order = m / 2.0 - 1.0
    for start in range(0, flat_in.size, chunk):
        block = flat_in[start:start + chunk]
        safe = np.where(block > 0, block, 1.0)
        kern = jv(order, np.outer(safe, r))
        val = (2.0 * np.pi) ** (m / 2.0) * safe ** (1.0 - m / 2.0) * (kern @ w)
        zero = block == 0
        if np.any(zero):
            val = np.asarray(val, dtype=flat_out.dtype)
            val[zero] = sphere_area(m) * profile.moment(m - 1)
        flat_out[start:start + chunk] = val
    return out


def _sine_transform(u: RadialProfile, k: np.ndarray, samples: int) -> np.ndarray:
    """
    int_0^inf sin(k r) r u(r) dr for k > 0. A profile still alive at r_max with a
    finite decay exponent is continued as u(r_max) (r/r_max)^-delta: blocks out to
    where k r is large, then the closed-form tail series.
    """
    grid = u.grid
    length = effective_support(u, 1.0)
    total = np.zeros(k.shape, dtype=complex)
    for x0, dx, g in _block_resample(u, 1.0, length, samples):
        total += sin_integral(g, dx, k, x0)
    delta = u.decay_exponent
    if math.isinf(delta) or length < grid.r_max:
        return total
    if delta <= 1.0:
        raise DecayError(f"sine transform needs decay exponent > 1, got {delta}")
    z = max(grid.r_max, TAIL_KZ / float(k.min()))
    if z > grid.r_max:
        for x0, dx, g in _block_resample(u, 1.0, z, samples, start=grid.r_max):
            total += sin_integral(g, dx, k, x0)
    amplitude = complex(u(np.array([z]))[0]) * z
    tail = (power_tail_exp(amplitude, delta - 1.0, z, k) - power_tail_exp(amplitude, delta - 1.0, z, -k)) / 2j
    logger.debug(f"sine transform tail beyond r={z:.3g}: max |tail| = {np.max(np.abs(tail)):.3g}")
    return total + tail


def radial_fourier(u: RadialProfile, m: int, rho, samples: int = DEFAULT_FILON_SAMPLES):
    """
    u^(rho) for a radial u in R^m.

    m = 3 uses (4 pi / rho) int_0^inf sin(rho r) r u(r) dr with Filon;
    other m use the Bessel kernel on the log grid.
    """
    arr = np.asarray(rho, dtype=float)
    if np.any(arr < 0):
        raise DomainError("radial Fourier transform needs rho >= 0")
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if m == 3:
        out = np.empty(arr.shape, dtype=complex if u.is_complex else float)
        zero = arr == 0
        out[zero] = 4.0 * np.pi * u.moment(2)
        pos = ~zero
        if np.any(pos):
            vals = _sine_transform(u, arr[pos], samples)
            out[pos] = 4.0 * np.pi * (vals if u.is_complex else vals.real) / arr[pos]
    else:
        out = hankel_log(u, m, arr)
    return out[0] if scalar else out


def fourier_multiplier(u: RadialProfile, f: Callable[[np.ndarray], np.ndarray], m: int = 3) -> RadialProfile:
    """f(|D|) u, with both transforms on the log grid of u."""
    grid = u.grid
    u_hat = RadialProfile(grid, hankel_log(u, m, grid.r) * f(grid.r))
    back = hankel_log(u_hat, m, grid.r) / (2.0 * np.pi) ** m
    return u.with_values(back, provenance=f"multiplier({u.provenance})")


# --- CONVOLUTION ---

def shell_primitive(h: RadialProfile) -> Callable[[np.ndarray], np.ndarray]:
    """H(t) = int_0^t h(tau) tau dtau, as a callable on t >= 0."""
    r = h.grid.r
    vals = h.values
    head = vals[0] * r[0] ** 2 / 2.0
    running = head + running_integral(r * r * vals, np.log(r))
    s = np.log(r)
    re = CubicSpline(s, running.real)
    im = CubicSpline(s, running.imag) if np.iscomplexobj(running) else None
    total = running[-1]

    def primitive(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.empty(t.shape, dtype=running.dtype)
        low = t < r[0]
        high = t > r[-1]
        mid = ~(low | high)
        out[low] = vals[0] * t[low] ** 2 / 2.0
        out[high] = total
        if np.any(mid):
            sm = np.log(t[mid])
            out[mid] = re(sm) if im is None else re(sm) + 1j * im(sm)
        return out

    return primitive


def radial_convolution_m3(f: RadialProfile, h: RadialProfile, chunk: int = 256) -> RadialProfile:
    """
    (f*h)(s) = (2 pi / s) int_0^inf f(r) r [H(s+r) - H(|s-r|)] dr  in R^3.

    Passing the narrower of the two profiles as f gives the better accuracy.
    """
    f._check(h)
    grid = f.grid
    r = grid.r
    primitive = shell_primitive(h)
    fw = grid.weights * r * f.values
    dtype = np.result_type(f.values, h.values, float)
    out = np.empty(grid.n, dtype=dtype)
    for start in range(0, grid.n, chunk):
        s = r[start:start + chunk, None]
        shell = primitive(s + r[None, :]) - primitive(np.abs(s - r[None, :]))
        out[start:start + chunk] = 2.0 * np.pi * (shell @ fw) / s[:, 0]
    delta = min(f.decay_exponent, h.decay_exponent)
    return RadialProfile(grid, out, delta, f"({f.provenance})*({h.provenance})")


def radial_convolution(f: RadialProfile, h: RadialProfile, m: int = 3) -> RadialProfile:
    """Radial convolution in R^m: shell reduction for m = 3, Fourier product otherwise."""
    if m == 3:
        return radial_convolution_m3(f, h)
    f._check(h)
    grid = f.grid
    prod = RadialProfile(grid, hankel_log(f, m, grid.r) * hankel_log(h, m, grid.r))
    values = hankel_log(prod, m, grid.r) / (2.0 * np.pi) ** m
    return RadialProfile(grid, values, min(f.decay_exponent, h.decay_exponent),
                         f"({f.provenance})*({h.provenance})")


def spherical_mean_of_convolution(psi: RadialProfile, u: RadialProfile, m: int = 3) -> SphericalMean:
    """M(r, conj(psi) * u_check); for radial inputs u_check = u and the mean is the convolution."""
    conv = radial_convolution(psi.conj(), u, m)
    return SphericalMean(conv, "conj(psi)*u")


# --- PAIRINGS ---

def pairing_spectral(v: RadialProfile, u: RadialProfile, lam: float, m: int = 3) -> complex:
    """
    (lambda^{m-2} i / (2 (2 pi)^{m-1})) int_S conj(v^(lambda w)) u^(lambda w) dw,
    the angular integral reducing to w_{m-1} conj(v^(lambda)) u^(lambda).
    """
    if lam < 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    if lam == 0:
        return 0j
    vh = radial_fourier(v, m, lam)
    uh = radial_fourier(u, m, lam)
    pref = lam ** (m - 2) * 1j / (2.0 * (2.0 * np.pi) ** (m - 1))
    return complex(pref * sphere_area(m) * np.conj(vh) * uh)


def pairing_representation(psi: RadialProfile, u: RadialProfile, lam: float, m: int = 3,
                           mean: Optional[SphericalMean] = None) -> complex:
    """
    sum_j c_j (-1)^{j+1} lambda^j int_R e^{-i lambda r} r^{1+j} M(r) dr with c_j = w_{m-1} C_j
    and M the spherical mean of conj(psi) * u_check.
    """
    if m % 2 == 0:
        raise DimensionError(f"odd-dimensional representation called with m={m}; use pairing_representation_even")
    if lam <= 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    if mean is None:
        mean = spherical_mean_of_convolution(psi, u, m)
    omega = sphere_area(m)
    total = 0j
    for j, c in enumerate(odd_kernel_coeffs(m)):
        integral = line_transform(mean.profile, j + 1, lam)[0]
        total += omega * c * (-1) ** (j + 1) * lam ** j * integral
    return complex(total)


def pairing_representation_even(psi: RadialProfile, u: RadialProfile, lam: float, m: int = 4,
                                j0_route: str = "direct", mean: Optional[SphericalMean] = None,
                                nodes: int = 96) -> complex:
    """
    sum_j (-1)^{j+1} T_j^(a)[lambda^j F(r^{j+1} M^a)(lambda) / (1+2a)^{j+2}],  M^a(r) = M(r/(1+2a)).

    The (1+2a)^{j+2} factors cancel against the dilation, leaving
    lambda^j G_j(lambda (1+2a)) with G_j(k) = int e^{-iks} s^{j+1} M(s) ds.
    j0_route="tilde" replaces -G_0(k) by i k int e^{-iks} M~(s) ds.
    """
    if m % 2:
        raise DimensionError(f"even-dimensional representation called with m={m}")
    if lam <= 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    if j0_route not in ("direct", "tilde"):
        raise DomainError(f"unknown j=0 route {j0_route!r}")
    if mean is None:
        mean = spherical_mean_of_convolution(psi, u, m)
    nu = (m - 2) // 2
    total = 0j
    for j in range(nu + 1):
        rule = superposition_rule(m, j, nodes)
        kappa = lam * (1.0 + 2.0 * rule.nodes)
        if j == 0 and j0_route == "tilde":
            tilde = tilde_mean(mean)
            summand = 1j * kappa * line_transform(tilde, 0, kappa)
        else:
            summand = (-1) ** (j + 1) * lam ** j * line_transform(mean.profile, j + 1, kappa)
        total += rule.apply(lambda a, vals=summand: vals)
    return complex(total)


def pairing_j0_routes(psi: RadialProfile, u: RadialProfile, lam: float, m: int = 4,
                      nodes: int = 96) -> Tuple[complex, complex]:
    """The j = 0 summand computed directly and through M~."""
    mean = spherical_mean_of_convolution(psi, u, m)
    rule = superposition_rule(m, 0, nodes)
    kappa = lam * (1.0 + 2.0 * rule.nodes)
    direct = rule.apply(lambda a: -line_transform(mean.profile, 1, kappa))
    tilde = tilde_mean(mean)
    via_tilde = rule.apply(lambda a: 1j * kappa * line_transform(tilde, 0, kappa))
    return complex(direct), complex(via_tilde)
