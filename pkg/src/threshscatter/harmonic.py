"""
One-dimensional harmonic analysis on uniform line grids: Hilbert transform,
half-line frequency projection, Hardy-Littlewood maximal function, A_p
characteristic of power weights and the convolution-majorant check.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sfft
from scipy.ndimage import maximum_filter1d
from scipy.signal import fftconvolve

from .errors import AccuracyError, DomainError, PreconditionError

logger = logging.getLogger(__name__)

PAD_FACTOR = 8
BOUNDARY_DECAY = 1e-8
DEFAULT_WINDOWS = 40
# A_p scan: h_k = H0 * 2^k, so the families are nested in window_count
AP_BASE_SCALE = 2.0 ** -10
AP_GROWTH_FACTOR = 1.25
AP_GROWTH_RUN = 5


@dataclass(eq=False)
class LineSignal:
    """
    Samples of a function on [-L, L] at the cell midpoints -L + (k + 1/2) dx,
    dx = 2L/n, with n a power of two.
    """
    half_width: float
    values: np.ndarray
    periodic: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values)
        n = self.values.size
        if n < 2 or n & (n - 1):
            raise DomainError(f"sample count must be a power of two, got {n}")
        if self.half_width <= 0:
            raise DomainError("half width must be positive")

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], half_width: float,
                      log2_samples: int, periodic: bool = False) -> "LineSignal":
        n = 2 ** log2_samples
        dx = 2.0 * half_width / n
        x = -half_width + dx * (np.arange(n) + 0.5)
        signal = cls(half_width, np.asarray(fn(x)), periodic)
        if not periodic:
            edge = max(abs(signal.values[0]), abs(signal.values[-1]))
            if edge > BOUNDARY_DECAY:
                raise DomainError(
                    f"signal is {edge:.2e} at the boundary; widen the window or set periodic=True"
                )
        return signal

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def x(self) -> np.ndarray:
        return -self.half_width + self.dx * (np.arange(self.n) + 0.5)

    def with_values(self, values: np.ndarray) -> "LineSignal":
        return LineSignal(self.half_width, values, self.periodic)

    def index_of(self, t: float) -> int:
        return int(np.argmin(np.abs(self.x - t)))

    def weighted_norm(self, p: float, a: float = 0.0) -> float:
        """(int |u|^p |x|^a dx)^{1/p} on the grid."""
        x = self.x
        return float((np.sum(np.abs(self.values) ** p * np.abs(x) ** a) * self.dx) ** (1.0 / p))


# --- FOURIER MULTIPLIERS ---

def _apply_multiplier(u: LineSignal, symbol: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    n_fft = u.n if u.periodic else PAD_FACTOR * u.n
    spectrum = sfft.fft(u.values, n=n_fft)
    xi = 2.0 * np.pi * sfft.fftfreq(n_fft, d=u.dx)
    out = sfft.ifft(spectrum * symbol(xi))[: u.n]
    return out


def _half_mask(xi: np.ndarray) -> np.ndarray:
    mask = (xi > 0).astype(float)
    mask[xi == 0] = 0.5
    nyquist = xi.size // 2
    mask[nyquist] = 0.5
    return mask


def hilbert_transform(u: LineSignal) -> LineSignal:
    """Fourier multiplier -i sgn(xi); DC and Nyquist bins are annihilated."""
    def symbol(xi):
        s = -1j * np.sign(xi)
        s[xi.size // 2] = 0.0
        return s

    out = _apply_multiplier(u, symbol)
    if np.isrealobj(u.values):
        out = out.real
    return u.with_values(out)


def half_projection(u: LineSignal, route: str = "mask") -> LineSignal:
    """
    (1/2 pi) int_0^inf e^{i r rho} u^(r) dr.

    route="mask" cuts the spectrum directly; route="hilbert" uses (u + iHu)/2.
    """
    if route == "mask":
        return u.with_values(_apply_multiplier(u, _half_mask))
    if route == "hilbert":
        return u.with_values(0.5 * (u.values + 1j * hilbert_transform(u).values))
    raise DomainError(f"unknown half_projection route {route!r}")


def _inverse_transform_samples(F: Callable[[np.ndarray], np.ndarray], dx: float, half_count: int,
                               n_fft: int) -> np.ndarray:
    """(1/2 pi) int e^{i t lambda} F(lambda) d lambda at t = k dx, |k| <= half_count."""
    xi = 2.0 * np.pi * sfft.fftfreq(n_fft, d=dx)
    samples = sfft.ifft(F(xi)) / dx
    k = np.arange(-half_count, half_count + 1)
    return samples[k % n_fft]


def smoothed_half_projection(F: Callable[[np.ndarray], np.ndarray], u: LineSignal,
                             tol: float = 1e-8, check: bool = True) -> LineSignal:
    """
    (1/2 pi) int_0^inf e^{i lambda rho} F(lambda) u^(lambda) d lambda.

    With check=True the result is compared with the convolution of the inverse
    transform of F against the half projection of u on the central half of the
    window; a mismatch above tol (relative to the sup) raises AccuracyError.
    """
    direct = _apply_multiplier(u, lambda xi: F(xi) * _half_mask(xi))
    result = u.with_values(direct)
    if not check:
        return result

    n_fft = u.n if u.periodic else PAD_FACTOR * u.n
    kernel = _inverse_transform_samples(F, u.dx, u.n // 2, n_fft)
    projected = half_projection(u).values
    via_kernel = fftconvolve(projected, kernel, mode="same") * u.dx
    inner = np.abs(u.x) <= 0.5 * u.half_width
    scale = max(np.max(np.abs(direct)), 1e-300)
    gap = float(np.max(np.abs(direct[inner] - via_kernel[inner])) / scale)
    if gap > tol:
        raise AccuracyError(f"smoothed half projection routes disagree by {gap:.2e}", estimate=gap)
    logger.debug(f"smoothed half projection routes agree to {gap:.2e}")
    return result


# --- MAXIMAL FUNCTION ---

def _window_sup(abs_vals: np.ndarray, cumsum: np.ndarray, width: int) -> np.ndarray:
    n = abs_vals.size
    averages = (cumsum[width:] - cumsum[:-width]) / width
    padded = np.concatenate([np.full(width - 1, -np.inf), averages, np.full(width - 1, -np.inf)])
    best = maximum_filter1d(padded, size=width, mode="constant", cval=-np.inf)
    return best[width // 2: width // 2 + n]


def window_widths(n: int, windows: int) -> np.ndarray:
    return np.unique(np.round(np.geomspace(1, n, windows)).astype(int))


def maximal(u: LineSignal, windows: int = DEFAULT_WINDOWS, exact: bool = False) -> LineSignal:
    """
    Mu(t) = sup over intervals I containing t of |I|^{-1} int_I |u|.

    Intervals are unions of grid cells; exact=True uses every width (O(n^2)),
    otherwise `windows` geometric widths.
    """
    a = np.abs(u.values).astype(float)
    cumsum = np.concatenate([[0.0], np.cumsum(a)])
    widths = np.arange(1, u.n + 1) if exact else window_widths(u.n, windows)
    result = np.zeros(u.n)
    for w in widths:
        np.maximum(result, _window_sup(a, cumsum, int(w)), out=result)
    return u.with_values(result)


# --- POWER WEIGHTS ---

@dataclass(frozen=True)
class PowerWeight:
    """w(r) = |r|^a on the line, paired with a Lebesgue exponent p > 1."""
    a: float
    p: float

    def __post_init__(self):
        if self.p <= 1:
            raise DomainError(f"A_p needs p > 1, got {self.p}")

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return np.abs(r) ** self.a

    @property
    def dual_exponent(self) -> float:
        """Exponent of w^{-1/(p-1)}."""
        return -self.a / (self.p - 1.0)

    def in_ap(self) -> bool:
        return -1.0 < self.a < self.p - 1.0


def _power_average(b: float, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Average of |r|^b over [lo, hi]; inf when the interval meets 0 and b <= -1."""
    if b <= -1.0:
        out = np.empty(lo.shape)
        meets = (lo <= 0.0) & (hi >= 0.0)
        out[meets] = np.inf
        safe = ~meets
        lo_s, hi_s = lo[safe], hi[safe]
        out[safe] = _primitive_difference(b, lo_s, hi_s) / (hi_s - lo_s)
        return out
    return _primitive_difference(b, lo, hi) / (hi - lo)


def _primitive_difference(b: float, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    if b == -1.0:
        # only intervals on one side of 0 reach here
        return np.log(np.abs(hi) / np.abs(lo))
    e = b + 1.0
    return (np.sign(hi) * np.abs(hi) ** e - np.sign(lo) * np.abs(lo) ** e) / e


def ap_scan(w: PowerWeight, window_count: int = DEFAULT_WINDOWS,
            centers: Optional[np.ndarray] = None) -> np.ndarray:
    """Running sup of the A_p quantity over h_0 < h_1 < ... (one entry per scale)."""
    if centers is None:
        centers = np.linspace(-1.0, 1.0, 257)
    centers = np.union1d(np.asarray(centers, dtype=float), [0.0])
    scales = AP_BASE_SCALE * 2.0 ** np.arange(window_count)
    lo = centers[:, None] - scales[None, :]
    hi = centers[:, None] + scales[None, :]
    with np.errstate(over="ignore", invalid="ignore"):
        first = _power_average(w.a, lo.ravel(), hi.ravel()).reshape(lo.shape)
        second = _power_average(w.dual_exponent, lo.ravel(), hi.ravel()).reshape(lo.shape)
        values = first * second ** (w.p - 1.0)
    values = np.where(np.isnan(values), np.inf, values)
    per_scale = values.max(axis=0)
    return np.maximum.accumulate(per_scale)


def ap_characteristic(w: PowerWeight, window_count: int = DEFAULT_WINDOWS,
                      centers: Optional[np.ndarray] = None) -> float:
    """
    sup over [c-h, c+h] of avg(w) * avg(w^{-1/(p-1)})^{p-1}; math.inf is the
    diverging verdict (an infinite average, or a running sup still growing by
    more than 1.25x per decade of scales at 5 consecutive scales).
    """
    running = ap_scan(w, window_count, centers)
    if np.isinf(running[-1]):
        return math.inf
    # 2^k scales: a decade is about 3.32 steps
    steps = int(round(math.log2(10.0)))
    if running.size > steps + AP_GROWTH_RUN:
        ratio = running[steps:] / running[:-steps]
        growing = ratio[-AP_GROWTH_RUN:] > AP_GROWTH_FACTOR
        if np.all(growing):
            logger.info(f"A_p sup for a={w.a}, p={w.p} keeps growing; reporting divergence")
            return math.inf
    return float(running[-1])


EX_WEIGHT_KINDS = ("near-one", "lower", "upper", "above-m")


def ex_weight_exponent(kind: str, m: int, p: float) -> float:
    """The power weights used in the L^p analysis, indexed by their p-range."""
    if kind == "near-one":
        return (m - 1) - p * (m - 1)
    if kind == "lower":
        return (m - 1) - 2.0 * p
    if kind == "upper":
        return (m - 1) - p
    if kind == "above-m":
        return float(m - 1)
    raise DomainError(f"unknown weight kind {kind!r}; expected one of {EX_WEIGHT_KINDS}")


def ex_weight_range(kind: str, m: int) -> Tuple[float, float]:
    """Open p-interval on which the weight of `kind` lies in A_p."""
    ranges: Dict[str, Tuple[float, float]] = {
        "near-one": (1.0, m / (m - 1.0)),
        "lower": (m / 3.0, m / 2.0),
        "upper": (m / 2.0, float(m)),
        "above-m": (float(m), math.inf),
    }
    if kind not in ranges:
        raise DomainError(f"unknown weight kind {kind!r}; expected one of {EX_WEIGHT_KINDS}")
    return ranges[kind]


def weighted_hilbert_ratio(u: LineSignal, a: float, p: float) -> float:
    """||Hu||_{L^p(|x|^a)} / ||u||_{L^p(|x|^a)} on the grid."""
    denominator = u.weighted_norm(p, a)
    if denominator == 0.0:
        return 0.0
    return hilbert_transform(u).weighted_norm(p, a) / denominator


def weighted_hilbert_probe(fn: Callable[[np.ndarray], np.ndarray], a: float, p: float,
                           scales: Sequence[float], half_width: float,
                           log2_samples: int) -> List[float]:
    """Ratios for the dilation family u_t(x) = u(x/t)."""
    ratios = []
    for t in scales:
        signal = LineSignal.from_function(lambda x, t=t: fn(x / t), half_width, log2_samples, periodic=True)
        ratios.append(weighted_hilbert_ratio(signal, a, p))
    return ratios


# --- CONVOLUTION MAJORANT ---

@dataclass
class MajorantReport:
    constant: float
    bound: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.constant <= self.bound * (1.0 + self.tolerance)

    def to_dict(self) -> dict:
        return {'constant': self.constant, 'bound': self.bound,
                'tolerance': self.tolerance, 'passed': self.passed}


def least_radial_majorant(values: np.ndarray) -> np.ndarray:
    """
    sup_{|s| >= |t|} |F(s)| for samples on the symmetric lattice t = k dx,
    |k| <= K (odd length, t = 0 in the middle).
    """
    mag = np.abs(np.asarray(values))
    c = mag.size // 2
    right = np.maximum(mag[c:], mag[c::-1])
    envelope = np.maximum.accumulate(right[::-1])[::-1]
    return np.concatenate([envelope[:0:-1], envelope])


def majorant_check(F: Callable[[np.ndarray], np.ndarray], u: LineSignal,
                   G: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                   tolerance: float = 1e-2, windows: Optional[int] = None,
                   strict: bool = True) -> MajorantReport:
    """
    Empirical smallest C with |(F*u)(t)| <= C Mu(t) on the grid, against the
    bound ||G||_1 for a radial decreasing integrable majorant G of F.

    F and G are sampled on the lattice k dx, |k| <= n/2, so that the discrete
    convolution lands on the cell midpoints of u. Without G the least radial
    decreasing majorant of the samples is used.
    A constant above the bound raises AccuracyError unless strict is False.
    """
    t = u.dx * np.arange(-(u.n // 2), u.n // 2 + 1)
    f = np.asarray(F(t))
    g = least_radial_majorant(f) if G is None else np.real(np.asarray(G(t)))
    c = g.size // 2
    if not np.allclose(g, g[::-1], rtol=1e-12, atol=0.0):
        raise PreconditionError("majorant is not radial")
    if np.any(np.diff(g[c:]) > 1e-15 * max(g.max(), 1e-300)):
        raise PreconditionError("majorant is not decreasing in |t|")
    if np.any(np.abs(f) > g * (1.0 + 1e-12)):
        raise PreconditionError("majorant does not dominate |F|")

    conv = fftconvolve(u.values, f, mode="same") * u.dx
    mu = maximal(u, exact=windows is None, windows=windows or DEFAULT_WINDOWS).values
    support = mu > 0
    constant = float(np.max(np.abs(conv[support]) / mu[support])) if np.any(support) else 0.0
    bound = float(np.sum(g) * u.dx)
    report = MajorantReport(constant, bound, tolerance)
    logger.debug(f"majorant check: C={constant:.4g}, ||G||_1={bound:.4g}")
    if strict and not report.passed:
        raise AccuracyError(f"convolution constant {constant:.4g} exceeds ||G||_1 = {bound:.4g}",
                            estimate=constant - bound)
    return report
