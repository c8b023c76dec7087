"""
Quadrature rules shared by the kernel, mean and wave-operator modules.

Filon's formula integrates f(x) e^{ikx} over a uniform grid of odd length,
treating the oscillating factor exactly and f by piecewise quadratics.
"""
from functools import lru_cache
from typing import List, Tuple

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.special import roots_genlaguerre, roots_legendre

from .errors import DomainError

# Below this |theta| the closed-form Filon coefficients lose digits to cancellation.
_SERIES_THETA = 0.05


def _alpha_beta_gamma(theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    theta = np.asarray(theta, dtype=float)
    alpha = np.empty_like(theta)
    beta = np.empty_like(theta)
    gamma = np.empty_like(theta)

    small = np.abs(theta) < _SERIES_THETA
    t = theta[small]
    t2 = t * t
    alpha[small] = t * t2 * (2.0 / 45.0 - t2 * (2.0 / 315.0 - t2 * 2.0 / 4725.0))
    beta[small] = 2.0 / 3.0 + t2 * (2.0 / 15.0 - t2 * (4.0 / 105.0 - t2 * 2.0 / 567.0))
    gamma[small] = 4.0 / 3.0 - t2 * (2.0 / 15.0 - t2 * (1.0 / 210.0 - t2 / 11340.0))

    big = ~small
    t = theta[big]
    sin_t = np.sin(t)
    cos_t = np.cos(t)
    t2 = t * t
    it3 = 1.0 / (t2 * t)
    alpha[big] = it3 * (t2 + t * sin_t * cos_t - 2.0 * sin_t * sin_t)
    beta[big] = 2.0 * it3 * (t * (1.0 + cos_t * cos_t) - 2.0 * sin_t * cos_t)
    gamma[big] = 4.0 * it3 * (sin_t - t * cos_t)
    return alpha, beta, gamma


def filon_exp(f: np.ndarray, dx: float, k, x0: float = 0.0, chunk: int = 256) -> np.ndarray:
    """
    Integral of f(x) e^{ikx} over [x0, x0 + (n-1) dx] for every k.

    f has shape (n,) or (len(k), n); in the second form row i is integrated
    against k[i]. n must be odd and at least 3.
    """
    f = np.asarray(f)
    k = np.atleast_1d(np.asarray(k, dtype=float))
    n = f.shape[-1]
    if n < 3 or n % 2 == 0:
        raise DomainError('f must have an odd length, >=3, along its integration axis')
    per_row = f.ndim == 2
    if per_row and f.shape[0] != k.size:
        raise DomainError('row count of f must match the number of frequencies')

    x = x0 + dx * np.arange(n)
    out = np.empty(k.size, dtype=complex)
    for start in range(0, k.size, chunk):
        kk = k[start:start + chunk]
        ff = f[start:start + chunk] if per_row else f[None, :]
        alpha, beta, gamma = _alpha_beta_gamma(kk * dx)
        g = ff * np.exp(1j * np.outer(kk, x))
        even = g[:, ::2].sum(axis=1) - 0.5 * (g[:, 0] + g[:, -1])
        odd = g[:, 1::2].sum(axis=1)
        boundary = 1j * (g[:, 0] - g[:, -1])
        out[start:start + chunk] = dx * (alpha * boundary + beta * even + gamma * odd)
    return out


def cos_integral(f: np.ndarray, dx: float, k, x0: float = 0.0) -> np.ndarray:
    """Integral of f(x) cos(kx) over the grid."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    return 0.5 * (filon_exp(f, dx, k, x0) + filon_exp(f, dx, -k, x0))


def sin_integral(f: np.ndarray, dx: float, k, x0: float = 0.0) -> np.ndarray:
    """Integral of f(x) sin(kx) over the grid."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    return (filon_exp(f, dx, k, x0) - filon_exp(f, dx, -k, x0)) / 2j


def simpson_weights(n: int, dx: float) -> np.ndarray:
    """Composite Simpson weights for an odd number of uniform samples."""
    if n < 3 or n % 2 == 0:
        raise DomainError('Simpson needs an odd number of samples, >=3')
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * dx / 3.0


def running_integral(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Cumulative Simpson integral of y over x, starting at 0; complex y keeps its imaginary part."""
    y = np.asarray(y)
    if np.iscomplexobj(y):
        return (cumulative_simpson(y.real, x=x, initial=0.0)
                + 1j * cumulative_simpson(y.imag, x=x, initial=0.0))
    return cumulative_simpson(y, x=x, initial=0.0)


def geometric_blocks(stop: float, first: float, samples: int,
                     start: float = 0.0) -> List[Tuple[np.ndarray, float]]:
    """
    Odd-length uniform grids tiling [start, stop] whose edges double: from
    `first` when start is 0, from 2 * start otherwise. Every block carries the
    same sample count, so the step grows with the distance from the origin.
    """
    if not stop > start:
        raise DomainError(f"empty interval [{start}, {stop}]")
    edge = first if start <= 0.0 else 2.0 * start
    edges = [start]
    while edge < stop:
        edges.append(edge)
        edge *= 2.0
    # no sliver at the far end
    if len(edges) > 1 and stop - edges[-1] < 0.5 * (edges[-1] - edges[-2]):
        edges.pop()
    edges.append(stop)
    n = samples + 1 if samples % 2 == 0 else samples
    blocks = []
    for a, b in zip(edges, edges[1:]):
        x = np.linspace(a, b, n)
        blocks.append((x, x[1] - x[0]))
    return blocks


def power_tail_exp(amplitude, nu: float, z: float, k, terms: int = 8) -> np.ndarray:
    """
    int_z^inf amplitude (r/z)^{-nu} e^{ikr} dr for nu > 0, from the
    integration-by-parts series -e^{ikz}/(ik) sum_j (nu)_j / (ikz)^j.
    Needs |k| z large; k = 0 is allowed when nu > 1.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    out = np.empty(k.size, dtype=complex)
    zero = k == 0
    if np.any(zero):
        if nu <= 1.0:
            raise DomainError(f"the tail of r^-{nu} has no integral at k = 0")
        out[zero] = z / (nu - 1.0)
    kk = k[~zero]
    ikz = 1j * kk * z
    series = np.ones(kk.size, dtype=complex)
    term = np.ones(kk.size, dtype=complex)
    for j in range(terms - 1):
        term = term * (nu + j) / ikz
        series = series + term
    out[~zero] = -np.exp(1j * kk * z) / (1j * kk) * series
    return amplitude * out


@lru_cache(maxsize=32)
def laguerre_rule(n: int, alpha: float) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Laguerre nodes/weights for the weight t^alpha e^{-t} on (0, inf)."""
    x, w = roots_genlaguerre(n, alpha)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=64)
def compactified_rule(n: int, s: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes/weights for  integral_0^inf (1+a)^{-s} a^{-1/2} f(a) da.

    With a = u^2/(1-u^2) the density becomes 2 (1-u^2)^{s-3/2} du on [0, 1],
    which has no endpoint singularity; Gauss-Legendre is applied in u.
    """
    x, w = roots_legendre(n)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    one_minus = 1.0 - u * u
    nodes = u * u / one_minus
    weights = 2.0 * one_minus ** (s - 1.5) * wu
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def uniform_grid(length: float, count: int) -> Tuple[np.ndarray, float]:
    """Odd-length uniform grid on [0, length] suitable for Filon."""
    if count % 2 == 0:
        count += 1
    x = np.linspace(0.0, length, count)
    return x, x[1] - x[0]
