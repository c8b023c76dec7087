"""
L^p probes of operators on zonal functions of R^3.

A probe runs an operator over a family u_t and reports
||Op u_t||_p / ||u_t||_p. The dilation family is u_t(x) = u(x/t); the window
family keeps u fixed and truncates the output norm at |x| <= t, which exposes
operators whose range leaves L^p only through slow tails.
"""
import concurrent.futures
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import DomainError, RangeError
from ..means import effective_support
from ..profiles import RadialProfile, SectorFunction
from ..threshold import PotentialSpec, fractional_integral
from .expansion import FiniteRankOperator

logger = logging.getLogger(__name__)

DEFAULT_PROBE_SLOPE = 0.15
DEFAULT_PROBE_SPREAD = 3.0
DEFAULT_PROBE_SETTLE = 0.075
SLOPE_POINTS = 3
FAMILIES = ("dilation", "window")
VERDICTS = ("bounded", "growing", "indeterminate")

Operator = Callable[[SectorFunction], SectorFunction]


def rank_one_correction(phi: RadialProfile, V: PotentialSpec, a: complex,
                        psi: Optional[RadialProfile] = None) -> FiniteRankOperator:
    """u -> a phi <psi, u> with psi = |D|^{-1}(V phi)."""
    if psi is None:
        vphi = phi.with_values(np.real(V.V.values) * phi.values,
                               decay_exponent=phi.decay_exponent + V.delta)
        psi = fractional_integral(1.0, vphi, 3)
    return FiniteRankOperator((SectorFunction(0, phi),), (SectorFunction(0, psi),), np.array([[a]]))


@dataclass(frozen=True)
class ProbeReport:
    operator: str
    p: float
    scales: Tuple[float, ...]
    ratios: Tuple[float, ...]
    verdict: str
    slope: float
    family: str = "dilation"
    thresholds: Tuple[float, float, float] = field(
        default=(DEFAULT_PROBE_SLOPE, DEFAULT_PROBE_SPREAD, DEFAULT_PROBE_SETTLE))

    @property
    def spread(self) -> float:
        return upward_spread(self.ratios)

    def to_dict(self) -> dict:
        return {'operator': self.operator, 'p': self.p, 'family': self.family,
                'scales': list(self.scales), 'ratios': list(self.ratios),
                'verdict': self.verdict, 'slope': self.slope, 'spread': self.spread}


def upward_spread(ratios: Sequence[float]) -> float:
    """max over i <= j of ratio_j / ratio_i; decay alone keeps this at 1."""
    best = 1.0
    low = math.inf
    for r in ratios:
        if low < math.inf and low > 0:
            best = max(best, r / low)
        low = min(low, r)
    return best


def tail_slope(scales: Sequence[float], ratios: Sequence[float], points: int = SLOPE_POINTS) -> float:
    """Least-squares slope of log(ratio) against log(t) over the largest scales."""
    t = np.log(np.asarray(scales[-points:], dtype=float))
    y = np.log(np.maximum(np.asarray(ratios[-points:], dtype=float), 1e-300))
    if t.size < 2:
        return 0.0
    return float(np.polyfit(t, y, 1)[0])


def verdict_for(scales: Sequence[float], ratios: Sequence[float],
                slope_limit: float = DEFAULT_PROBE_SLOPE,
                spread_limit: float = DEFAULT_PROBE_SPREAD,
                settle_limit: float = DEFAULT_PROBE_SETTLE) -> Tuple[str, float]:
    """
    "growing" when the tail slope exceeds slope_limit; "bounded" when no ratio
    exceeds an earlier one by spread_limit, or when the tail has levelled off
    (slope at most settle_limit) after a transient rise; "indeterminate" otherwise.
    """
    slope = tail_slope(scales, ratios)
    if slope > slope_limit:
        return "growing", slope
    if upward_spread(ratios) < spread_limit or slope <= settle_limit:
        return "bounded", slope
    return "indeterminate", slope


def _as_sector(u: Union[SectorFunction, RadialProfile]) -> SectorFunction:
    return u if isinstance(u, SectorFunction) else SectorFunction(0, u)


def _windowed_norm(f: SectorFunction, p: float, radius: Optional[float]) -> float:
    if radius is None:
        return f.lp_norm(p)
    mask = f.grid.r <= radius
    clipped = f.radial.with_values(np.where(mask, f.radial.values, 0.0))
    return SectorFunction(f.ell, clipped).lp_norm(p)


def _check_scales(scales: Sequence[float]) -> Tuple[float, ...]:
    scales = tuple(float(t) for t in scales)
    if len(scales) < 2:
        raise DomainError("a probe needs at least two scales")
    if any(t <= 0 for t in scales) or any(b <= a for a, b in zip(scales, scales[1:])):
        raise DomainError(f"scales must be positive and increasing, got {scales}")
    return scales


def lp_probes(op: Operator, ps: Sequence[float], base_u: Union[SectorFunction, RadialProfile],
              scales: Sequence[float], label: str = "op", family: str = "dilation",
              slope_limit: float = DEFAULT_PROBE_SLOPE, spread_limit: float = DEFAULT_PROBE_SPREAD,
              settle_limit: float = DEFAULT_PROBE_SETTLE, workers: int = 1) -> List[ProbeReport]:
    """
    One report per exponent in ps. The operator runs once per scale and every
    exponent reads its norms off the same image; verdicts follow verdict_for.
    """
    ps = tuple(float(p) for p in ps)
    if not ps:
        raise DomainError("a probe needs at least one exponent")
    if min(ps) < 1:
        raise DomainError(f"p must be >= 1, got {min(ps)}")
    if family not in FAMILIES:
        raise DomainError(f"unknown probe family {family!r}; expected one of {FAMILIES}")
    scales = _check_scales(scales)
    base = _as_sector(base_u)
    grid = base.grid

    if family == "dilation":
        reach = effective_support(base.radial) * scales[-1]
        if reach > grid.r_max:
            raise RangeError(f"dilate at t={scales[-1]:g} reaches r={reach:.3g} beyond r_max={grid.r_max:g}")
    elif scales[-1] > grid.r_max:
        raise RangeError(f"window radius {scales[-1]:g} exceeds r_max={grid.r_max:g}")

    def ratios_at(t: float) -> List[float]:
        u = base.dilate(t)
        image = _as_sector(op(u))
        out = []
        for p in ps:
            denominator = u.lp_norm(p)
            out.append(image.lp_norm(p) / denominator if denominator > 0 else 0.0)
        return out

    if family == "window":
        # op(base) does not depend on t
        image = _as_sector(op(base))
        table = []
        for t in scales:
            row = []
            for p in ps:
                denominator = base.lp_norm(p)
                row.append(_windowed_norm(image, p, t) / denominator if denominator > 0 else 0.0)
            table.append(row)
    elif workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            table = list(executor.map(ratios_at, scales))
    else:
        table = [ratios_at(t) for t in scales]

    reports = []
    for i, p in enumerate(ps):
        ratios = tuple(float(row[i]) for row in table)
        verdict, slope = verdict_for(scales, ratios, slope_limit, spread_limit, settle_limit)
        logger.info(f"probe {label} p={p:g} ({family}): verdict={verdict}, slope={slope:.3f}")
        reports.append(ProbeReport(label, p, scales, ratios, verdict, slope, family,
                                   (slope_limit, spread_limit, settle_limit)))
    return reports


def lp_probe(op: Operator, p: float, base_u: Union[SectorFunction, RadialProfile],
             scales: Sequence[float], label: str = "op", family: str = "dilation",
             slope_limit: float = DEFAULT_PROBE_SLOPE, spread_limit: float = DEFAULT_PROBE_SPREAD,
             settle_limit: float = DEFAULT_PROBE_SETTLE, workers: int = 1) -> ProbeReport:
    """Ratio table and verdict for a single exponent."""
    return lp_probes(op, [p], base_u, scales, label, family, slope_limit, spread_limit, settle_limit, workers)[0]


def identity(u: SectorFunction) -> SectorFunction:
    return u


def combine(*ops: Operator) -> Operator:
    """Sum of operators that map a sector into itself."""
    def total(u: SectorFunction) -> SectorFunction:
        parts = [_as_sector(op(u)) for op in ops]
        radial = parts[0].radial
        for part in parts[1:]:
            radial = radial + part.radial
        return SectorFunction(parts[0].ell, radial)
    return total


def standard_scales(count: int = 6, first: float = 1.0, factor: float = 2.0) -> List[float]:
    return [first * factor ** k for k in range(count)]
