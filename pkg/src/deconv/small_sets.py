"""Sub-threshold frequency sets, kernel truncation, and the dual radius.

The unrecoverable part of the reconstruction error lives on the set where
the kernel transform is small:

    B = { lambda : |phi_hat(lambda)| <= threshold, |lambda| <= r }.

measure_small_set estimates the Lebesgue measure of B on the real axis (the
quantity the error budget consumes) by dense scanning plus endpoint
bisection.  cartan_bound supplies the theoretical ceiling r^{-q+1/2}.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ComputationError, NoRootError, ValidationError
from .grid_signal import SampledSignal
from .tail_profile import DualProfile

LOG_15E3 = math.log(15.0) + 3.0


@dataclass(frozen=True)
class SmallSetReport:
    """Measured sub-threshold set: disjoint intervals inside [-r, r]."""

    threshold: float
    r: float
    measure_estimate: float
    interval_count: int
    intervals: tuple  # ((lo, hi), ...) with lo < hi
    eps: float = math.nan       # noise level behind the threshold, if any
    bound: float = math.nan     # r^{-q+1/2} when q is known

    def __post_init__(self):
        if self.measure_estimate < 0.0:
            raise ValidationError("measure must be nonnegative",
                                  module="small_sets", operation="SmallSetReport")
        if self.measure_estimate > 2.0 * self.r * (1.0 + 1e-12):
            raise ValidationError("measure exceeds the scanned interval",
                                  module="small_sets", operation="SmallSetReport")
        if self.interval_count != len(self.intervals):
            raise ValidationError("interval_count disagrees with the interval list",
                                  module="small_sets", operation="SmallSetReport")

    def as_dict(self) -> dict:
        def opt(x):
            return None if math.isnan(x) else x
        return {
            "eps": opt(self.eps),
            "threshold": self.threshold,
            "r_eps": self.r,
            "measure_estimate": self.measure_estimate,
            "bound": opt(self.bound),
            "interval_count": self.interval_count,
            "intervals": [[lo, hi] for lo, hi in self.intervals],
        }


def cartan_bound(q: float, r_eps: float) -> float:
    """Theoretical measure ceiling r_eps^{-q+1/2}.

    Meaningful as a bound in the regime r_eps > 1; smaller radii are common
    at desk scale, so they warn rather than reject.
    """
    if not (q > 0.5):
        raise ValidationError("q must exceed 1/2",
                              module="small_sets", operation="cartan_bound")
    if not (r_eps > 0.0):
        raise ValidationError("r_eps must be positive",
                              module="small_sets", operation="cartan_bound")
    if r_eps <= 1.0:
        warnings.warn("cartan_bound called with r_eps <= 1: the ceiling "
                      "exceeds 1 and is loose at this radius", RuntimeWarning,
                      stacklevel=2)
    return r_eps ** (-q + 0.5)


def _eval_abs(phi_hat_fn, lam) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(lam, dtype=np.float64))
    vals = np.asarray(phi_hat_fn(arr))
    if vals.shape != arr.shape:
        vals = np.array([phi_hat_fn(x) for x in arr])
    return np.abs(vals)


def _bisect_crossing(phi_hat_fn, threshold: float, below_pt: float,
                     above_pt: float, tol: float) -> float:
    """Point where |phi_hat| crosses the threshold between the two samples."""
    lo, hi = below_pt, above_pt
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if _eval_abs(phi_hat_fn, mid)[0] < threshold:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def measure_small_set(phi_hat_fn, threshold: float, r: float,
                      resolution: float) -> SmallSetReport:
    """Scan |lambda| <= r for maximal intervals with |phi_hat| < threshold.

    Endpoints are refined by bisection to 1e-3 * resolution, so the measure
    is far more accurate than the scan step.  An interval shorter than
    4 * resolution triggers a warning: structure at that scale may have been
    missed entirely between samples.
    """
    if not (threshold > 0.0):
        raise ValidationError("threshold must be positive",
                              module="small_sets", operation="measure_small_set")
    if not (r > 0.0):
        raise ValidationError("r must be positive",
                              module="small_sets", operation="measure_small_set")
    if not (resolution <= r / 1e4):
        raise ValidationError("resolution must be at most r/1e4",
                              module="small_sets", operation="measure_small_set")
    count = int(math.ceil(2.0 * r / resolution))
    lam = np.linspace(-r, r, count + 1)
    below = _eval_abs(phi_hat_fn, lam) < threshold

    intervals = []
    tol = 1e-3 * resolution
    i = 0
    n = below.size
    while i < n:
        if not below[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and below[j + 1]:
            j += 1
        if i == 0:
            lo = float(lam[0])
        else:
            lo = _bisect_crossing(phi_hat_fn, threshold,
                                  float(lam[i]), float(lam[i - 1]), tol)
        if j == n - 1:
            hi = float(lam[-1])
        else:
            hi = _bisect_crossing(phi_hat_fn, threshold,
                                  float(lam[j]), float(lam[j + 1]), tol)
        if hi > lo:
            intervals.append((lo, hi))
        i = j + 1

    short = [iv for iv in intervals if iv[1] - iv[0] < 4.0 * resolution]
    if short:
        warnings.warn(f"{len(short)} sub-threshold interval(s) shorter than "
                      "4x the scan resolution: decrease resolution to rule "
                      "out missed structure", RuntimeWarning, stacklevel=2)
    measure = float(sum(hi - lo for lo, hi in intervals))
    return SmallSetReport(threshold, r, measure, len(intervals),
                          tuple(intervals))


def truncated_kernel(kernel: SampledSignal, s_eps: float) -> SampledSignal:
    """Restrict the kernel to [-s_eps, s_eps], zero elsewhere.

    The cut snaps outward to the first grid sample at or beyond s_eps on
    each side: an inward snap would remove more mass than the tail at
    s_eps and break the transform-deviation bound.  The removed quadrature
    mass stays below the tail at s_eps, so the transform deviates from the
    original by at most eps when s_eps came from tail_cutoff.
    """
    if s_eps < 0.0:
        raise ValidationError("s_eps must be nonnegative",
                              module="small_sets", operation="truncated_kernel")
    t = kernel.grid()
    right = t[t >= s_eps]
    left = t[t <= -s_eps]
    snap_hi = float(right[0]) if right.size else math.inf
    snap_lo = float(left[-1]) if left.size else -math.inf
    slack = 0.25 * kernel.spacing
    keep = (t >= snap_lo - slack) & (t <= snap_hi + slack)
    vals = np.where(keep, kernel.values, 0.0 + 0.0j)
    # once the support is strictly inside the grid nothing lives off-grid
    tail = kernel.truncation_tail if bool(np.all(keep)) else 0.0
    return SampledSignal(kernel.t_min, kernel.spacing, vals, tail)


def solve_dual_radius(eps: float, q: float,
                      pstar: DualProfile) -> tuple[float, float]:
    """Root of the dual-profile radius equation, plus its asymptotic ratio.

    F(R) = [(q+1/2) R + log(15 e^3)] [1 + log(2R) + p*(2R+1)] + log eps = 0.

    The second bracket runs from -inf to +inf as R grows, the first is
    positive throughout, so F crosses zero exactly once; doubling plus
    bisection pins the root.  The returned ratio
    log p*(2R+1) / log log(1/eps) tends to 1 as eps -> 0 for superlinear
    tail profiles; at desk-scale eps it is far below 1.
    """
    if not (eps > 0.0 and np.isfinite(eps)):
        raise ValidationError("eps must be positive and finite",
                              module="small_sets", operation="solve_dual_radius")
    if not (q > 0.5):
        raise ValidationError("q must exceed 1/2",
                              module="small_sets", operation="solve_dual_radius")
    rhs = -math.log(eps)
    if rhs <= 0.0:
        raise NoRootError("eps too large: -log(eps) must be positive",
                          module="small_sets", operation="solve_dual_radius")
    s_max = float(pstar.s_grid[-1])
    if s_max <= 1.0:
        raise ValidationError("dual profile must extend past s = 1 to "
                              "evaluate p*(2R+1)", module="small_sets",
                              operation="solve_dual_radius")
    r_max = (s_max - 1.0) / 2.0

    def f(rr: float) -> float:
        return (((q + 0.5) * rr + LOG_15E3)
                * (1.0 + math.log(2.0 * rr) + pstar.value_at(2.0 * rr + 1.0))
                - rhs)

    lo = min(1e-8, r_max / 2.0)
    if f(lo) >= 0.0:
        raise NoRootError("no root: equation already nonnegative at tiny radius",
                          module="small_sets", operation="solve_dual_radius")
    hi = min(2.0 * lo, r_max)
    while f(hi) <= 0.0:
        if hi >= r_max:
            raise ComputationError("dual profile grid too short to bracket "
                                   "the radius: extend the s-grid",
                                   module="small_sets",
                                   operation="solve_dual_radius")
        hi = min(2.0 * hi, r_max)
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    radius = 0.5 * (lo + hi)
    pval = pstar.value_at(2.0 * radius + 1.0)
    ratio = math.log(pval) / math.log(rhs) if pval > 0.0 else math.nan
    return radius, ratio
