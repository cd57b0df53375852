"""Growth exponents and zero counts for transforms of compact-support kernels.

A kernel supported in [mu, sigma] subset [0, 1] has an entire Laplace
transform Phi(z) = integral of phi(t) e^{zt}; its real-axis growth recovers
the support edges,

    log |Phi(R)| / R  -> sigma,      log |Phi(-R)| / R -> -mu,

and its zeros have linear density (sigma - mu)/pi along radii.  Everything
here is evaluated in the log domain, so there is no overflow ceiling on the
radii.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ComputationError, PhaseTrackingError, ValidationError
from .grid_signal import SampledSignal, laplace_parts

_CONTOUR_ZERO_REL = 1e-13   # |Phi| below this times the contour max => nudge
_NUDGE_FACTOR = 0.37        # irrational-flavored step, avoids zero lattices
_MAX_NUDGES = 8


def _require_compact(kernel: SampledSignal, operation: str) -> None:
    if kernel.truncation_tail != 0.0:
        raise ValidationError("kernel carries off-grid mass: transform is "
                              "not entire-evaluable from these samples",
                              module="entire_diagnostics", operation=operation)


def _log_abs_transform(kernel: SampledSignal, zs: np.ndarray) -> np.ndarray:
    """log |Phi(z)| per sample, with -inf where the reduced sum underflows."""
    log_scale, reduced = laplace_parts(kernel, zs)
    mag = np.abs(reduced)
    out = np.full(zs.shape, -np.inf)
    ok = mag > 0.0
    out[ok] = log_scale[ok] + np.log(mag[ok])
    return out


@dataclass(frozen=True)
class GrowthEstimate:
    """Real-axis growth ratios and their tail-window exponents.

    sigma_hat is the max of log_ratio_pos over the last third of the radii,
    the declared finite-R stand-in for a limsup; mu_hat analogously from the
    negative axis.  Radii where the transform lands near a zero crossing
    (underflow of the reduced sum) are flagged and excluded from the max.
    """

    radii: np.ndarray
    log_ratio_pos: np.ndarray
    log_ratio_neg: np.ndarray
    sigma_hat: float
    mu_hat: float
    excluded_pos: np.ndarray
    excluded_neg: np.ndarray

    def __post_init__(self):
        n = self.radii.size
        for name in ("log_ratio_pos", "log_ratio_neg",
                     "excluded_pos", "excluded_neg"):
            if getattr(self, name).size != n:
                raise ValidationError(f"{name} length disagrees with radii",
                                      module="entire_diagnostics",
                                      operation="GrowthEstimate")
        if not (math.isfinite(self.sigma_hat) and math.isfinite(self.mu_hat)):
            raise ValidationError("growth exponents must be finite",
                                  module="entire_diagnostics",
                                  operation="GrowthEstimate")


def growth_profile(kernel: SampledSignal, radii) -> GrowthEstimate:
    """Evaluate log|Phi(+/-R)|/R on the given radii, estimate sigma and mu.

    The kernel must be compactly supported inside [0, 1]: that pins
    0 <= mu <= sigma <= 1 and makes the two tail maxima direct estimates of
    the support edges.
    """
    _require_compact(kernel, "growth_profile")
    t = kernel.grid()
    support = t[np.abs(kernel.values) > 0.0]
    if support.size == 0:
        raise ValidationError("kernel is identically zero",
                              module="entire_diagnostics", operation="growth_profile")
    if support[0] < -1e-9 or support[-1] > 1.0 + 1e-9:
        raise ValidationError("kernel support must lie within [0, 1]",
                              module="entire_diagnostics", operation="growth_profile")
    r = np.asarray(radii, dtype=np.float64)
    if r.ndim != 1 or r.size < 3 or np.any(np.diff(r) <= 0.0) or r[0] <= 0.0:
        raise ValidationError("radii must be at least 3 increasing positives",
                              module="entire_diagnostics", operation="growth_profile")

    log_pos = _log_abs_transform(kernel, r.astype(np.complex128))
    log_neg = _log_abs_transform(kernel, (-r).astype(np.complex128))
    ratio_pos = log_pos / r
    ratio_neg = log_neg / r
    excluded_pos = ~np.isfinite(ratio_pos)
    excluded_neg = ~np.isfinite(ratio_neg)

    tail = slice(2 * r.size // 3, r.size)

    def tail_max(ratios, excluded, which):
        vals = ratios[tail][~excluded[tail]]
        if vals.size == 0:
            raise ComputationError(f"every {which}-axis radius in the tail "
                                   "window sits on a near-zero of the transform",
                                   module="entire_diagnostics",
                                   operation="growth_profile")
        return float(np.max(vals))

    sigma_hat = tail_max(ratio_pos, excluded_pos, "positive")
    mu_hat = -tail_max(ratio_neg, excluded_neg, "negative")
    return GrowthEstimate(r, ratio_pos, ratio_neg, sigma_hat, mu_hat,
                          excluded_pos, excluded_neg)


def _winding_attempt(kernel: SampledSignal, r: float, n: int):
    """One argument-principle pass: (winding, max wrapped phase step)."""
    theta = 2.0 * math.pi * np.arange(n) / n
    zs = r * np.exp(1j * theta)
    log_scale, reduced = laplace_parts(kernel, zs)
    mag = np.abs(reduced)
    if np.min(mag) == 0.0:
        return None  # dead sample: treat as contour-on-zero, caller nudges
    log_abs = log_scale + np.log(mag)
    # a sample sitting on a zero collapses relative to its neighbors; the
    # contour-wide max is useless here, |Phi| spans hundreds of e-folds
    # around one circle when r is large
    neighbor = np.maximum(np.roll(log_abs, 1), np.roll(log_abs, -1))
    if np.min(log_abs - neighbor) < math.log(_CONTOUR_ZERO_REL):
        return None
    ratio = reduced * np.conj(np.roll(reduced, 1))
    steps = np.angle(ratio)  # wrapped increment from each sample's predecessor
    return float(np.sum(steps) / (2.0 * math.pi)), float(np.max(np.abs(steps)))


def count_zeros(kernel: SampledSignal, r: float, contour_points: int) -> int:
    """Zeros of the transform inside |z| <= r by contour phase tracking.

    The winding number of Phi around the circle equals the enclosed zero
    count.  A contour sample landing on a near-zero (|Phi| under 1e-13 of
    the contour max) nudges the radius outward by 0.37 * (2 pi / N) * r and
    retries; a wrapped phase step above pi/2, or a winding off an integer by
    more than 0.02, retries once at 4x the points and then fails hard.
    """
    _require_compact(kernel, "count_zeros")
    if not (r > 0.0 and np.isfinite(r)):
        raise ValidationError("r must be positive and finite",
                              module="entire_diagnostics", operation="count_zeros")
    if contour_points < 64 * r:
        raise ValidationError("need contour_points >= 64 * r to resolve "
                              "the phase", module="entire_diagnostics",
                              operation="count_zeros")

    for points in (int(contour_points), 4 * int(contour_points)):
        radius = r
        attempt = _winding_attempt(kernel, radius, points)
        nudges = 0
        while attempt is None:
            nudges += 1
            if nudges > _MAX_NUDGES:
                raise ComputationError("contour keeps landing on zeros after "
                                       f"{_MAX_NUDGES} radius nudges",
                                       module="entire_diagnostics",
                                       operation="count_zeros")
            radius += _NUDGE_FACTOR * (2.0 * math.pi / points) * r
            attempt = _winding_attempt(kernel, radius, points)
        winding, max_step = attempt
        nearest = round(winding)
        if max_step <= math.pi / 2.0 and abs(winding - nearest) <= 0.02:
            if nearest < 0:
                raise ComputationError("negative winding for an entire "
                                       "function: evaluation is unreliable",
                                       module="entire_diagnostics",
                                       operation="count_zeros")
            return int(nearest)

    raise PhaseTrackingError(
        f"phase tracking failed at radius {r}: step {max_step:.3f} rad, "
        f"winding {winding:.4f} (4x refinement exhausted)",
        module="entire_diagnostics", operation="count_zeros")


@dataclass(frozen=True)
class ZeroCountReport:
    """Zero counts along radii, the fitted density, and the growth cross-check."""

    radii: np.ndarray
    counts: np.ndarray
    densities: np.ndarray
    d_hat: float
    predicted_d: float  # sigma_hat - mu_hat, nan when growth_profile refuses

    def __post_init__(self):
        if not (self.radii.size == self.counts.size == self.densities.size):
            raise ValidationError("report arrays must share one length",
                                  module="entire_diagnostics",
                                  operation="ZeroCountReport")
        if np.any(np.diff(self.counts) < 0):
            raise ValidationError("zero counts must be nondecreasing in r",
                                  module="entire_diagnostics",
                                  operation="ZeroCountReport")


def zero_density(kernel: SampledSignal, radii,
                 points_per_radius: int = 64) -> ZeroCountReport:
    """n(R)/R table with d_hat = pi * final density.

    Each radius gets ceil(points_per_radius * R) contour samples (floor 64
    per the phase-resolution requirement).  The growth-profile prediction
    sigma_hat - mu_hat rides along when the kernel qualifies for it.
    """
    r = np.asarray(radii, dtype=np.float64)
    if r.ndim != 1 or r.size < 2 or np.any(np.diff(r) <= 0.0) or r[0] <= 0.0:
        raise ValidationError("radii must be at least 2 increasing positives",
                              module="entire_diagnostics", operation="zero_density")
    if points_per_radius < 64:
        raise ValidationError("points_per_radius must be at least 64",
                              module="entire_diagnostics", operation="zero_density")
    counts = np.array([count_zeros(kernel, float(rr),
                                   int(math.ceil(points_per_radius * rr)))
                       for rr in r], dtype=np.int64)
    densities = counts / r
    d_hat = math.pi * float(densities[-1])
    try:
        growth = growth_profile(kernel, r)
        predicted = growth.sigma_hat - growth.mu_hat
    except (ValidationError, ComputationError):
        predicted = math.nan
    return ZeroCountReport(r, counts, densities, d_hat, predicted)
