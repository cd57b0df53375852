"""Tikhonov deconvolution pipeline: parameter selection, filter, error budget.

Given a noise level eps the plan fixes every knob of the reconstruction:

  delta   = (C1/C2)^{1/4} * eps^{(1+3*beta)/2}, the filter damping,
            with C1 = 4(1 + |g0|_2^2 + |phi0|_1^2) and C2 = 1 + |g0|_2^2;
  s_eps   = the kernel tail cutoff at level eps;
  R_eps   = the root of
            [(q+1/2) log R + log(15 e^3)] [log |phi0|_1 + 2 e s_eps R]
              = -log(eps^beta + eps),
            the frequency radius that splits the error budget.

The squared reconstruction error is then certified against three terms: the
spectral mass of the unknown where the kernel transform is small, split at
|lambda| = R_eps, plus a data term 2 sqrt(C1 C2) eps^{1-3 beta}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ComputationError, NoRootError, SaturationError, ValidationError
from .grid_signal import (SampledSignal, TransformSamples, fourier_at,
                          fourier_grid, inverse_fourier, l2_norm,
                          trapezoid_weights)
from .noise import inject_noise
from .tail_profile import TailProfile, tail_cutoff

LOG_15E3 = math.log(15.0) + 3.0
TWO_E = 2.0 * math.e


def _check_hypotheses(eps: float, beta: float, q: float, operation: str) -> None:
    if not (eps > 0.0 and np.isfinite(eps)):
        raise ValidationError("eps must be positive and finite",
                              module="regularization", operation=operation)
    if not (0.0 < beta < 1.0 / 3.0):
        raise ValidationError("beta must lie strictly inside (0, 1/3)",
                              module="regularization", operation=operation)
    if not (q > 0.5):
        raise ValidationError("q must exceed 1/2",
                              module="regularization", operation=operation)


def solve_frequency_radius(eps: float, beta: float, q: float, s_eps: float,
                           phi0_l1: float) -> float:
    """Unique root of the radius equation on the branch where both bracket
    factors are positive.

    F(R) = [(q+1/2) log R + log(15e^3)] [log phi0_l1 + 2e s_eps R] + log(eps^beta + eps)
    is a product of two positive increasing factors plus a negative constant
    there, so the root is bracketed by doubling and pinned by bisection to
    relative 1e-12.
    """
    _check_hypotheses(eps, beta, q, "solve_frequency_radius")
    if s_eps < 0.0:
        raise ValidationError("s_eps must be nonnegative",
                              module="regularization", operation="solve_frequency_radius")
    if not (phi0_l1 > 0.0):
        raise ValidationError("phi0_l1 must be positive",
                              module="regularization", operation="solve_frequency_radius")
    rhs = math.log(eps ** beta + eps)
    if rhs >= 0.0:
        raise NoRootError("eps too large: -log(eps^beta + eps) must be positive",
                          module="regularization", operation="solve_frequency_radius")
    log_l1 = math.log(phi0_l1)
    if s_eps == 0.0 and log_l1 <= 0.0:
        # the second bracket is a nonpositive constant; F never crosses zero
        raise NoRootError("degenerate instance: s_eps = 0 with log |phi0|_1 <= 0",
                          module="regularization", operation="solve_frequency_radius")

    def f(r: float) -> float:
        return (((q + 0.5) * math.log(r) + LOG_15E3)
                * (log_l1 + TWO_E * s_eps * r) + rhs)

    lo = math.exp(-LOG_15E3 / (q + 0.5))  # first bracket vanishes here
    if s_eps > 0.0 and log_l1 < 0.0:
        lo = max(lo, -log_l1 / (TWO_E * s_eps))  # second bracket vanishes here
    lo *= 1.0 + 1e-12
    hi = max(2.0 * lo, 1.0)
    prev = f(lo)
    if prev >= 0.0:
        raise ComputationError("radius equation not negative at the domain edge",
                               module="regularization", operation="solve_frequency_radius")
    while f(hi) <= 0.0:
        cur = f(hi)
        if cur < prev:
            raise ComputationError("radius equation lost monotonicity",
                                   module="regularization", operation="solve_frequency_radius")
        prev = cur
        hi *= 2.0
        if hi > 1e300:
            raise NoRootError("radius equation has no finite root",
                              module="regularization", operation="solve_frequency_radius")
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class RegularizationPlan:
    """All parameters of one reconstruction, self-checking on construction."""

    eps: float
    beta: float
    q: float
    c1: float
    c2: float
    delta: float
    s_eps: float
    r_eps: float

    def __post_init__(self):
        _check_hypotheses(self.eps, self.beta, self.q, "RegularizationPlan")
        if not (self.c1 > self.c2 > 1.0):
            raise ValidationError("need c1 > c2 > 1 (positive norms)",
                                  module="regularization", operation="RegularizationPlan")
        if self.c1 / 4.0 - self.c2 <= 0.0:
            raise ValidationError("c1 and c2 are inconsistent: no positive "
                                  "kernel mass solves c1 = 4(1+g^2+phi^2)",
                                  module="regularization", operation="RegularizationPlan")
        want = (self.c1 / self.c2) ** 0.25 * self.eps ** ((1.0 + 3.0 * self.beta) / 2.0)
        if not math.isclose(self.delta, want, rel_tol=1e-12, abs_tol=0.0):
            raise ValidationError("delta does not match its defining formula",
                                  module="regularization", operation="RegularizationPlan")
        if self.s_eps < 0.0 or not self.r_eps > 0.0:
            raise ValidationError("s_eps must be >= 0 and r_eps > 0",
                                  module="regularization", operation="RegularizationPlan")
        phi0_l1 = math.sqrt(self.c1 / 4.0 - self.c2)
        rhs = math.log(self.eps ** self.beta + self.eps)
        residual = (((self.q + 0.5) * math.log(self.r_eps) + LOG_15E3)
                    * (math.log(phi0_l1) + TWO_E * self.s_eps * self.r_eps) + rhs)
        if abs(residual) > 1e-10 * abs(rhs):
            raise ValidationError("r_eps does not satisfy the radius equation",
                                  module="regularization", operation="RegularizationPlan")

    @property
    def phi0_l1(self) -> float:
        return math.sqrt(self.c1 / 4.0 - self.c2)

    @property
    def rate_ref(self) -> float:
        """Reference decay R_eps^{-q+1/2} for the convergence-rate fit."""
        return self.r_eps ** (-self.q + 0.5)


def make_plan(eps: float, beta: float, q: float, g0_l2: float, phi0_l1: float,
              profile: TailProfile) -> RegularizationPlan:
    _check_hypotheses(eps, beta, q, "make_plan")
    if not (g0_l2 > 0.0 and phi0_l1 > 0.0):
        raise ValidationError("norms must be positive",
                              module="regularization", operation="make_plan")
    s_eps, saturated = tail_cutoff(profile, eps)
    if saturated:
        raise SaturationError("eps is below the kernel's measurable tail floor",
                              module="regularization", operation="make_plan")
    r_eps = solve_frequency_radius(eps, beta, q, s_eps, phi0_l1)
    c1 = 4.0 * (1.0 + g0_l2 ** 2 + phi0_l1 ** 2)
    c2 = 1.0 + g0_l2 ** 2
    delta = (c1 / c2) ** 0.25 * eps ** ((1.0 + 3.0 * beta) / 2.0)
    return RegularizationPlan(eps, beta, q, c1, c2, delta, s_eps, r_eps)


def tikhonov_filter(g_hat: TransformSamples, phi_hat: TransformSamples,
                    delta: float) -> TransformSamples:
    """Pointwise g_hat * conj(phi_hat) / (delta + |phi_hat|^2).

    delta > 0 rules out division by zero, and the AM-GM bound
    |result| <= |g_hat| / (2 sqrt(delta)) holds pointwise.
    """
    if not (delta > 0.0):
        raise ValidationError("delta must be positive",
                              module="regularization", operation="tikhonov_filter")
    if not np.array_equal(g_hat.frequencies, phi_hat.frequencies):
        raise ValidationError("transforms live on different frequency grids",
                              module="regularization", operation="tikhonov_filter")
    p = phi_hat.values
    mag2 = p.real ** 2 + p.imag ** 2
    return TransformSamples(g_hat.frequencies,
                            g_hat.values * np.conj(p) / (delta + mag2))


@dataclass(frozen=True)
class FrequencyGridSpec:
    """Symmetric uniform grid spacing * (-half_count .. half_count)."""

    spacing: float
    half_count: int

    def __post_init__(self):
        if not (self.spacing > 0.0 and self.half_count >= 1):
            raise ValidationError("need spacing > 0 and half_count >= 1",
                                  module="regularization", operation="FrequencyGridSpec")

    @property
    def extent(self) -> float:
        return self.spacing * self.half_count

    def array(self) -> np.ndarray:
        return self.spacing * np.arange(-self.half_count, self.half_count + 1,
                                        dtype=np.float64)


def deconvolve(g_eps: SampledSignal, phi_eps: SampledSignal,
               plan: RegularizationPlan, grid: FrequencyGridSpec) -> SampledSignal:
    """Full reconstruction: transform, filter, invert onto the data grid."""
    if grid.extent < plan.r_eps:
        raise ValidationError("frequency grid does not reach r_eps",
                              module="regularization", operation="deconvolve")
    g_hat = fourier_grid(g_eps, grid.spacing, grid.half_count)
    phi_hat = fourier_grid(phi_eps, grid.spacing, grid.half_count)
    f_hat = tikhonov_filter(g_hat, phi_hat, plan.delta)
    return inverse_fourier(f_hat, g_eps.t_min, g_eps.spacing, g_eps.size)


@dataclass(frozen=True)
class ErrorDecomposition:
    """The three-term certificate for the squared L2 reconstruction error."""

    outer_term: float
    inner_term: float
    data_term: float
    total_bound: float
    achieved_sq_error: float
    coverage_flag: bool

    def __post_init__(self):
        if min(self.outer_term, self.inner_term, self.data_term) < 0.0:
            raise ValidationError("decomposition terms must be nonnegative",
                                  module="regularization", operation="ErrorDecomposition")
        want = 3.0 * (self.outer_term + self.inner_term + self.data_term)
        if not math.isclose(self.total_bound, want, rel_tol=1e-12, abs_tol=1e-300):
            raise ValidationError("total_bound must be 3x the term sum",
                                  module="regularization", operation="ErrorDecomposition")
        if self.achieved_sq_error > self.total_bound + 1e-6:
            raise ValidationError("achieved squared error exceeds its certificate",
                                  module="regularization", operation="ErrorDecomposition")


def error_decomposition(f0_hat: TransformSamples, phi0_hat: TransformSamples,
                        plan: RegularizationPlan,
                        achieved_sq: float) -> ErrorDecomposition:
    """Evaluate the three terms on the sampled grid.

    outer / inner: trapezoid of |f0_hat|^2 over the sub-threshold set
    {|phi0_hat| < eps^beta}, outside / inside |lambda| = r_eps.  The
    coverage flag reports when a power-law extrapolation of |f0_hat|^2
    suggests the grid misses more than 1% of the outer integral.
    """
    if not np.array_equal(f0_hat.frequencies, phi0_hat.frequencies):
        raise ValidationError("transforms live on different frequency grids",
                              module="regularization", operation="error_decomposition")
    lam = f0_hat.frequencies
    if lam[0] > -plan.r_eps or lam[-1] < plan.r_eps:
        raise ValidationError("frequency grid does not cover |lambda| <= r_eps",
                              module="regularization", operation="error_decomposition")
    d = np.diff(lam)
    w = np.zeros(lam.size)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    f2 = f0_hat.values.real ** 2 + f0_hat.values.imag ** 2
    threshold = plan.eps ** plan.beta
    below = np.abs(phi0_hat.values) < threshold
    outer = float(np.sum((w * f2)[below & (np.abs(lam) > plan.r_eps)]))
    inner = float(np.sum((w * f2)[below & (np.abs(lam) < plan.r_eps)]))
    data = 2.0 * math.sqrt(plan.c1 * plan.c2) * plan.eps ** (1.0 - 3.0 * plan.beta)
    total = 3.0 * (outer + inner + data)

    coverage = _coverage_flag(lam, f2, np.abs(phi0_hat.values), threshold, outer)
    return ErrorDecomposition(outer, inner, data, total, achieved_sq, coverage)


def _coverage_flag(lam, f2, phi_mag, threshold, outer) -> bool:
    """Estimate the outer mass beyond the grid by a power-law tail fit."""
    half = lam.size // 2
    top = slice(lam.size - max(8, lam.size // 10), lam.size)
    x = lam[top]
    y = f2[top]
    if np.any(y <= 0.0) or x[0] <= 0.0:
        return True  # cannot extrapolate: assume coverage unproven
    slope = float(np.polyfit(np.log(x), np.log(y), 1)[0])
    if slope >= -1.0:
        return True  # tail not integrable by this estimate
    alpha = -slope
    tail = 2.0 * float(y[-1]) * float(x[-1]) / (alpha - 1.0)  # both half lines
    if outer > 0.0:
        return bool(tail > 0.01 * outer)
    # nothing sub-threshold on the grid: suspicious only if the kernel
    # transform was already heading under the threshold at the edge
    edge = slice(lam.size - max(4, lam.size // 100), lam.size)
    return bool(np.min(phi_mag[edge]) < 2.0 * threshold)


def smooth_spectrum(lambdas, q: float) -> np.ndarray:
    """Synthetic unknown: f0_hat = (1 + lambda^2)^{-q/2 - 0.26}.

    Squaring gives (1+lambda^2)^{-q-0.52}, strictly inside the smoothness
    class |f0_hat|^2 <= C (1+lambda^2)^{-q}; the margin 0.26 keeps f0 in L2.
    The class constant C here is 1 and is unrelated to the plan's c1.
    """
    lam = np.asarray(lambdas, dtype=np.float64)
    return (1.0 + lam * lam) ** (-(q / 2.0) - 0.26)


@dataclass(frozen=True)
class SweepInstance:
    """A fully specified synthetic experiment, minus the noise level."""

    name: str
    kernel: SampledSignal
    profile: TailProfile
    q: float
    beta: float
    t_extent: float
    t_step: float
    freq_step: float
    freq_extent_factor: float
    base_seed: int
    f0_signal: SampledSignal = None  # optional measured unknown; else synthetic

    def time_grid(self) -> tuple[float, float, int]:
        count = 2 * int(round(self.t_extent / self.t_step)) + 1
        return -self.t_extent, self.t_step, count


@dataclass(frozen=True)
class RunResult:
    plan: RegularizationPlan
    grid: FrequencyGridSpec
    f0_hat: TransformSamples
    phi0_hat: TransformSamples
    f0: SampledSignal
    g0: SampledSignal
    phi_eps: SampledSignal
    g_eps: SampledSignal
    f_eps: SampledSignal
    achieved_error: float
    decomposition: ErrorDecomposition


def run_single(instance: SweepInstance, eps: float, seed: int = None,
               noise_free: bool = False) -> RunResult:
    """One pipeline pass at a single noise level.

    The radius is solved before anything else because the frequency grid
    extent is a multiple of r_eps; the plan is then rebuilt through
    make_plan once |g0|_2 exists (same inputs, same radius).
    """
    phi0 = instance.kernel
    phi0_l1 = instance.profile.l1_total
    s_eps, saturated = tail_cutoff(instance.profile, eps)
    if saturated:
        raise SaturationError("eps is below the kernel's measurable tail floor",
                              module="regularization", operation="run_single")
    r_eps = solve_frequency_radius(eps, instance.beta, instance.q, s_eps, phi0_l1)
    half = int(math.ceil(instance.freq_extent_factor * r_eps / instance.freq_step))
    grid = FrequencyGridSpec(instance.freq_step, half)
    lam = grid.array()

    if instance.f0_signal is not None:
        f0_hat_vals = fourier_at(instance.f0_signal, lam)
    else:
        f0_hat_vals = smooth_spectrum(lam, instance.q).astype(np.complex128)
    f0_hat = TransformSamples(lam, f0_hat_vals)
    phi0_hat = TransformSamples(lam, fourier_at(phi0, lam))

    t_min, t_step, t_count = instance.time_grid()
    f0 = inverse_fourier(f0_hat, t_min, t_step, t_count)
    g0 = inverse_fourier(TransformSamples(lam, f0_hat.values * phi0_hat.values),
                         t_min, t_step, t_count)

    plan = make_plan(eps, instance.beta, instance.q, l2_norm(g0), phi0_l1,
                     instance.profile)
    if seed is None:
        seed = instance.base_seed
    phi_eps, g_eps = inject_noise(phi0, g0, 0.0 if noise_free else eps, seed)
    f_eps = deconvolve(g_eps, phi_eps, plan, grid)

    diff = SampledSignal(t_min, t_step, f0.values - f_eps.values)
    achieved = l2_norm(diff)
    decomposition = error_decomposition(f0_hat, phi0_hat, plan, achieved ** 2)
    return RunResult(plan, grid, f0_hat, phi0_hat, f0, g0, phi_eps, g_eps,
                     f_eps, achieved, decomposition)


@dataclass(frozen=True)
class SweepRecord:
    eps: float
    s_eps: float
    delta: float
    r_eps: float
    achieved_error: float
    bound: float
    rate_ref: float

    @property
    def c3_row(self) -> float:
        return self.achieved_error / self.rate_ref


@dataclass(frozen=True)
class SweepResult:
    records: tuple
    failures: tuple  # (eps, reason) pairs
    c3_fit: float
    c3_stability: float
    logr_over_loglog: float
    inversions: int
    bound_violations: int
    invalid: bool


def run_sweep(instance: SweepInstance, eps_list) -> SweepResult:
    """Decreasing-eps sweep; a failed row is recorded and the sweep goes on.

    c3_fit is the max of achieved/rate_ref over rows; its stability is the
    max/min ratio over the last half of the successful rows.
    """
    eps_arr = [float(e) for e in eps_list]
    if len(eps_arr) < 2 or any(b >= a for a, b in zip(eps_arr, eps_arr[1:])):
        raise ValidationError("eps_list must be strictly decreasing",
                              module="regularization", operation="run_sweep")
    records = []
    failures = []
    for idx, eps in enumerate(eps_arr):
        try:
            res = run_single(instance, eps, seed=instance.base_seed + idx)
        except (ComputationError, ValidationError) as exc:
            failures.append((eps, str(exc)))
            continue
        records.append(SweepRecord(eps, res.plan.s_eps, res.plan.delta,
                                   res.plan.r_eps, res.achieved_error,
                                   math.sqrt(res.decomposition.total_bound),
                                   res.plan.rate_ref))
    invalid = len(failures) > 0.25 * len(eps_arr)
    if not records:
        return SweepResult((), tuple(failures), math.nan, math.nan, math.nan,
                           0, 0, True)
    c3_rows = [r.c3_row for r in records]
    tail = c3_rows[len(c3_rows) // 2:]
    stability = max(tail) / min(tail) if min(tail) > 0.0 else math.inf
    last = records[-1]
    logr = math.log(last.r_eps) / math.log(math.log(1.0 / last.eps))
    achieved = [r.achieved_error for r in records]
    inversions = sum(1 for a, b in zip(achieved, achieved[1:])
                     if b > a * (1.0 + 1e-12))
    violations = sum(1 for r in records
                     if r.achieved_error > r.bound * (1.0 + 1e-9) + 1e-9)
    return SweepResult(tuple(records), tuple(failures), max(c3_rows),
                       stability, logr, inversions, violations, invalid)
