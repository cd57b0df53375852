"""Command bodies behind the CLI: compute, persist reports, record a manifest.

Every command writes its files atomically into the output directory and
finishes with a manifest.json naming them.  All numeric CSV fields use 17
significant digits, so identical (config, seed) pairs reproduce identical
bytes; the manifest's wall_clock_seconds block is the one intentionally
non-reproducible record.
"""

from __future__ import annotations

import json
import math
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .config import ExperimentConfig, build_instance, build_kernel, config_echo
from .entire_diagnostics import growth_profile, zero_density
from .errors import AcceptanceGateError, ConfigError
from .fileio import atomic_write_text, format_float
from .grid_signal import fourier_at, write_signal_csv
from .kernels import default_profile_grid
from .regularization import (ErrorDecomposition, RegularizationPlan,
                             run_single, run_sweep, solve_frequency_radius)
from .small_sets import cartan_bound, measure_small_set
from .tail_profile import (detect_superlinear, tail_cutoff, tail_mass_profile,
                           write_dual_csv, write_profile_csv, young_dual)

DUAL_GRID_STEP = 0.01
DUAL_GRID_MAX = 64.0
ZERO_RADII = (20.0, 40.0, 60.0, 80.0, 100.0)
GROWTH_RADII_COUNT = 40
GROWTH_RADII_MAX = 400.0


def _clean(obj):
    """JSON-safe copy: non-finite floats become null."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _write_json(path: str, obj) -> None:
    atomic_write_text(path, json.dumps(_clean(obj), indent=2, sort_keys=True)
                      + "\n")


def _write_csv(path: str, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(format_float(x) for x in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")


class _Manifest:
    """Collects outputs and stage timings; written last."""

    def __init__(self, command: str, config: ExperimentConfig, out_dir: str):
        self.command = command
        self.config = config
        self.out_dir = out_dir
        self.outputs = {}
        self.timings = {}
        self.notes = []
        self._t0 = time.perf_counter()
        os.makedirs(out_dir, exist_ok=True)

    def stage(self, name: str) -> None:
        now = time.perf_counter()
        self.timings[name] = now - self._t0
        self._t0 = now

    def path(self, key: str, basename: str) -> str:
        self.outputs[key] = basename
        return os.path.join(self.out_dir, basename)

    def write(self) -> dict:
        data = {
            "command": self.command,
            "config": config_echo(self.config),
            "outputs": self.outputs,
            "versions": {
                "deconv": __version__,
                "numpy": np.__version__,
                "python": ".".join(str(v) for v in sys.version_info[:3]),
            },
            "wall_clock_seconds": self.timings,
        }
        if self.notes:
            data["notes"] = self.notes
        _write_json(os.path.join(self.out_dir, "manifest.json"), data)
        return data


def _plan_dict(plan: RegularizationPlan) -> dict:
    return {"eps": plan.eps, "beta": plan.beta, "q": plan.q, "c1": plan.c1,
            "c2": plan.c2, "delta": plan.delta, "s_eps": plan.s_eps,
            "r_eps": plan.r_eps}


def _decomposition_dict(d: ErrorDecomposition) -> dict:
    return {"outer_term": d.outer_term, "inner_term": d.inner_term,
            "data_term": d.data_term, "total_bound": d.total_bound,
            "achieved_sq_error": d.achieved_sq_error,
            "coverage_flag": d.coverage_flag}


def _support_in_unit_interval(kernel) -> bool:
    if kernel.truncation_tail != 0.0:
        return False
    t = kernel.grid()
    support = t[np.abs(kernel.values) > 0.0]
    return (support.size > 0 and support[0] >= -1e-9
            and support[-1] <= 1.0 + 1e-9)


def _emit_zero_reports(kernel, manifest: _Manifest) -> None:
    report = zero_density(kernel, np.array(ZERO_RADII))
    _write_csv(manifest.path("zeros_csv", "zeros.csv"), "R,n,density",
               zip(report.radii, report.counts, report.densities))
    try:
        growth = growth_profile(
            kernel, np.linspace(10.0, GROWTH_RADII_MAX, GROWTH_RADII_COUNT))
        sigma_hat, mu_hat = growth.sigma_hat, growth.mu_hat
    except Exception:
        sigma_hat = mu_hat = math.nan
    _write_json(manifest.path("zeros_json", "zeros.json"),
                {"sigma_hat": sigma_hat, "mu_hat": mu_hat,
                 "d_hat": report.d_hat, "predicted_d": report.predicted_d})


def cmd_analyze_kernel(config: ExperimentConfig, out_dir: str) -> dict:
    """Tail profile, Young dual, superlinearity verdict; growth and zero
    reports when the kernel is compactly supported inside [0, 1]."""
    manifest = _Manifest("analyze-kernel", config, out_dir)
    kernel = build_kernel(config)
    profile = tail_mass_profile(kernel, default_profile_grid(kernel))
    dual = young_dual(profile,
                      np.arange(0.0, DUAL_GRID_MAX + 0.5 * DUAL_GRID_STEP,
                                DUAL_GRID_STEP))
    detector = detect_superlinear(profile)
    manifest.stage("compute")

    write_profile_csv(manifest.path("profile_csv", "profile.csv"), profile)
    write_dual_csv(manifest.path("dual_csv", "dual.csv"), dual)
    _write_json(manifest.path("detector_json", "detector.json"),
                {"superlinear": detector.verdict,
                 "decade_ratio": detector.decade_ratio,
                 "strictly_increasing": detector.strictly_increasing})
    if _support_in_unit_interval(kernel):
        _emit_zero_reports(kernel, manifest)
    else:
        manifest.notes.append("growth/zero reports skipped: kernel support "
                              "is not inside [0, 1]")
    manifest.stage("write")
    return manifest.write()


def cmd_deconvolve(config: ExperimentConfig, out_dir: str, eps: float = None,
                   noise_free: bool = False) -> dict:
    """One reconstruction at a single eps (default: first of eps_list)."""
    manifest = _Manifest("deconvolve", config, out_dir)
    instance = build_instance(config)
    if eps is None:
        eps = config.eps_list[0]
    result = run_single(instance, float(eps), seed=config.seed,
                        noise_free=noise_free)
    manifest.stage("compute")

    plan = _plan_dict(result.plan)
    plan["noise_free"] = noise_free
    plan["achieved_error"] = result.achieved_error
    _write_json(manifest.path("plan_json", "plan.json"), plan)
    write_signal_csv(manifest.path("reconstruction_csv", "reconstruction.csv"),
                     result.f_eps)
    _write_json(manifest.path("decomposition_json", "decomposition.json"),
                _decomposition_dict(result.decomposition))
    manifest.stage("write")
    return manifest.write()


SWEEP_HEADER = "eps,s_eps,delta,r_eps,achieved_error,bound,rate_ref,c3_row"


def cmd_sweep(config: ExperimentConfig, out_dir: str) -> dict:
    """Noise-level sweep; exit status reflects the acceptance gates.

    All files are written before any gate failure is raised, so a failing
    sweep still leaves its full evidence on disk.
    """
    if len(config.eps_list) < 4:
        raise ConfigError("sweep needs an eps_list of at least 4 levels",
                          module="commands", operation="cmd_sweep")
    manifest = _Manifest("sweep", config, out_dir)
    instance = build_instance(config)
    sweep = run_sweep(instance, config.eps_list)
    manifest.stage("compute")

    _write_csv(manifest.path("sweep_csv", "sweep.csv"), SWEEP_HEADER,
               ((r.eps, r.s_eps, r.delta, r.r_eps, r.achieved_error, r.bound,
                 r.rate_ref, r.c3_row) for r in sweep.records))
    gates = {
        "stability_ok": sweep.c3_stability <= 10.0,
        "inversions_ok": sweep.inversions <= 1,
        "bounds_ok": sweep.bound_violations == 0,
        "asymptotic_radius_ok": abs(sweep.logr_over_loglog - 1.0) <= 0.15,
        "valid": not sweep.invalid,
    }
    summary = {
        "c3_fit": sweep.c3_fit,
        "c3_stability": sweep.c3_stability,
        "logR_over_loglog": sweep.logr_over_loglog,
        "inversions": sweep.inversions,
        "bound_violations": sweep.bound_violations,
        "invalid": sweep.invalid,
        "failures": [{"eps": e, "reason": r} for e, r in sweep.failures],
        "gates": gates,
    }
    _write_json(manifest.path("summary_json", "summary.json"), summary)
    manifest.stage("write")
    manifest.write()
    failed = sorted(name for name, ok in gates.items() if not ok)
    if failed:
        raise AcceptanceGateError(f"sweep gates failed: {', '.join(failed)}",
                                  module="commands", operation="cmd_sweep")
    return summary


def cmd_smallset(config: ExperimentConfig, out_dir: str,
                 eps: float = None) -> dict:
    """Measure the sub-threshold frequency set at one eps."""
    manifest = _Manifest("smallset", config, out_dir)
    kernel = build_kernel(config)
    profile = tail_mass_profile(kernel, default_profile_grid(kernel))
    if eps is None:
        eps = config.eps_list[0]
    eps = float(eps)
    s_eps, saturated = tail_cutoff(profile, eps)
    if saturated:
        raise ConfigError("eps is below the kernel's measurable tail floor",
                          module="commands", operation="cmd_smallset")
    r_eps = solve_frequency_radius(eps, config.beta, config.q, s_eps,
                                   profile.l1_total)
    report = measure_small_set(lambda lam: fourier_at(kernel, lam),
                               eps ** config.beta, r_eps, r_eps / 2e4)
    report = replace(report, eps=eps, bound=cartan_bound(config.q, r_eps))
    manifest.stage("compute")

    _write_json(manifest.path("smallset_json", "smallset.json"),
                report.as_dict())
    manifest.stage("write")
    return manifest.write()


def cmd_zeros(config: ExperimentConfig, out_dir: str) -> dict:
    """Zero-count table; compact-support kernels only."""
    manifest = _Manifest("zeros", config, out_dir)
    kernel = build_kernel(config)
    if kernel.truncation_tail != 0.0:
        raise ConfigError("zeros requires a compact-support kernel: the "
                          "transform is entire only then",
                          module="commands", operation="cmd_zeros")
    _emit_zero_reports(kernel, manifest)
    manifest.stage("compute_and_write")
    return manifest.write()
