"""Command line entry point.

Thread caps must land in the environment before numpy first loads, so this
module imports nothing numerical at top level; everything heavy is pulled
in inside main() after the caps are set.

Exit codes: 0 success, 2 configuration/validation error, 3 computation
failure, 4 sweep acceptance-gate failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS")


def _cap_threads() -> None:
    cap = os.environ.get("DECONV_THREADS", "").strip()
    if cap:
        for var in _THREAD_VARS:
            os.environ.setdefault(var, cap)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deconv",
        description="Tikhonov deconvolution experiments: tail profiles, "
                    "error-bound verification, small-set measurement, and "
                    "zero counting on synthetic kernels.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, eps_flag=False, noise_flag=False):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True,
                         help="experiment config JSON")
        cmd.add_argument("--out", required=True, help="output directory")
        if eps_flag:
            cmd.add_argument("--eps", type=float, default=None,
                             help="noise level (default: first of eps_list)")
        if noise_flag:
            cmd.add_argument("--noise-free", action="store_true",
                             help="skip perturbation; eps still sets the "
                                  "filter parameters")
        return cmd

    add("analyze-kernel", "tail profile, Young dual, growth and zero reports")
    add("deconvolve", "single reconstruction with error decomposition",
        eps_flag=True, noise_flag=True)
    add("sweep", "noise-level sweep with convergence-rate summary")
    add("smallset", "measure the sub-threshold frequency set", eps_flag=True)
    add("zeros", "zero counts of the kernel transform")
    return parser


def main(argv=None) -> int:
    _cap_threads()
    args = _build_parser().parse_args(argv)

    from .commands import (cmd_analyze_kernel, cmd_deconvolve, cmd_smallset,
                           cmd_sweep, cmd_zeros)
    from .config import load_config
    from .errors import AcceptanceGateError, ConfigError, DeconvError
    from .fileio import atomic_write_text

    def run() -> int:
        config = load_config(args.config)
        if args.command == "analyze-kernel":
            cmd_analyze_kernel(config, args.out)
        elif args.command == "deconvolve":
            cmd_deconvolve(config, args.out, eps=args.eps,
                           noise_free=args.noise_free)
        elif args.command == "sweep":
            cmd_sweep(config, args.out)
        elif args.command == "smallset":
            cmd_smallset(config, args.out, eps=args.eps)
        else:
            cmd_zeros(config, args.out)
        return 0

    try:
        return run()
    except DeconvError as exc:
        if isinstance(exc, ConfigError):
            code = 2
        elif isinstance(exc, AcceptanceGateError):
            code = 4
        else:
            code = 3
        payload = {"error": type(exc).__name__, "module": exc.module,
                   "operation": exc.operation, "message": str(exc)}
        try:
            os.makedirs(args.out, exist_ok=True)
            atomic_write_text(os.path.join(args.out, "error.json"),
                              json.dumps(payload, indent=2, sort_keys=True)
                              + "\n")
        except OSError:
            pass  # stderr still carries the report
        print(f"deconv: {payload['error']} in {payload['module']}."
              f"{payload['operation']}: {payload['message']}",
              file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
