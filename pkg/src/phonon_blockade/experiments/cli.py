"""``phonon-blockade`` command line entry point.

Exit codes: 0 success, 1 invalid scenario or configuration, 2 some rows failed.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from ..analytic import blockade_condition, four_state_oracle, g2_analytic, steady_amplitudes
from ..model import derive
from .config import load_config
from .pipelines import PIPELINES
from .scenarios import (PARAM_KEYS, ScenarioError, builtin_scenarios, default_output_dir,
                        emit_csv, get_scenario, run, with_overrides)

EXIT_OK, EXIT_INVALID, EXIT_PARTIAL = 0, 1, 2


def _resolve(target: str):
    """Built-in scenario name or path to a config file."""
    if target in builtin_scenarios():
        return get_scenario(target), None
    if Path(target).suffix in (".ini", ".cfg", ".conf") or Path(target).exists():
        return load_config(target)
    raise ScenarioError(f"{target!r} is neither a built-in scenario nor a config file")


def _cmd_run(args) -> int:
    scn, out_file = _resolve(args.target)
    scn = with_overrides(scn, pipeline=args.pipeline, tol=args.tol, fock_dim=args.fock_dim)
    out_dir = Path(args.out) if args.out else default_output_dir()
    result = run(scn, threads=args.threads)
    path = emit_csv(result, out_dir / (out_file or f"{scn.name}.csv"))
    print(f"{scn.name}: {len(result.rows)} rows, {len(result.errors)} failed, "
          f"{result.wall_time:.1f} s -> {path}")
    for i in sorted(result.errors):
        print(f"  row {i}: {result.errors[i]}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_PARTIAL


def _cmd_list(args) -> int:
    for name, scn in builtin_scenarios().items():
        print(f"{name:7s} {scn.kind:11s} {len(scn.grid):4d} pts  {scn.description}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    scn, out_file = _resolve(args.target)
    scn = with_overrides(scn, pipeline=args.pipeline, tol=args.tol, fock_dim=args.fock_dim)
    print(f"{scn.name}: valid {scn.kind} over {scn.axis} ({len(scn.grid)} points), "
          f"pipeline {scn.pipeline}, columns {','.join(scn.columns())}, "
          f"cfg={scn.config_hash()[:12]}")
    return EXIT_OK


def _parse_params(items) -> dict:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or key not in PARAM_KEYS:
            raise ScenarioError(f"expected key=value with key in {PARAM_KEYS}, got {item!r}")
        try:
            out[key] = float(value)
        except ValueError as exc:
            raise ScenarioError(f"{key} = {value!r} is not a number") from exc
    return out


def _cmd_oracle(args) -> int:
    base = get_scenario("fig4")
    over = _parse_params(args.params)
    if args.fock_dim:
        over["fock_dim"] = args.fock_dim
    try:
        p = base.params_at(over)
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"invalid parameters: {exc}") from exc
    lam = derive(p).lambda_eff
    a = (p.epsilon, p.kappa, p.gamma, lam)
    orc = four_state_oracle(*a)
    ana = steady_amplitudes(*a)
    blk = blockade_condition(*a)
    print(f"lambda/2pi      = {lam / (2 * math.pi):.6g} Hz")
    print(f"g2 analytic     = {g2_analytic(*a):.6g}")
    print(f"g2 oracle       = {orc.g2:.6g}  (cond {orc.condition_number:.3g})")
    print(f"|c1g|^2         = analytic {ana.populations['c1g']:.6g}, "
          f"oracle {orc.amplitudes.populations['c1g']:.6g}")
    print(f"|c2g|^2         = analytic {ana.populations['c2g']:.6g}, "
          f"oracle {orc.amplitudes.populations['c2g']:.6g}")
    print(f"blockade ratio  = {blk.ratio:.4g} ({'strong' if blk.strong else 'weak'})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phonon-blockade",
                                 description="Phonon blockade simulations and sweeps.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--pipeline", choices=PIPELINES)
        p.add_argument("--tol", type=float, help="relative tolerance (atol = tol / 100)")
        p.add_argument("--fock-dim", type=int)

    p = sub.add_parser("run", help="run a built-in scenario or a config file")
    p.add_argument("target")
    p.add_argument("--out", help="output directory (default $PHONON_BLOCKADE_OUT or ./results)")
    p.add_argument("--threads", type=int, default=1)
    common(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("list", help="list built-in scenarios")
    p.set_defaults(func=_cmd_list)

    p = sub.add_parser("validate", help="check a scenario or config without running it")
    p.add_argument("target")
    common(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("oracle", help="analytic and four-state results, e.g. epsilon=0.02e6")
    p.add_argument("params", nargs="*")
    p.add_argument("--fock-dim", type=int)
    p.set_defaults(func=_cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
