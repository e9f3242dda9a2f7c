"""Command line entry point for the experiment harness."""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import (
    emit_csv,
    load_config,
    run_convergence,
    run_robustness,
    run_selftest,
    run_truncation,
)


def _add_common_flags(parser):
    parser.add_argument("--config", default=None, help="INI config file")
    parser.add_argument("--out", default=None, help="output CSV path")
    parser.add_argument("--scheme", default=None, help="lie | strang | cdv4")
    parser.add_argument("--eps", type=float, default=None, help="diffusion scale multiplier")
    parser.add_argument("--n-list", default=None, help="comma separated timestep counts")
    parser.add_argument("--cutoff", type=float, default=None, help="domain cutoff (both directions)")
    parser.add_argument("--workers", type=int, default=None, help="concurrent runs")


def _config_from_args(args):
    overrides = {
        "out": args.out,
        "scheme": args.scheme,
        "epsilon": args.eps,
        "workers": args.workers,
    }
    if args.n_list is not None:
        overrides["n_list"] = tuple(int(v) for v in args.n_list.split(","))
    if args.cutoff is not None:
        overrides["cutoff_x"] = args.cutoff
        overrides["cutoff_y"] = args.cutoff
    return load_config(args.config, **overrides)


def _fail(payload) -> int:
    print(json.dumps(payload), file=sys.stderr)
    return 1


def _report_records(records, slope=None):
    for rec in records:
        print(
            f"  n={rec.n:>3}  dt={rec.dt:.5f}  err_weighted={rec.err_weighted:.6e}  "
            f"err_region={rec.err_pointwise_region:.6e}  im={rec.im_residue:.3e}"
        )
    if slope is not None:
        print(f"  fitted order: {slope:.3f}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cirsplit",
        description="CIR2 bond pricing by splitting schemes with complex timesteps",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in (
        ("convergence", "error vs timestep count for one scheme"),
        ("robustness", "convergence at each diffusion scale"),
        ("truncation", "error vs domain cutoff at fixed element width"),
    ):
        _add_common_flags(sub.add_parser(name, help=blurb))
    sub.add_parser("selftest", help="run all oracle cross-checks")
    args = parser.parse_args(argv)

    if args.command == "selftest":
        results = run_selftest()
        for name, ok, detail in results:
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        failed = [name for name, ok, _ in results if not ok]
        if failed:
            return _fail({"command": "selftest", "failed_checks": failed})
        return 0

    try:
        cfg = _config_from_args(args)
    except (ValueError, OSError) as exc:
        return _fail({"command": args.command, "error": str(exc)})

    try:
        return _dispatch(args, cfg)
    except (ValueError, OSError, RuntimeError) as exc:
        return _fail({"command": args.command, "error": str(exc)})


def _dispatch(args, cfg) -> int:
    failures = []
    if args.command == "convergence":
        result = run_convergence(cfg)
        records, failures = result.records, result.failures
        print(f"convergence: scheme={cfg.scheme} eps={cfg.epsilon}")
        _report_records(records, result.slope)
    elif args.command == "robustness":
        robustness = run_robustness(cfg)
        records = []
        for eps, result in robustness.results.items():
            print(f"robustness: eps={eps}")
            _report_records(result.records, result.slope)
            records.extend(result.records)
            failures.extend(result.failures)
        for n, ratio in robustness.ratios:
            print(f"  n={n:>3}  error ratio vs eps={cfg.eps_values[0]}: {ratio:.3f}")
    else:
        truncation = run_truncation(cfg)
        records, failures = truncation.records, truncation.failures
        print(f"truncation: element width {truncation.element_width}, n={cfg.truncation_n}")
        for rec in records:
            print(f"  cutoff={rec.cutoff:>5}  err_weighted={rec.err_weighted:.6e}")
        if truncation.monotone_blowup:
            print("  warning: error grows monotonically with the cutoff", file=sys.stderr)

    emit_csv(records, cfg.out)
    print(f"wrote {cfg.out} ({len(records)} rows)")
    if failures:
        return _fail({"command": args.command, "failures": [list(f) for f in failures]})
    return 0


if __name__ == "__main__":
    sys.exit(main())
