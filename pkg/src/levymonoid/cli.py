"""Command line entry point.

Subcommands:
  simulate              sample an ensemble and write the jump CSV
  verify <check>        run one verification check
  alpha                 shorthand for `verify alpha`
  all                   run every check the config has sections for

Reports are emitted as a JSON array of {check, params, closed_form,
estimate, halfwidth, pass, seed} objects, written to --out (default:
standard output, with the human-readable table going to standard error so
the JSON stays parseable).  Exit status: 0 when every pass flag is true,
1 when any check failed, 2 on configuration errors.  No timestamps are
recorded, so identical argv + seed reproduce byte-identical reports.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import ConfigError, load_config
from .core import NoActionError
from .instances import InvalidSpecError, NoClosedFormError
from .subordinator import dump_paths_csv, sample_ensemble
from .verify import CHECKS, VerificationReport, all_passed, run_all

_VERIFY_CHOICES = sorted(CHECKS)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="experiment config (TOML)")
    parser.add_argument("--seed", type=int, default=None, help="override [run].seed")
    parser.add_argument("--out", default=None, help="output path (default: stdout)")
    parser.add_argument("--threads", type=int, default=1, help="worker process cap")
    parser.add_argument("--delta", type=float, default=None, help="override [run].delta")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levymonoid",
        description="subordinators on monoids: simulation and Monte Carlo verification")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="sample paths and write jump CSV")
    _add_common(p_sim)

    p_verify = sub.add_parser("verify", help="run one verification check")
    p_verify.add_argument("check", choices=_VERIFY_CHOICES)
    _add_common(p_verify)

    p_alpha = sub.add_parser("alpha", help="small-element coefficient check")
    _add_common(p_alpha)

    p_all = sub.add_parser("all", help="run every configured check")
    _add_common(p_all)
    return parser


def _format_table(reports: list[VerificationReport]) -> str:
    lines = []
    for r in reports:
        tag = "PASS" if r.passed else "FAIL"
        keys = ("char", "t", "n", "times", "order", "kind", "verdict")
        brief = " ".join(f"{k}={r.params[k]}" for k in keys if k in r.params)
        lines.append(f"{tag}  {r.check:<16} {brief:<44} closed={r.closed_form:.8g} "
                     f"estimate={r.estimate:.8g} halfwidth={r.halfwidth:.3g}")
    return "\n".join(lines)


def _emit_reports(reports: list[VerificationReport], out: str | None) -> None:
    payload = json.dumps([r.to_json_dict() for r in reports], indent=2, sort_keys=True)
    table = _format_table(reports)
    if out:
        with open(out, "w") as fh:
            fh.write(payload + "\n")
        print(table)
    else:
        print(payload)
        if table:
            print(table, file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config).with_seed(args.seed).with_delta(args.delta)
        if args.command == "simulate":
            paths = sample_ensemble(cfg.instance, cfg.measure, cfg.drift,
                                    cfg.horizon, cfg.seed, cfg.replicates)
            if args.out:
                with open(args.out, "w", newline="") as fh:
                    dump_paths_csv(paths, fh)
            else:
                dump_paths_csv(paths, sys.stdout)
            return 0
        if args.command == "verify":
            reports = CHECKS[args.check](cfg, threads=args.threads)
        elif args.command == "alpha":
            reports = CHECKS["alpha"](cfg, threads=args.threads)
        else:
            reports = run_all(cfg, threads=args.threads)
    except (ConfigError, InvalidSpecError, NoClosedFormError, NoActionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    _emit_reports(reports, args.out)
    return 0 if all_passed(reports) else 1


if __name__ == "__main__":
    sys.exit(main())
