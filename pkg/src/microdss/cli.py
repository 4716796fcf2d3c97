"""``microdss`` command line.

Exit codes: 0 success, 1 unexpected failure, 2 bad scenario / FSF log /
arguments, 3 bad case base.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from microdss.config import KernelConfig, apply_overrides, parse_set_args
from microdss.driver import FSFLogError, RunConfig, default_casebase, replay_log, run_scenario
from microdss.prediction import CaseBase, CaseBaseError
from microdss.rng import MASK64
from microdss.sim import ScenarioError

EXIT_OK, EXIT_INPUT, EXIT_CASEBASE = 0, 2, 3


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value <= MASK64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="microdss", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the simulator and kernel in a closed loop")
    run.add_argument("--scenario", required=True, type=Path)
    run.add_argument("--seed", required=True, type=_u64)
    run.add_argument("--cycles", required=True, type=_positive)
    run.add_argument("--policy", required=True, choices=("none", "baseline", "dss"))
    run.add_argument("--casebase", type=Path)
    run.add_argument("--out", required=True, type=Path)
    run.add_argument("--set", action="append", metavar="KEY=VALUE", dest="settings")

    replay = sub.add_parser("replay", help="run the kernel alone over an FSF log")
    replay.add_argument("--log", required=True, type=Path)
    replay.add_argument("--out", required=True, type=Path)
    replay.add_argument("--set", action="append", metavar="KEY=VALUE", dest="settings")

    cb = sub.add_parser("casebase", help="manage a case base file")
    cb.add_argument("action", choices=("init", "list"))
    cb.add_argument("--path", required=True, type=Path)
    return parser


def _kernel_config(parser, settings) -> KernelConfig:
    try:
        return apply_overrides(KernelConfig(), parse_set_args(settings))
    except ValueError as exc:
        parser.error(str(exc))


def _err(message: str) -> None:
    print(f"microdss: error: {message}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "run":
        if args.policy == "dss" and args.casebase is None:
            parser.error("--policy dss requires --casebase")
        cfg = RunConfig(args.scenario, args.out, args.seed, args.cycles, args.policy,
                        args.casebase, _kernel_config(parser, args.settings))
        try:
            report = run_scenario(cfg)
        except ScenarioError as exc:
            _err(str(exc))
            return EXIT_INPUT
        except CaseBaseError as exc:
            _err(str(exc))
            return EXIT_CASEBASE
        print(f"final {report.final_metrics}; recommendations {report.recommendations_issued}; "
              f"case updates {report.cases_updated}")
        return EXIT_OK

    if args.command == "replay":
        try:
            replay_log(args.log, args.out, _kernel_config(parser, args.settings))
        except FSFLogError as exc:
            _err(f"{args.log}: {exc}")
            return EXIT_INPUT
        except OSError as exc:
            _err(str(exc))
            return EXIT_INPUT
        return EXIT_OK

    if args.action == "init":
        default_casebase().save(args.path)
        return EXIT_OK
    try:
        base = CaseBase.load(args.path)
    except CaseBaseError as exc:
        _err(str(exc))
        return EXIT_CASEBASE
    for case in base.cases:
        print(f"{case.case_id}\t{case.template.value}\t{case.weight:.6f}\t{' | '.join(case.consequences)}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
