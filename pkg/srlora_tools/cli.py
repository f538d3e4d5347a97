# srlora_tools/cli.py
"""
Command-line interface for srlora-tools.

Subcommands train a configured run, run the verification suites, derive
CSV reports from a run directory and compare two configs over a seed sweep.

Exit status: 0 on success, 1 for usage and validation errors, 2 for runtime
failures (including failed verification), 3 for I/O and checkpoint errors.
"""

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence

from .config import get_config
from .errors import (
    CheckpointError, ConvergenceError, DivergenceError, SrloraError, ValidationError, VerificationError,
)
from .logging import get_logger
from .reports import REPORT_KINDS, CompareRow, compare_frame, final_loss, winner_counts, write_report
from .trainer import RunConfig, SrloraTrainer, load_run_config
from .verify import registry, run_suite

logger = get_logger("cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_IO = 3

COMPARE_FILE = "compare.csv"
# fields two compared configs may differ in
COMPARE_FREE_FIELDS = ("mode", "r_target", "gamma", "reset_scope", "output_dir")


class SrloraArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = SrloraArgumentParser(
        prog="srlora-tools",
        description="SRLoRA - dynamic subspace recomposition for low-rank adapters",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  srlora-tools train --config configs/teacher_student_srlora.json --out runs/ts
  srlora-tools verify --suite all
  srlora-tools report runs/ts --kind variance
  srlora-tools compare --config a.json --config b.json --seed 0 --seed 1
        """,
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands", parser_class=SrloraArgumentParser)

    train_parser = subparsers.add_parser("train", help="Run one training session and write its artifacts")
    train_parser.add_argument("--config", required=True, help="JSON run config")
    train_parser.add_argument("--out", help="Output directory; overrides output_dir")
    train_parser.add_argument("--seed", type=int, help="Run seed; overrides seed")

    verify_parser = subparsers.add_parser("verify", help="Run a verification suite")
    verify_parser.add_argument("--suite", required=True, choices=registry.get_suite_names(), help="Suite name")
    verify_parser.add_argument("--seed", type=int, help="Suite seed (default: VERIFY_SEED)")

    report_parser = subparsers.add_parser("report", help="Write a CSV report for a finished run")
    report_parser.add_argument("run_dir", help="Directory written by 'train'")
    report_parser.add_argument("--kind", required=True, choices=REPORT_KINDS, help="Report kind")

    compare_parser = subparsers.add_parser("compare", help="Compare two configs over a seed sweep")
    compare_parser.add_argument("--config", action="append", required=True, help="Config path (give exactly two)")
    compare_parser.add_argument("--seed", action="append", type=int, required=True, help="Seed (repeatable)")
    compare_parser.add_argument("--out", default=".", help="Directory for compare.csv (default: current)")
    return parser


def _default_out_dir(config_path: str, seed: int) -> str:
    return str(Path("runs") / f"{Path(config_path).stem}-seed{seed}")


def handle_train(args: argparse.Namespace) -> int:
    """Train one session and print the artifact paths."""
    config = load_run_config(args.config, seed=args.seed, output_dir=args.out)
    if config.output_dir is None:
        config = replace(config, output_dir=_default_out_dir(args.config, config.seed))
    trainer = SrloraTrainer(config)
    trainer.run()
    for path in trainer.write_artifacts(config.output_dir):
        print(path)
    return EXIT_OK


def handle_verify(args: argparse.Namespace) -> int:
    report = run_suite(args.suite, seed=args.seed)
    for result in report.results:
        status = "PASS" if result.passed else "FAIL"
        print(f"{status} {result.name} {result.detail}".rstrip())
    failed = [r.name for r in report.results if not r.passed]
    if failed:
        raise VerificationError(f"{len(failed)} of {len(report.results)} properties failed: {', '.join(failed)}")
    print(f"{args.suite}: {len(report.results)} properties passed")
    return EXIT_OK


def handle_report(args: argparse.Namespace) -> int:
    print(write_report(args.run_dir, args.kind))
    return EXIT_OK


def _check_comparable(a: RunConfig, b: RunConfig) -> None:
    da, db = a.to_dict(), b.to_dict()
    for key in COMPARE_FREE_FIELDS:
        da.pop(key, None)
        db.pop(key, None)
    differing = sorted(key for key in da if da[key] != db[key])
    if differing:
        raise ValidationError(f"compared configs differ in {', '.join(differing)}")


def _final_loss(config: RunConfig) -> float:
    trainer = SrloraTrainer(replace(config, output_dir=None))
    return final_loss(trainer.run().log)


def run_compare(config_a: str, config_b: str, seeds: Sequence[int]) -> List[CompareRow]:
    """Final losses of both configs for each seed, in seed order."""
    pairs = [(load_run_config(config_a, seed=s), load_run_config(config_b, seed=s)) for s in seeds]
    for a, b in pairs:
        _check_comparable(a, b)
    max_workers = max(1, min(get_config().get("COMPARE_MAX_WORKERS"), len(pairs)))
    logger.info(f"Comparing {config_a} vs {config_b} over {len(pairs)} seeds ({max_workers} workers)")

    def one_seed(pair) -> CompareRow:
        a, b = pair
        return CompareRow(seed=a.seed, final_loss_a=_final_loss(a), final_loss_b=_final_loss(b))

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(one_seed, pairs))


def handle_compare(args: argparse.Namespace) -> int:
    if len(args.config) != 2:
        raise ValidationError(f"compare needs exactly two --config flags, got {len(args.config)}")
    if len(set(args.seed)) != len(args.seed):
        raise ValidationError("compare seeds must be distinct")
    rows = run_compare(args.config[0], args.config[1], args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / COMPARE_FILE
    compare_frame(rows).to_csv(path, index=False)
    counts = winner_counts(rows)
    print(path)
    print(f"winners over {len(rows)} seeds: a={counts['a']} b={counts['b']} tie={counts['tie']}")
    return EXIT_OK


HANDLERS = {
    "train": handle_train,
    "verify": handle_verify,
    "report": handle_report,
    "compare": handle_compare,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    try:
        return HANDLERS[args.command](args)
    except ValidationError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, CheckpointError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ConvergenceError, DivergenceError, VerificationError, SrloraError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception(f"{args.command} failed")
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
