import argparse
import logging
import sys
from typing import List, Optional, TextIO

from stadium_entropy import commands_help
from stadium_entropy.commands import EXIT_CHECK_FAILED, EXIT_USAGE, Command
from stadium_entropy.config import Config
from stadium_entropy.errors import ConfigError, DomainError, StadiumError

logger = logging.getLogger(__name__)

# Command-line flag destinations that map onto ExperimentConfig fields
EXPERIMENT_FLAGS = (
    "l",
    "n_max",
    "samples",
    "grid",
    "seed",
    "tol",
    "max_len",
    "j_max",
    "window",
    "measure",
    "out",
    "json",
    "threads",
)
ORBIT_FLAGS = ("side", "coord", "theta", "steps")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Raises instead of exiting, so main() owns every exit code."""

    def error(self, message):
        raise _UsageError(message)


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML file with experiment and logging sections")
    common.add_argument("--l", type=float, help="length of the flat sides")
    common.add_argument("--n-max", type=int, help="longest word length to sample")
    common.add_argument("--samples", type=int, help="number of sampled phase points")
    common.add_argument("--grid", type=int, help="launch grid size per corner family")
    common.add_argument("--seed", type=int, help="64-bit seed of the sampler")
    common.add_argument("--tol", type=float, help="singularity and root tolerance")
    common.add_argument("--max-len", type=int, help="longest saddle connection length")
    common.add_argument("--j-max", type=int, help="largest composition weight")
    common.add_argument("--window", type=int, help="orbit length coded per sample")
    common.add_argument("--measure", choices=("uniform", "liouville"))
    common.add_argument("--out", help="write results to this file instead of stdout")
    common.add_argument(
        "--json", action="store_true", default=None, help="emit JSON instead of CSV"
    )
    common.add_argument("--threads", type=int, help="worker processes")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = _Parser(
        prog="stadium",
        description="Entropy experiments on the stadium billiard.",
    )
    subparsers = parser.add_subparsers(dest="command", parser_class=_Parser)
    subparsers.required = True
    for verb, text in commands_help.HELP.items():
        sub = subparsers.add_parser(
            verb,
            parents=[common],
            help=text.splitlines()[0],
            description=text,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        if verb == "orbit":
            sub.add_argument("--side", choices=("L", "T", "R", "B"))
            sub.add_argument("--coord", type=float, help="polar angle on arcs, x on flats")
            sub.add_argument("--theta", type=float, help="angle from the inward normal")
            sub.add_argument("--steps", type=int, help="number of collisions")
    return parser


def main(argv: Optional[List[str]] = None, stream: Optional[TextIO] = None) -> int:
    """Parse the command line, run one subcommand and return its exit code.

    `argv` follows sys.argv, program name included.
    """
    args_list = list(sys.argv if argv is None else argv)[1:]
    try:
        args = build_parser().parse_args(args_list)
    except _UsageError as e:
        print(f"stadium: {e}", file=sys.stderr)
        print(f"Available commands: {commands_help.AVAILABLE_COMMANDS}", file=sys.stderr)
        return EXIT_USAGE

    try:
        config = Config(args.config)
        overrides = {name: getattr(args, name) for name in EXPERIMENT_FLAGS}
        if args.command == "orbit":
            overrides.update({name: getattr(args, name) for name in ORBIT_FLAGS})
        experiment = config.experiment(overrides)
        return Command(experiment, args.command, stream).process()
    except (ConfigError, DomainError) as e:
        logger.error(e)
        return EXIT_USAGE
    except StadiumError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_CHECK_FAILED


def run():
    sys.exit(main(sys.argv))
