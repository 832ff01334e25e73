# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

import argparse
import logging
import os
import sys
from pkgutil import resolve_name

from autoselect import __version__, hooks
from autoselect.config import load_config
from autoselect.exceptions import AutoselectError, ConfigError

logger = logging.getLogger("autoselect")

DETERMINISTIC_ENV = "AUTOSELECT_DETERMINISTIC"


def build_parser() -> argparse.ArgumentParser:
	parser = argparse.ArgumentParser(prog="autoselect", description=hooks.app_description)
	parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
	parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
	parser.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
	sub = parser.add_subparsers(dest="command", required=True)

	def with_config(name, help_text):
		command = sub.add_parser(name, help=help_text)
		command.add_argument("--config", help="YAML run configuration")
		command.add_argument("--seed", type=int)
		command.add_argument("--out", help="output directory")
		return command

	with_config("synth", "generate a synthetic cohort as CSV")
	run = with_config("run", "train and evaluate the configured arms")
	run.add_argument("--jobs", type=int)
	run.add_argument("--arm", action="append", dest="arms", help="arm to run (repeatable)")
	run.add_argument("--fraction", action="append", type=float, dest="fractions", help="train fraction (repeatable)")

	check = with_config("check", "run the gradient and hyper-gradient oracles")
	check.add_argument("--inject-fault", metavar="FIXTURE", help="corrupt one fixture's analytic gradient by 1%%")

	report = sub.add_parser("report", help="summary tables from a results directory")
	report.add_argument("results_dir", nargs="?", help="defaults to the configured output directory")
	report.add_argument("--config", help="YAML run configuration")
	return parser


def configure_logging(verbose: bool = False, quiet: bool = False):
	level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
	handler = logging.StreamHandler(sys.stderr)
	handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
	logger.handlers[:] = [handler]
	logger.setLevel(level)
	logger.propagate = False


def exit_code_for(err: BaseException) -> int | None:
	for path, code in hooks.exit_codes.items():
		if isinstance(err, resolve_name(path)):
			return code
	return None


def _run_config(args):
	overrides = {"seed": args.seed, "out": args.out}
	if args.command == "run":
		overrides.update(
			jobs=args.jobs,
			arms=tuple(args.arms) if args.arms else None,
			fractions=tuple(args.fractions) if args.fractions else None,
		)
	if os.environ.get(DETERMINISTIC_ENV) == "1":
		overrides["jobs"] = 1
	return load_config(args.config, overrides)


def dispatch(args):
	command = resolve_name(hooks.commands[args.command])
	if args.command == "check":
		config = _run_config(args) if args.config or args.seed is not None else None
		return command(config, inject_fault=args.inject_fault, out=args.out)
	if args.command == "report":
		results_dir = args.results_dir
		if results_dir is None:
			if args.config is None:
				raise ConfigError("report needs a results directory or --config")
			results_dir = load_config(args.config).out
		return command(results_dir)
	return command(_run_config(args))


def main(argv=None) -> int:
	args = build_parser().parse_args(argv)
	configure_logging(args.verbose, args.quiet)
	try:
		dispatch(args)
	except AutoselectError as err:
		code = exit_code_for(err)
		if code is None:
			raise
		logger.error("%s: %s", type(err).__name__, err)
		return code
	return 0


if __name__ == "__main__":
	sys.exit(main())
