# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

#!/usr/bin/python3

r"""
#-----#
# fex #
#-----#

Fast amortized feature attribution for black-box classifiers

An explainer network is trained with proximal policy optimization to emit,
in one forward pass, the mean of a Bernoulli mask distribution whose masks
keep the prediction of the classifier high. An exhaustive oracle and a
Monte Carlo estimator of the same attribution are available for checks.

Usage
-----
(automatically printed from `argparse` module)

Configuration
-------------
Use a .env file or FEX_* environment variables to configure this tool, we
take defaults if nothing has been set. See "config -h" for details, or just
"config" to print the current settings. Every command accepts a JSON file
via --config whose keys are the long option names of that command (with
underscores); command line flags override it.

"""

import argparse
import json
import logging
import sys
from textwrap import dedent
from typing import Any, Dict, List, Optional, Tuple

from fex.commands.ablation import Ablation
from fex.commands.bench import Bench
from fex.commands.evaluate import Evaluate
from fex.commands.explain import Explain
from fex.commands.gendata import GenData
from fex.commands.oracle import Oracle
from fex.commands.trainexplainer import TrainExplainer
from fex.commands.trainpredictor import TrainPredictor
from fex.commons.errors import ConfigError, FexError
from fex.commons.evaluation import METRICS
from fex.commons.settings import Settings
from fex.commons.utils import print_error_line
from fex.models.training import TrainingConfig

PROGNAME = Settings.PROGNAME

SUPPORTED_COMMANDS = [
	"gen-data",
	"train-predictor",
	"train-explainer",
	"explain",
	"oracle",
	"eval",
	"bench",
	"ablation",
	"config",
	"help"
]

# Options that steer the run itself and are not echoed into artifacts
RUNTIME_OPTIONS = ("command", "config", "verbose", "quiet", "print", "dryrun")

class UsageParser(argparse.ArgumentParser):
	"""
	Reports usage errors as one machine-parsable line and exits with 2.
	Required options are checked by check_required() after the config file
	has been merged, so that they may come from either source.
	"""

	def __init__(self, *args: Any, **kwargs: Any) -> None:
		super().__init__(*args, **kwargs)
		self.required_options: List[Tuple[str, ...]] = []

	def require(self, *dests: str) -> None:
		"""Exactly one of `dests` must be set (just `dests[0]` for a single option)"""
		self.required_options.append(dests)

	def option_names(self, dest: str) -> str:
		for action in self._actions:
			if action.dest == dest:
				return "/".join(action.option_strings)
		return dest

	def check_required(self, args: argparse.Namespace) -> None:
		missing = []
		for dests in self.required_options:
			given = [d for d in dests if getattr(args, d, None)]
			if not given:
				missing.append(" or ".join(self.option_names(d) for d in dests))
			elif len(given) > 1:
				self.error(f"only one of {', '.join(self.option_names(d) for d in given)} may be given")
		if missing:
			self.error(f"the following arguments are required: {', '.join(missing)}")

	def error(self, message: str) -> None:
		print_error_line(ConfigError(message, "usage"), PROGNAME)
		sys.exit(2)


class Fex:

	def __init__(self, argv: Optional[List[str]] = None) -> None:
		logging.basicConfig(
			level=logging.WARNING,
			format="%(asctime)s %(levelname)-8s %(name)-35s | %(message)s",
			datefmt='%y-%m-%d %H:%M:%S',
		)
		self.argv = sys.argv[1:] if argv is None else list(argv)
		self.parser = UsageParser(
			prog=PROGNAME,
			conflict_handler='resolve',
		)

		self.subparsers = self.parser.add_subparsers(
			dest="command",
			parser_class=UsageParser,
			help = f"Subcommand to run"
		)

		self.parsers = {}
		for cmd in SUPPORTED_COMMANDS:
			# use dispatch pattern to invoke method with same name
			getattr(self, f"parser_{cmd.replace('-', '_')}")(cmd)

		if (
			not self.argv
			or self.argv[0] == '--help'
			or self.argv[0] == '-h'
		):
			self.help()

		self.args = self.parser.parse_args(self.argv)
		if self.args.command not in SUPPORTED_COMMANDS:
			print_error_line(
				ConfigError(f"Unknown command {self.args.command}. See help with {PROGNAME} -h.", "usage"),
				PROGNAME
			)
			sys.exit(2)

		try:
			self.setup()
			success = getattr(self, self.args.command.replace("-", "_"))()
		except FexError as ex:
			print_error_line(ex, PROGNAME)
			success = False
		sys.exit(0 if success else 1)

	def setup(self) -> None:
		if getattr(self.args, "config", None):
			self._apply_config_file(self.args.config)
		self.parsers[self.args.command].check_required(self.args)
		try:
			self._subcommand_args()
		except AttributeError:
			# Some commands (ex., help) have no subcommand arguments
			pass
		logger = logging.getLogger()
		logger.setLevel(Settings.LOGLEVEL)
		if self.args.command not in ("help", "config"):
			logging.getLogger(PROGNAME).info(f"# FEX v{Settings.VERSION}, {Settings.THREADS} threads")

	def _apply_config_file(self, path: str) -> None:
		"""Config file values become parser defaults, so that flags still win"""
		try:
			with open(path, encoding="utf-8") as f:
				values = json.load(f)
		except (OSError, ValueError) as ex:
			raise ConfigError(f"Cannot read config file '{path}': {ex}")
		if not isinstance(values, dict):
			raise ConfigError(f"Config file '{path}' must contain a JSON object")
		parser = self.parsers[self.args.command]
		known = {a.dest for a in parser._actions} - set(RUNTIME_OPTIONS)
		unknown = sorted(set(values) - known)
		if unknown:
			raise ConfigError(f"Unknown options in '{path}' for {self.args.command}: {unknown}")
		flags = self.args
		parser.set_defaults(**values)
		self.args = self.parser.parse_args(self.argv)
		for dests in parser.required_options:
			flagged = [d for d in dests if getattr(flags, d, None)]
			if flagged and len(dests) > 1:
				for d in set(dests) - set(flagged):
					setattr(self.args, d, "")

	def _subcommand_args(self) -> None:
		if self.args.verbose:
			Settings.DOTENV["FEX_LOGLEVEL"] = Settings.LOGLEVEL = "DEBUG"

		if self.args.quiet:
			Settings.DOTENV["FEX_LOGLEVEL"] = Settings.LOGLEVEL = "WARNING"

		if hasattr(self.args, 'print') and self.args.print:
			Settings.DOTENV["FEX_PRINTRESULT"] = Settings.PRINTRESULT = True

	def effective_config(self) -> Dict[str, Any]:
		return {
			k: v for k, v in sorted(vars(self.args).items())
			if k not in RUNTIME_OPTIONS
		}

	def training_config(self) -> TrainingConfig:
		values = {
			name: getattr(self.args, name)
			for name in TrainingConfig.FIELDS
			if hasattr(self.args, name)
		}
		return TrainingConfig().updated(values).validate()

	def _args_defaults(self, parser: argparse.ArgumentParser) -> None:
		group = parser.add_mutually_exclusive_group()
		group.add_argument(
			"-v",
			"--verbose",
			action = "store_true",
			default = False,
			help = "Show debug output. This overrides the FEX_LOGLEVEL env var."
		)
		group.add_argument(
			"-q",
			"--quiet",
			action = "store_true",
			default = False,
			help = "Show only warnings and errors. This overrides the FEX_LOGLEVEL env var."
		)
		parser.add_argument(
			"--dryrun",
			help = "Log operations to be done without doing anything",
			action = "store_true",
			default = False
		)
		parser.add_argument(
			"--config",
			type = str,
			default = "",
			help = "JSON file with option values; command line flags take precedence"
		)
		parser.add_argument(
			"--seed",
			type = int,
			default = Settings.SEED,
			help = "Seed of every random choice. This overrides the FEX_SEED env var."
		)

	def _args_print_to_stdout(self, parser: argparse.ArgumentParser) -> None:
		parser.add_argument(
			"-p",
			"--print",
			action = "store_true",
			default = False,
			help = "Print result also to stdout."
		)

	def _args_output(self, parser: argparse.ArgumentParser, required: bool = False) -> None:
		parser.add_argument(
			"-o",
			"--output",
			type = str,
			default = "",
			help = "Write results into this path" + ("" if required else " (default: stdout)")
		)
		if required:
			parser.require("output")

	def _args_predictor(self, parser: argparse.ArgumentParser) -> None:
		parser.require("predictor", "bridge")
		group = parser.add_mutually_exclusive_group()
		group.add_argument(
			"--predictor",
			type = str,
			default = "",
			help = "Checkpoint of a builtin predictor"
		)
		group.add_argument(
			"--bridge",
			type = str,
			default = "",
			help = "Command line of an external black box speaking the fex bridge protocol"
		)

	def _args_threads(self, parser: argparse.ArgumentParser) -> None:
		parser.add_argument(
			"--threads",
			type = int,
			default = None,
			help = "Worker threads (default: FEX_THREADS or all cores)"
		)

	def _args_training(self, parser: argparse.ArgumentParser) -> None:
		defaults = TrainingConfig()
		parser.add_argument("-T", "--T", dest="T", type=int, default=defaults.T, help="Masks per trajectory")
		parser.add_argument("--epochs", type=int, default=defaults.epochs)
		parser.add_argument("--lr", type=float, default=defaults.lr, help="Adam learning rate")
		parser.add_argument("--batch-size", type=int, default=defaults.batch_size)
		parser.add_argument("--clip-eps", type=float, default=defaults.clip_eps, help="PPO clip range")
		parser.add_argument("--lambda-en", type=float, default=defaults.lambda_en, help="Entropy weight")
		parser.add_argument("--lambda-v", type=float, default=defaults.lambda_v, help="Value loss weight")
		parser.add_argument("--lambda-kl", type=float, default=defaults.lambda_kl, help="KL regularizer weight")
		parser.add_argument(
			"--inner-updates",
			type = int,
			default = defaults.inner_updates,
			help = "Gradient updates per trajectory collection"
		)
		parser.add_argument(
			"--collections",
			type = int,
			default = defaults.collections,
			help = "Trajectory collections per batch"
		)
		parser.add_argument(
			"--hidden-sizes",
			type = int,
			nargs = "+",
			default = defaults.hidden_sizes,
			help = "Hidden layer widths of the explainer and value networks"
		)
		parser.add_argument(
			"--normalize-advantages",
			action = "store_true",
			default = defaults.normalize_advantages,
			help = "Standardize advantages within each update batch"
		)
		parser.add_argument(
			"--no-divergence-guard",
			dest = "divergence_guard",
			action = "store_false",
			default = defaults.divergence_guard,
			help = "Keep training when no learning signal is detected"
		)
		self._args_threads(parser)

	def config(self) -> None:
		for k, v in Settings.DOTENV.items():
			if k.startswith("FEX_"):
				print(f"{k}={v}")
		sys.exit(0)

	def help(self) -> None:
		docparts = __doc__.split(
			"Usage\n-----\n(automatically printed from `argparse` module)\n", 1
		)
		print(docparts[0])     # Print title and section before "usage"
		print("Usage\n-----")
		self.parser.print_help()    # Print usage information
		print(docparts[1])     # Print the rest
		sys.exit(0)

	def parser_help(self, cmd: str) -> None:
		self.parsers[cmd] = self.subparsers.add_parser(
			cmd,
			help="Show a help message"
		)

	def parser_config(self, cmd: str) -> None:
		self.parsers[cmd] = self.subparsers.add_parser(
			cmd,
			formatter_class=argparse.RawTextHelpFormatter,
			help="Print .env configs or defaults",
			description=dedent("""\
				Create a .env file in the folder, where you execute the command.

				Environmental variables:
				  - FEX_LOGLEVEL            : Log level as seen inside the "logging" package (default = INFO)
				  - FEX_THREADS             : Worker threads, fallback of --threads (default = all cores)
				  - FEX_SEED                : Default of --seed (default = 0)
				  - FEX_MAX_ORACLE_FEATURES : Largest N for exhaustive enumeration (default = 20)
				  - FEX_BRIDGE_TIMEOUT      : Seconds to wait for a bridge answer (default = 10)
				  - FEX_PRINTRESULT         : Print results also to stdout
				  - FEX_OUTDIR              : Base directory of the manual acceptance runs (default = .)
				""")
		)

	def parser_gen_data(self, cmd: str) -> None:
		self.parsers[cmd] = self.subparsers.add_parser(
			cmd,
			help="Generate a synthetic dataset with known informative features"
		)
		self._args_defaults(self.parsers[cmd])
		self.parsers[cmd].add_argument(
			"--task",
			type = str,
			default = "planted-1",
			help = "planted-<k> or two-class-disjoint"
		)
		self.parsers[cmd].add_argument("--n-samples", type=int, default=2000)
		self.parsers[cmd].add_argument("--n-features", type=int, default=10)
		self.parsers[cmd].add_argument("--threshold", type=float, default=0.5)
		self.parsers[cmd].add_argument(
			"--k-informative",
			type = int,
			default = None,
			help = "Size of each class's feature set in two-class-disjoint (default 2)"
		)
		self.parsers[cmd].add_argument(
			"--test-size",
			type = int,
			default = 0,
			help = "Additional held-out samples from the same task, see --test-output"
		)
		self.parsers[cmd].add_argument("--test-output", type=str, default="")
		self._args_output(self.parsers[cmd], required=True)

	def parser_train_predictor(self, cmd: str) -> None:
		self.parsers[cmd] = self.subparsers.add_parser(
			cmd,
			help="Train a builtin MLP classifier on a dataset"
		)
		self._args_defaults(self.parsers[cmd])
		self.parsers[cmd].add_argument("--data", type=str, default="", help="Dataset CSV")
		self.parsers[cmd].require("data")
		self.parsers[cmd].add_argument("--epochs", type=int, default=50)
		self.parsers[cmd].add_argument("--lr", type=float, default=1e-2)
		self.parsers[cmd].add_argument("--hidden-sizes", type=int, nargs="+", default=[16])
		self.parsers[cmd].add_argument("--batch-size", type=int, default=32)
		self._args_output(self.parsers[cmd], required=True)

	def parser_train_explainer(self, cmd: str) -> None:
		self.parsers[cmd] = self.subparsers.add_parser(
			cmd,
			help="Train an explainer with PPO against a predictor"
		)
		self._args_defaults(self.parsers[cmd])
		self.parsers[cmd].add_argument("--data", type=str, default="", help="Dataset CSV")
		self.parsers[cmd].require("data")
		self._args_predictor(self.parsers[cmd])
		self._args_training(self.parsers[cmd])
		self.parsers[cmd].add_argument(
			"--value-output",
			type = str,
			default = "",
			help = "Also write the value network checkpoint here"
		)
		self.parsers[cmd].add_argument(
			"--log",
			type = str,
			default = "",
			help = "Training log, one JSON record per line"
		)
		self._args_output(self.parsers[cmd], required=True)

	def parser_explain(self, cmd: str) -> None:
		self.parsers[cmd] = self.subparsers.add_parser(
			cmd,
			help="Explain samples with one explainer forward pass each"
		)
		self._args_defaults(self.parsers[cmd])
		self._args_print_to_stdout(self.parsers[cmd])
		self.parsers[cmd].add_argument("--explainer", type=str, default="")
		self.parsers[cmd].require("explainer")
		self.parsers[cmd].require("input", "data")
		group = self.parsers[cmd].add_mutually_exclusive_group()
		group.add_argument("--input", type=str, default="", help="Sample JSON {\"features\": [...]}")
		group.add_argument("--data", type=str, default="", help="Dataset CSV, explain every row")
		self.parsers[cmd].add_argument(
			"--class",
			dest = "class_index",
			type = int,
			default = None,
			help = "Explained class (default: every class)"
		)
		self._args_output(self.parsers[cmd])

	def parser_oracle(self, cmd: str) -> None:
		self.parsers[cmd] = self.subparsers.add_parser(
			cmd,
			help="Exact empirical attribution by enumerating all masks"
		)
		self._args_defaults(self.parsers[cmd])
		self._args_print_to_stdout(self.parsers[cmd])
		self._args_predictor(self.parsers[cmd])
		self.parsers[cmd].add_argument("--input", type=str, default="", help="Sample JSON")
		self.parsers[cmd].require("input")
		self.parsers[cmd].add_argument(
			"--class",
			dest = "class_index",
			type = int,
			default = None,
			help = "Explained class (default: predicted class)"
		)
		self.parsers[cmd].add_argument(
			"--mc-samples",
			type = int,
			default = 0,
			help = "Estimate by Monte Carlo with this many masks instead of enumerating"
		)
		self._args_threads(self.parsers[cmd])
		self._args_output(self.parsers[cmd])

	def parser_eval(self, cmd: str) -> None:
		self.parsers[cmd] = self.subparsers.add_parser(
			cmd,
			help="Masking curve AUCs, ground truth recovery and oracle agreement"
		)
		self._args_defaults(self.parsers[cmd])
		self._args_print_to_stdout(self.parsers[cmd])
		self.parsers[cmd].add_argument("--explainer", type=str, default="")
		self.parsers[cmd].require("explainer")
		self._args_predictor(self.parsers[cmd])
		self.parsers[cmd].add_argument("--data", type=str, default="", help="Held-out dataset CSV")
		self.parsers[cmd].require("data")
		self.parsers[cmd].add_argument("--metric", choices=METRICS, default="probability")
		self.parsers[cmd].add_argument(
			"--oracle-samples",
			type = int,
			default = 20,
			help = "Samples compared against the exhaustive oracle (0 disables)"
		)
		self.parsers[cmd].add_argument(
			"--curves",
			type = str,
			default = "",
			help = "Write mean curves to <CURVES>.positive.csv and <CURVES>.negative.csv"
		)
		self._args_threads(self.parsers[cmd])
		self._args_output(self.parsers[cmd])

	def parser_bench(self, cmd: str) -> None:
		self.parsers[cmd] = self.subparsers.add_parser(
			cmd,
			help="Time explainer inference against the Monte Carlo estimator"
		)
		self._args_defaults(self.parsers[cmd])
		self._args_print_to_stdout(self.parsers[cmd])
		self.parsers[cmd].add_argument("--explainer", type=str, default="")
		self.parsers[cmd].require("explainer")
		self._args_predictor(self.parsers[cmd])
		self.parsers[cmd].add_argument("--data", type=str, default="")
		self.parsers[cmd].require("data")
		self.parsers[cmd].add_argument("--mc-samples", type=int, default=100)
		self.parsers[cmd].add_argument("--n-explanations", type=int, default=1000)
		self._args_output(self.parsers[cmd])

	def parser_ablation(self, cmd: str) -> None:
		self.parsers[cmd] = self.subparsers.add_parser(
			cmd,
			help="Train and evaluate explainers over values of one hyperparameter"
		)
		self._args_defaults(self.parsers[cmd])
		self._args_print_to_stdout(self.parsers[cmd])
		self.parsers[cmd].add_argument(
			"--parameter",
			type = str,
			default = "",
			help = "A training option (T, lambda_kl, hidden_sizes, ...) or train_size"
		)
		self.parsers[cmd].add_argument(
			"--values",
			type = str,
			nargs = "+",
			default = None,
			help = "JSON values, for example: 1 5 or [16] [32,32]"
		)
		self.parsers[cmd].require("parameter")
		self.parsers[cmd].require("values")
		self.parsers[cmd].add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
		self.parsers[cmd].add_argument("--task", type=str, default="planted-2")
		self.parsers[cmd].add_argument("--n-features", type=int, default=10)
		self.parsers[cmd].add_argument("--train-size", type=int, default=2000)
		self.parsers[cmd].add_argument("--test-size", type=int, default=100)
		self.parsers[cmd].add_argument("--predictor-epochs", type=int, default=50)
		self._args_training(self.parsers[cmd])
		self._args_output(self.parsers[cmd])

	def gen_data(self) -> bool:
		return GenData.execute(
			self.args.task,
			self.args.n_samples,
			self.args.n_features,
			self.args.output,
			self.args.seed,
			self.args.threshold,
			self.args.k_informative,
			self.args.test_size,
			self.args.test_output,
			self.effective_config(),
			self.args.dryrun
		)

	def train_predictor(self) -> bool:
		return TrainPredictor.execute(
			self.args.data,
			self.args.output,
			self.args.epochs,
			self.args.lr,
			self.args.hidden_sizes,
			self.args.batch_size,
			self.args.seed,
			self.effective_config(),
			self.args.dryrun
		)

	def train_explainer(self) -> bool:
		return TrainExplainer.execute(
			self.args.data,
			self.training_config(),
			self.args.output,
			self.args.predictor,
			self.args.bridge,
			self.args.value_output,
			self.args.log,
			self.effective_config(),
			self.args.dryrun
		)

	def explain(self) -> bool:
		return Explain.execute(
			self.args.explainer,
			self.args.input,
			self.args.data,
			self.args.class_index,
			self.args.output,
			self.effective_config(),
			self.args.dryrun
		)

	def oracle(self) -> bool:
		return Oracle.execute(
			self.args.input,
			self.args.predictor,
			self.args.bridge,
			self.args.class_index,
			self.args.mc_samples,
			self.args.seed,
			self.args.threads,
			self.args.output,
			self.effective_config(),
			self.args.dryrun
		)

	def eval(self) -> bool:
		return Evaluate.execute(
			self.args.explainer,
			self.args.data,
			self.args.predictor,
			self.args.bridge,
			self.args.metric,
			self.args.oracle_samples,
			self.args.threads,
			self.args.curves,
			self.args.output,
			self.effective_config(),
			self.args.dryrun
		)

	def bench(self) -> bool:
		return Bench.execute(
			self.args.explainer,
			self.args.data,
			self.args.predictor,
			self.args.bridge,
			self.args.mc_samples,
			self.args.n_explanations,
			self.args.seed,
			self.args.output,
			self.effective_config(),
			self.args.dryrun
		)

	def ablation(self) -> bool:
		return Ablation.execute(
			self.args.parameter,
			self.args.values,
			self.args.seeds,
			self.training_config(),
			self.args.task,
			self.args.n_features,
			self.args.train_size,
			self.args.test_size,
			self.args.predictor_epochs,
			self.args.output,
			self.effective_config(),
			self.args.dryrun
		)

def main() -> None:
	Fex()

if __name__ == "__main__":
	main()
