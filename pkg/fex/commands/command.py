# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

import logging
import sys
from abc import abstractmethod
from typing import Any, Dict, List, Optional

from fex.commons import checkpoint
from fex.commons.errors import DimensionError, FexError
from fex.commons.predictor import Predictor, open_blackbox_bridge
from fex.commons.settings import Settings
from fex.commons.utils import get_func_arg_names, log_minimal_error, print_error_line
from fex.models.base import BaseModel
from fex.models.common import Tool
from fex.models.reports import Artifact

logger = logging.getLogger(__name__)

class CommandError(FexError):
	category = "usage"

	def __init__(self, msg: str, prefix: str = "", category: str = "") -> None:
		super().__init__(msg, category)
		self.prefix = prefix

class Command:
	"""
	Base of all fex commands. `config` is the effective configuration after
	flags, config file and defaults have been merged; it is echoed into
	every artifact the command writes.
	"""

	def __init__(
		self,
		config: Optional[Dict[str, Any]] = None,
		dryrun: bool = False
	) -> None:
		super().__init__()
		self.config = dict(config or {})
		self.dryrun = dryrun
		self.predictor: Optional[Predictor] = None
		logger.info(f"{self.__class__.__name__.upper()}: Start.")

	def _run(self, args: List[Any]) -> Any:
		"""
		Wrapper for run(): logs the failure and prints the one-line error
		report on stderr, so that the caller only has to map the result to
		an exit code.
		"""
		if self.dryrun:
			classname = self.__class__.__name__.upper()
			run_arg_names = ", ".join(get_func_arg_names(self.__class__.run))
			logger.info(
				f"[DRYRUN] {classname}: calling run({run_arg_names}) with arguments {args}"
			)
			return True
		try:
			return self.run(*args)
		except CommandError as ex:
			log_minimal_error(logger, ex, ex.prefix)
			print_error_line(ex, Settings.PROGNAME)
		except Exception as ex:
			log_minimal_error(logger, ex)
			print_error_line(ex, Settings.PROGNAME)
		finally:
			if self.predictor:
				self.predictor.close()
				self.predictor = None
		return False

	@abstractmethod
	def run(self, *args: Any) -> Any:
		raise NotImplementedError(
			"Implement a run method giving any argument you need"
		)

	def exec(self, *args: Any) -> bool:
		result = self._run(list(args))
		self._print_results([result])
		return result is not False

	def _print_results(self, results: Any) -> None:
		if Settings.PRINTRESULT:
			self.print_results(results)

	def print_results(self, results: Any) -> None:
		for res in results:
			if isinstance(res, BaseModel):
				print(res.to_json(indent=2))

	def open_predictor(self, predictor_path: str = "", bridge: str = "") -> Predictor:
		if bool(predictor_path) == bool(bridge):
			raise CommandError("Give exactly one of --predictor and --bridge")
		if predictor_path:
			self.predictor = checkpoint.load(predictor_path, "predictor")
		else:
			self.predictor = open_blackbox_bridge(bridge)
		return self.predictor

	@staticmethod
	def check_width(what: str, n_features: int, expected: int) -> None:
		if n_features != expected:
			raise DimensionError(f"{what} has {n_features} features, expected {expected}")

	def artifact(self, kind: str, result: Any) -> Artifact:
		return Artifact(kind, result, self.config, Tool(Settings.PROGNAME, Settings.VERSION))

	def write(self, model: BaseModel, output: str = "") -> None:
		"""Write to `output`, or to stdout when no path is given"""
		if output:
			model.to_file(output)
			logger.info(f"{self.__class__.__name__.upper()}: Results written to {output}")
		else:
			sys.stdout.write(model.to_json(indent=2) + "\n")
