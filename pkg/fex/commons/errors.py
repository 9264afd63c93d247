# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

class FexError(Exception):
	"""
	Root of all fex errors. `category` is the machine-readable error class
	printed by the command line front end on failure.
	"""
	category = "error"

	def __init__(self, msg: str, category: str = "") -> None:
		super().__init__(msg)
		if category:
			self.category = category

class DimensionError(FexError):
	category = "dimension"

class CapacityError(FexError):
	category = "capacity"

class PreconditionError(FexError):
	category = "precondition"

class NumericError(FexError):
	category = "numeric"

class ParseError(FexError):
	category = "parse"

	def __init__(self, msg: str, line: int = 0) -> None:
		super().__init__(f"line {line}: {msg}" if line else msg)
		self.line = line

def error_category(ex: BaseException) -> str:
	if isinstance(ex, FexError):
		return ex.category
	if isinstance(ex, OSError):
		return "io"
	return "internal"

class ConfigError(FexError):
	category = "config"
