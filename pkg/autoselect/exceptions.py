# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

# Exit codes for these classes live in hooks.exit_codes.


class AutoselectError(Exception):
	"""Base class for every error raised by the package."""


class ConfigError(AutoselectError):
	pass


class DataSchemaError(ConfigError):
	def __init__(self, message, line=None):
		if line is not None:
			message = f"line {line}: {message}"
		super().__init__(message)
		self.line = line


class NumericFailure(AutoselectError):
	def __init__(self, message, node=None):
		super().__init__(message)
		self.node = node


class DivergenceError(NumericFailure):
	def __init__(self, message, partial_log=None):
		super().__init__(message)
		self.partial_log = partial_log


class TraceLimitError(AutoselectError):
	pass


class UndefinedMetricError(ValueError):
	pass


class OracleFailure(AutoselectError):
	pass
