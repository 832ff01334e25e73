# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt


class Filters(dict):
	"""Report filters with attribute access; missing keys read as None."""

	def __getattr__(self, key):
		return self.get(key)

	def __setattr__(self, key, value):
		self[key] = value


def as_filters(filters) -> Filters:
	return filters if isinstance(filters, Filters) else Filters(filters or {})
