# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

from autoselect.evalkit.report import as_filters
from autoselect.exceptions import ConfigError
from autoselect.metaselect.fixtures import GRAD_SEED, fixture_names, run_oracles

value_fields = ("max_rel_error", "max_abs_error", "tolerance")


def execute(filters=None):
	filters = as_filters(filters)
	validate_filters(filters)
	results = get_data(filters)
	columns = get_columns(filters)
	data = prepare_data(filters, results)
	return columns, data


def validate_filters(filters):
	if filters.inject_fault and filters.inject_fault not in fixture_names():
		raise ConfigError(f"inject_fault must name a fixture: {', '.join(fixture_names())}")


def get_data(filters):
	grad_seed = GRAD_SEED if filters.grad_seed is None else int(filters.grad_seed)
	return run_oracles(inject_fault=filters.inject_fault, grad_seed=grad_seed)


def prepare_data(filters, results) -> list[dict]:
	data = []
	for result in results:
		row = {
			"fixture": result.fixture,
			"check": result.check,
			"max_rel_error": result.max_rel_error,
			"max_abs_error": result.max_abs_error,
			"tolerance": result.tolerance,
			"status": "pass" if result.passed else "FAIL",
		}
		if "encoder_only_rel_error" in result.details:
			details = result.details
			row["note"] = (
				f"max |g| {details['max_abs_gradient']:.1e}, "
				f"encoder-only rel error {details['encoder_only_rel_error']:.2e}"
			)
		else:
			row["note"] = ""
		data.append(row)
	return data


def failures(data: list[dict]) -> list[str]:
	return [f"{row['fixture']} ({row['check']})" for row in data if row["status"] != "pass"]


def get_columns(filters) -> list[dict]:
	return [
		{"fieldname": "fixture", "label": "Fixture", "fieldtype": "Data", "width": 22},
		{"fieldname": "check", "label": "Check", "fieldtype": "Data", "width": 28},
		{"fieldname": "max_rel_error", "label": "Max rel error", "fieldtype": "Float", "width": 12},
		{"fieldname": "max_abs_error", "label": "Max abs error", "fieldtype": "Float", "width": 12},
		{"fieldname": "tolerance", "label": "Tolerance", "fieldtype": "Float", "width": 10},
		{"fieldname": "status", "label": "Status", "fieldtype": "Data", "width": 6},
		{"fieldname": "note", "label": "Note", "fieldtype": "Data", "width": 28},
	]
