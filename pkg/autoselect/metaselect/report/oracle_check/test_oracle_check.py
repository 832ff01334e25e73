# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

import pytest

from autoselect.exceptions import ConfigError
from autoselect.metaselect.report.oracle_check.oracle_check import execute, failures


def test_healthy_build_passes_every_fixture():
	columns, data = execute()
	assert [c["fieldname"] for c in columns][:2] == ["fixture", "check"]
	assert len({row["fixture"] for row in data}) >= 5
	assert failures(data) == []


@pytest.mark.parametrize("name", ["seq_tiny", "seq_long_pretrain", "seq_long_finetune", "seq_duplicate_tasks"])
def test_injected_fault_names_the_fixture(name):
	_, data = execute({"inject_fault": name})
	assert failures(data) == [f"{name} (exact vs finite difference)"]


def test_injected_fault_in_closed_form_fixture():
	_, data = execute({"inject_fault": "lls_closed_form"})
	assert "lls_closed_form (exact vs closed form)" in failures(data)


def test_unknown_fixture_is_rejected():
	with pytest.raises(ConfigError):
		execute({"inject_fault": "nope"})
