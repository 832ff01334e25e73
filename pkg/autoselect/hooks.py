app_name = "autoselect"
app_title = "AutoSelect"
app_publisher = "Hadeel Milad"
app_description = "Meta-learned auxiliary task selection for pretraining clinical time-series encoders"
app_email = "hadeelnr88@gmail.com"
app_license = "mit"

# Arms
# ------------------
# Dotted paths resolved by the run orchestrator. Every runner takes
# (ArmContext, source ArmResult | None) and returns an ArmResult.

arm_runners = {
	"supervised": "autoselect.baselines.arms.run_supervised",
	"pretrain_all": "autoselect.baselines.arms.run_pretrain_all",
	"cotrain": "autoselect.baselines.arms.run_cotrain",
	"autoselect": "autoselect.baselines.arms.run_autoselect",
	"pretrain_top": "autoselect.baselines.arms.run_pretrain_top",
	"pretrain_down": "autoselect.baselines.arms.run_pretrain_down",
	"transfer": "autoselect.baselines.arms.run_transfer",
}

# Arms that consume a finished autoselect run; "transfer" takes it from
# the source task named in arm_options.transfer_source.
arm_sources = {
	"pretrain_top": "autoselect",
	"pretrain_down": "autoselect",
	"transfer": "autoselect",
}

# Commands
# ------------------

commands = {
	"synth": "autoselect.tasks.cmd_synth",
	"run": "autoselect.tasks.cmd_run",
	"check": "autoselect.tasks.cmd_check",
	"report": "autoselect.tasks.cmd_report",
}

# Reports
# ------------------

reports = {
	"arm_summary": "autoselect.evalkit.report.arm_summary.arm_summary.execute",
	"oracle_check": "autoselect.metaselect.report.oracle_check.oracle_check.execute",
}

# Exit codes
# ------------------
# Exception classes not listed here propagate with a traceback.

exit_codes = {
	"autoselect.exceptions.OracleFailure": 3,
	"autoselect.exceptions.NumericFailure": 2,
	"autoselect.exceptions.ConfigError": 1,
	"autoselect.exceptions.AutoselectError": 1,
}
