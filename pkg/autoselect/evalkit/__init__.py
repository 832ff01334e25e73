from autoselect.evalkit.dynamics import DynamicsLog
from autoselect.evalkit.metrics import auc_pr, auc_roc
from autoselect.evalkit.splits import SplitAssignment, assign_splits, fraction_subset, hash_unit
from autoselect.evalkit.summary import MetricSummary, format_cell, summarize
