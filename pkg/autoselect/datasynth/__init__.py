from autoselect.datasynth.ingest import ingest_csv
from autoselect.datasynth.labels import Criterion, make_labels
from autoselect.datasynth.preprocess import (
	Dataset,
	bucket_and_impute,
	inverse_zscore,
	prepare_dataset,
	remove_outliers,
	zscore,
)
from autoselect.datasynth.records import Cohort, WindowSpec
from autoselect.datasynth.synth import SynthOptions, generate_cohort, write_cohort_csv
