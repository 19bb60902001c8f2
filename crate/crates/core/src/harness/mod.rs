//! Experiment registry, runner, series ingestion and result emission.

mod config;
mod emit;
mod ingest;
mod registry;
mod run;
mod spec;
mod theory;

pub use config::{init_workers, HarnessConfig, OutputSection, RunSection};
pub use emit::{
    emit, from_json, histogram_paths, to_csv_string, write_csv, write_histogram_csv, write_json, Format, CSV_HEADER,
    HISTOGRAM_HEADER,
};
pub use ingest::{ingest_series, observable_series, read_table, require_variation, IngestTarget, Metric};
pub use registry::*;
pub use run::{
    run_experiment, run_spec, sweep, visit_run, with_parameter, ExperimentRef, HistogramRecord, ModelColumn,
    ResultRecord, ResultRow, SweepParam,
};
pub use spec::{
    Check, Criterion, EstimateCase, ExperimentKind, ExperimentSpec, Overrides, Quantity, Reference, TrajectorySettings,
    VisitCase, VisitCheck, VisitModel, VisitSettings,
};
pub use theory::{minimal_period, profile, reference_value, QkProfile, MAX_PERIOD};
