//! Scoring of sampled tensors: decode, evaluate the task metric, aggregate and emit.
//!
//! Uniqueness counts only consider samples that meet the report's [`Threshold`].

mod emit;
mod report;

pub use emit::{emit, emit_csv, emit_markdown, Format, CSV_HEADER};
pub use report::{
    aggregate, evaluate, evaluate_outcomes, histogram_bin, Aggregates, EvalConfig, EvalReport, SampleRecord,
    SampleStatus, Threshold, HISTOGRAM_BINS, HISTOGRAM_WIDTH, REPORT_VERSION,
};
