//! Experiment layer: universes, operation streams, replay and reports.

pub mod report;
pub mod stream;
pub mod universe;

pub use report::{
    compare, read_report, run, summarize, write_compare, write_report, AlgorithmKind, CompareRow,
    ExperimentReport, ReportRow, RunConfig, Summary,
};
pub use stream::{read_stream, validate, write_stream, StreamSpec};
pub use universe::{synthesize, FunctionKind, Instance, MatroidKind, SynthSpec, Universe};
