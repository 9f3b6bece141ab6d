//! Specification files, the analysis pipeline and the command line front end.

pub mod app;
pub mod parse;
pub mod pipeline;
pub mod report;

pub use parse::{parse_germ_spec, CurveInput, GermSpec, ParseError, ProbeSpec};
pub use pipeline::{run_pipeline, run_stages, PipelineError, PipelineOutput, Stage};
pub use report::AnalysisReport;

/// The published report schema.
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");
