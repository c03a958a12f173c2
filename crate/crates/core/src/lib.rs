// SPDX-License-Identifier: Apache-2.0

//! Source-line coverage of local variables in compiler debug information.
//!
//! The crate is organised around the pipeline it implements:
//!
//! * [`model`] reads debugging information (from object files or the text
//!   fixture format) into a compiler-independent [`NeutralDebugModel`].
//! * [`source`] parses a C subset and computes, per variable, the
//!   computational lines in scope (`S`) and at or after first definition (`D`).
//! * [`coverage`] combines the binary side (`B`) with the source side into
//!   scope-shrunk line coverage and the comparison metrics.
//! * [`reachability`] restricts all line sets to the lines of an execution trace.
//! * [`report`] aggregates results into JSON/CSV reports and compares them.
//! * [`analyze`] wires the stages together.

pub mod analyze;
pub mod coverage;
pub mod error;
pub mod fraction;
pub mod lines;
pub mod model;
pub mod reachability;
pub mod report;
pub mod source;

pub use analyze::{analyze, Analysis, AnalysisOptions, Input, MetricSet};
pub use coverage::{
    classify_lifecycle, coverage_ratio, describe_lines, knowledge_extend, line_availability,
    line_availability_all, naive_byte_coverage, unshrunk_line_coverage, CoverageValue, Implication,
    LifecycleName, LifecycleState, LineFractions, VariableFacts, VariableIdentity,
};
pub use error::{Error, Result};
pub use fraction::Fraction;
pub use lines::{normalize_path, FileId, FileTable, LineSet, SourceLineKey};
pub use model::{
    load_binary, load_fixture, parse_fixture, AddressRange, DescriptionKind, DescriptionRange, Function,
    InlinedInstance, InstanceId, LineTableRow, NeutralDebugModel, VariableEntry, VariableKind,
};
pub use reachability::{apply_filter, load_trace, parse_trace, ExecutedLines, ExecutionTrace};
pub use report::{compare, pearson, sorted_curve, Comparison, CoverageReport, Mode};
pub use source::{
    computational_lines, parse_source, parse_str, variable_source_facts, ComputationalLineSet, SourceAst,
    VariableSourceFacts,
};
