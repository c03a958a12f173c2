// SPDX-License-Identifier: Apache-2.0

//! The metric engine.
//!
//! For one variable `v` the source analysis supplies the computational lines
//! in scope (`S`) and at or after its first definition (`D`); the debug info
//! supplies the lines over which it is described (`B`), possibly fractionally
//! when several instances realise a line. The primary metric is
//! `|B ∩ D| / |S ∩ D|`.

mod extension;
mod facts;
mod lifecycle;
mod metrics;

pub use extension::knowledge_extend;
pub use facts::{describe_lines, LineFractions, VariableFacts, VariableIdentity};
pub use lifecycle::{classify_lifecycle, Implication, LifecycleName, LifecycleState};
pub use metrics::{
    coverage_ratio, line_availability, line_availability_all, naive_byte_coverage, unshrunk_line_coverage,
    CoverageValue,
};
