// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt;


use crate::fraction::Fraction;
use crate::lines::{LineSet, SourceLineKey};
use crate::model::{Function, NeutralDebugModel, VariableEntry};

/// Per-line described fraction. Only lines with a non-zero fraction appear.
pub type LineFractions = BTreeMap<SourceLineKey, Fraction>;

/// A source variable, independent of how many copies the compiler realised.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariableIdentity {
    pub function: String,
    pub name: String,
    pub decl: Option<SourceLineKey>,
}

impl fmt::Display for VariableIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}", self.function, self.name)?;
        if let Some(d) = self.decl {
            write!(f, "@{d}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableFacts {
    pub identity: VariableIdentity,
    /// `S`: computational lines in scope.
    pub scope: LineSet,
    /// `D`: computational lines at or after the first definition.
    pub defined: LineSet,
    /// `B` restricted to `S ∩ D`.
    pub described: LineFractions,
    /// `B` restricted to `S`, for the unshrunk comparison metric.
    pub scope_described: LineFractions,
    pub instance_count: u32,
}

impl VariableFacts {
    /// `S ∩ D`.
    pub fn coverable(&self) -> LineSet {
        self.scope.intersection(&self.defined).copied().collect()
    }
}

/// For each line of `baseline` realised by at least one instance, the share
/// of realising instances whose description ranges project onto that line.
///
/// Lines the binary describes outside `baseline` are discarded; lines no
/// instance realises are absent.
pub fn describe_lines(
    model: &NeutralDebugModel,
    function: &Function,
    instances: &[&VariableEntry],
    baseline: &LineSet,
) -> LineFractions {
    let mut realised: BTreeMap<SourceLineKey, (u128, u128)> = BTreeMap::new();
    for inst in instances {
        let reached = model.project_to_lines(function.instance_ranges(&inst.instance_id));
        let described = model.project_to_lines(&inst.described_ranges());
        for line in reached.union(&described).filter(|l| baseline.contains(l)) {
            let entry = realised.entry(*line).or_default();
            entry.1 += 1;
            if described.contains(line) {
                entry.0 += 1;
            }
        }
    }
    realised
        .into_iter()
        .filter(|(_, (hits, _))| *hits > 0)
        .map(|(line, (hits, total))| (line, Fraction::new(hits, total)))
        .collect()
}
