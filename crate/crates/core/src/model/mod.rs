// SPDX-License-Identifier: Apache-2.0

//! Compiler-independent view of a binary's debugging information.
//!
//! A [`NeutralDebugModel`] holds only what the coverage metrics need: the
//! line table, functions with their address ranges and inlined copies, and
//! for every named local or parameter the address ranges over which the
//! debug info describes it.

mod binary;
mod fixture;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

pub use binary::load_binary;
pub use fixture::{load_fixture, parse_fixture};

use crate::error::{Error, Result};
use crate::lines::{FileTable, LineSet, SourceLineKey};

/// Half-open machine address range `[low, high)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AddressRange {
    pub low: u64,
    pub high: u64,
}

impl AddressRange {
    /// Panics if `low > high`.
    pub fn new(low: u64, high: u64) -> Self {
        assert!(low <= high, "address range [{low:#x}, {high:#x}) is inverted");
        AddressRange { low, high }
    }

    pub fn len(&self) -> u64 {
        self.high - self.low
    }

    pub fn is_empty(&self) -> bool {
        self.low == self.high
    }

    pub fn contains(&self, addr: u64) -> bool {
        self.low <= addr && addr < self.high
    }

    pub fn intersect(&self, other: &AddressRange) -> Option<AddressRange> {
        let low = self.low.max(other.low);
        let high = self.high.min(other.high);
        (low < high).then_some(AddressRange { low, high })
    }
}

impl fmt::Display for AddressRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:#x}, {:#x})", self.low, self.high)
    }
}

/// Merges overlapping and adjacent ranges; empty ranges are dropped.
pub fn union_ranges(ranges: &[AddressRange]) -> Vec<AddressRange> {
    let mut sorted: Vec<_> = ranges.iter().filter(|r| !r.is_empty()).copied().collect();
    sorted.sort();
    let mut out: Vec<AddressRange> = Vec::with_capacity(sorted.len());
    for r in sorted {
        match out.last_mut() {
            Some(last) if r.low <= last.high => last.high = last.high.max(r.high),
            _ => out.push(r),
        }
    }
    out
}

/// Total number of addresses covered by the union of `ranges`.
pub fn covered_bytes(ranges: &[AddressRange]) -> u64 {
    union_ranges(ranges).iter().map(AddressRange::len).sum()
}

/// True when `inner` is a subset of the union of `outer`. Empty ranges must
/// sit within or on the boundary of some outer range.
pub fn ranges_within(inner: &AddressRange, outer: &[AddressRange]) -> bool {
    if inner.is_empty() {
        return outer.iter().any(|o| o.low <= inner.low && inner.low <= o.high);
    }
    union_ranges(outer)
        .iter()
        .any(|o| o.low <= inner.low && inner.high <= o.high)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LineTableRow {
    pub address: u64,
    pub line_key: SourceLineKey,
    pub is_statement: bool,
}

/// How the debug info describes a variable over one address range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DescriptionKind {
    RegisterLocation,
    MemoryLocation,
    ValueExpression,
    LiteralValue,
}

impl DescriptionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DescriptionKind::RegisterLocation => "reg",
            DescriptionKind::MemoryLocation => "mem",
            DescriptionKind::ValueExpression => "value",
            DescriptionKind::LiteralValue => "literal",
        }
    }
}

impl FromStr for DescriptionKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "reg" => DescriptionKind::RegisterLocation,
            "mem" => DescriptionKind::MemoryLocation,
            "value" => DescriptionKind::ValueExpression,
            "literal" => DescriptionKind::LiteralValue,
            other => return Err(format!("unknown description kind `{other}`")),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DescriptionRange {
    pub range: AddressRange,
    pub kind: DescriptionKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VariableKind {
    Local,
    FormalParameter,
}

impl VariableKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VariableKind::Local => "local",
            VariableKind::FormalParameter => "param",
        }
    }
}

impl FromStr for VariableKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "local" => Ok(VariableKind::Local),
            "param" => Ok(VariableKind::FormalParameter),
            other => Err(format!("unknown variable kind `{other}`")),
        }
    }
}

/// Distinguishes realised copies of one function body: the out-of-line copy
/// and each inlined copy.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstanceId(pub String);

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableEntry {
    pub name: String,
    pub kind: VariableKind,
    pub decl_line: Option<SourceLineKey>,
    /// Addresses of the innermost enclosing scope of this instance.
    pub scope_ranges: Vec<AddressRange>,
    pub description_ranges: Vec<DescriptionRange>,
    pub instance_id: InstanceId,
}

impl VariableEntry {
    pub fn described_ranges(&self) -> Vec<AddressRange> {
        self.description_ranges.iter().map(|d| d.range).collect()
    }
}

/// An inlined copy of a function body, located inside some other function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InlinedInstance {
    pub id: InstanceId,
    pub ranges: Vec<AddressRange>,
}

/// A source function and every realised copy of it.
///
/// `ranges` are the addresses of the out-of-line copy (empty when the
/// function only exists inlined). An instance without an entry in `inlined`
/// is out-of-line and realised over `ranges`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Function {
    pub name: String,
    pub ranges: Vec<AddressRange>,
    pub variables: Vec<VariableEntry>,
    pub inlined: Vec<InlinedInstance>,
}

impl Function {
    pub fn new(name: impl Into<String>) -> Self {
        Function {
            name: name.into(),
            ranges: Vec::new(),
            variables: Vec::new(),
            inlined: Vec::new(),
        }
    }

    /// Addresses over which `instance` realises this function's body.
    pub fn instance_ranges(&self, instance: &InstanceId) -> &[AddressRange] {
        self.inlined
            .iter()
            .find(|i| &i.id == instance)
            .map_or(&self.ranges[..], |i| &i.ranges[..])
    }

    fn canonicalize(&mut self) {
        self.ranges.sort();
        self.ranges.dedup();
        for inl in &mut self.inlined {
            inl.ranges.sort();
            inl.ranges.dedup();
        }
        self.inlined.sort_by(|a, b| a.id.cmp(&b.id));
        for var in &mut self.variables {
            if var.scope_ranges.is_empty() {
                var.scope_ranges = self
                    .inlined
                    .iter()
                    .find(|i| i.id == var.instance_id)
                    .map_or(&self.ranges, |i| &i.ranges)
                    .clone();
            }
            var.scope_ranges.sort();
            var.scope_ranges.dedup();
            var.description_ranges.sort();
            var.description_ranges.dedup();
        }
        self.variables.sort_by(|a, b| {
            (&a.instance_id, &a.name, a.decl_line).cmp(&(&b.instance_id, &b.name, b.decl_line))
        });
    }
}

/// The neutral model of one binary. Immutable once built.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NeutralDebugModel {
    files: FileTable,
    functions: Vec<Function>,
    line_rows: Vec<LineTableRow>,
}

impl NeutralDebugModel {
    /// Builds a model, validating referential integrity and range containment
    /// and putting every list into canonical order. Variables without scope
    /// ranges get their instance's ranges.
    pub fn new(files: FileTable, mut functions: Vec<Function>, mut line_rows: Vec<LineTableRow>) -> Result<Self> {
        // A function realised nowhere has nothing to measure.
        functions.retain(|f| !f.ranges.is_empty() || !f.inlined.is_empty());
        for f in &mut functions {
            f.canonicalize();
        }
        functions.sort_by(|a, b| a.name.cmp(&b.name));
        line_rows.sort();
        line_rows.dedup();
        let model = NeutralDebugModel {
            files,
            functions,
            line_rows,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn files(&self) -> &FileTable {
        &self.files
    }

    pub fn functions(&self) -> &[Function] {
        &self.functions
    }

    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions
            .binary_search_by(|f| f.name.as_str().cmp(name))
            .ok()
            .map(|i| &self.functions[i])
    }

    pub fn line_rows(&self) -> &[LineTableRow] {
        &self.line_rows
    }

    /// Line keys of every line-table row whose address falls inside any of
    /// `ranges`. A zero-length range `[a, a)` stands for the positions at
    /// `a` itself and projects onto the rows at that address.
    pub fn project_to_lines(&self, ranges: &[AddressRange]) -> LineSet {
        let mut out = LineSet::new();
        for r in ranges {
            let start = self.line_rows.partition_point(|row| row.address < r.low);
            let rows = self.line_rows[start..].iter();
            if r.is_empty() {
                out.extend(rows.take_while(|row| row.address == r.low).map(|row| row.line_key));
            } else {
                out.extend(rows.take_while(|row| row.address < r.high).map(|row| row.line_key));
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Validation(m));
        for row in &self.line_rows {
            if !self.files.contains(row.line_key.file) {
                return err(format!("row at {:#x} references undeclared file id {}", row.address, row.line_key.file));
            }
            if row.line_key.line == 0 {
                return err(format!("row at {:#x} has line 0", row.address));
            }
        }
        for f in &self.functions {
            let mut seen: BTreeMap<(&str, Option<SourceLineKey>), BTreeSet<&InstanceId>> = BTreeMap::new();
            for inl in &f.inlined {
                for r in &inl.ranges {
                    let inside = self.functions.iter().any(|host| ranges_within(r, &host.ranges));
                    if !inside {
                        return err(format!("inlined instance {} of `{}` range {r} lies outside every function", inl.id, f.name));
                    }
                }
            }
            for v in &f.variables {
                if let Some(decl) = v.decl_line {
                    if !self.files.contains(decl.file) {
                        return err(format!("variable `{}` in `{}` references undeclared file id {}", v.name, f.name, decl.file));
                    }
                    if decl.line == 0 {
                        return err(format!("variable `{}` in `{}` declared at line 0", v.name, f.name));
                    }
                }
                if !seen.entry((v.name.as_str(), v.decl_line)).or_default().insert(&v.instance_id) {
                    return err(format!("duplicate instance {} for variable `{}` in `{}`", v.instance_id, v.name, f.name));
                }
                let realised = f.instance_ranges(&v.instance_id);
                for d in &v.description_ranges {
                    if !ranges_within(&d.range, realised) {
                        return err(format!(
                            "description range {} of `{}` in `{}` (instance {}) lies outside its function",
                            d.range, v.name, f.name, v.instance_id
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Serializes to the canonical text fixture format.
    pub fn to_fixture_string(&self) -> String {
        fixture::write_fixture(self)
    }
}
