// SPDX-License-Identifier: Apache-2.0

//! Serializable coverage reports, sorted curves, correlation and diffs.
//!
//! Reports are JSON with the top-level keys `meta`, `variables`, `lines`,
//! `excluded` and `aggregate`. Every ratio is carried twice: as exact
//! `numerator`/`denominator` strings and as a decimal with six places.

mod compare;
mod pearson;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use compare::{compare, ComparedVariable, Comparison, ComparisonSummary};
pub use pearson::pearson;

use crate::coverage::CoverageValue;
use crate::error::{Error, Result};
use crate::fraction::Fraction;

pub const REPORT_TOOL: &str = "varcov";

/// A real number printed with exactly six decimal places.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Decimal6(pub f64);

impl Decimal6 {
    pub fn render(v: f64) -> String {
        let s = format!("{v:.6}");
        if s == "-0.000000" {
            "0.000000".into()
        } else {
            s
        }
    }
}

impl fmt::Display for Decimal6 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Decimal6::render(self.0))
    }
}

impl Serialize for Decimal6 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = serde_json::value::RawValue::from_string(self.to_string()).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Decimal6 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        f64::deserialize(d).map(Decimal6)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Variable,
    Line,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Variable => "variable",
            Mode::Line => "line",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputId {
    /// `binary`, `fixture` or `trace`.
    pub kind: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub tool: String,
    pub version: String,
    pub input: InputId,
    pub source_root: String,
    pub mode: Mode,
    /// `static`, or `trace` when a trace filter was applied.
    pub reachability: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<InputId>,
    pub knowledge_extension: bool,
    pub metrics: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timestamp: Option<String>,
}

/// A comparison metric carried alongside the primary one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub numerator: Fraction,
    pub denominator: Fraction,
    pub ratio: Option<Decimal6>,
}

impl From<CoverageValue> for MetricRecord {
    fn from(v: CoverageValue) -> Self {
        MetricRecord {
            numerator: v.numerator,
            denominator: v.denominator,
            ratio: v.ratio_f64().map(Decimal6),
        }
    }
}

/// Cross-report identity of a variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VariableKey {
    pub function: String,
    pub name: String,
    pub file: Option<String>,
    pub decl_line: Option<u32>,
}

impl fmt::Display for VariableKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}", self.function, self.name)?;
        if let (Some(file), Some(line)) = (&self.file, self.decl_line) {
            write!(f, " ({file}:{line})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableRecord {
    pub function: String,
    pub name: String,
    pub file: Option<String>,
    pub decl_line: Option<u32>,
    pub kind: String,
    pub instance_count: u32,
    pub numerator: Fraction,
    pub denominator: Fraction,
    pub ratio: Decimal6,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub unshrunk: Option<MetricRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub naive_bytes: Option<MetricRecord>,
}

impl VariableRecord {
    pub fn key(&self) -> VariableKey {
        VariableKey {
            function: self.function.clone(),
            name: self.name.clone(),
            file: self.file.clone(),
            decl_line: self.decl_line,
        }
    }

    /// Exact ratio; records always have a positive denominator.
    pub fn exact_ratio(&self) -> Fraction {
        self.numerator / self.denominator
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub file: String,
    pub line: u32,
    pub numerator: Fraction,
    pub denominator: Fraction,
    /// `None` when no variable is coverable on the line.
    pub ratio: Option<Decimal6>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedRecord {
    pub function: String,
    pub name: String,
    pub file: Option<String>,
    pub decl_line: Option<u32>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub variable_count: usize,
    pub excluded_count: usize,
    pub mean_ratio: Option<Decimal6>,
    pub fully_covered: usize,
    pub zero_covered: usize,
}

impl Aggregate {
    pub fn of(variables: &[VariableRecord], excluded: &[ExcludedRecord]) -> Self {
        let ratios: Vec<Fraction> = variables.iter().map(VariableRecord::exact_ratio).collect();
        let mean = if ratios.is_empty() {
            None
        } else {
            let sum: f64 = ratios.iter().map(Fraction::to_f64).sum();
            Some(Decimal6(sum / ratios.len() as f64))
        };
        Aggregate {
            variable_count: variables.len(),
            excluded_count: excluded.len(),
            mean_ratio: mean,
            fully_covered: ratios.iter().filter(|r| **r == Fraction::ONE).count(),
            zero_covered: ratios.iter().filter(|r| r.is_zero()).count(),
        }
    }

    fn same_as(&self, other: &Aggregate) -> bool {
        self.variable_count == other.variable_count
            && self.excluded_count == other.excluded_count
            && self.fully_covered == other.fully_covered
            && self.zero_covered == other.zero_covered
            && self.mean_ratio.map(|m| m.to_string()) == other.mean_ratio.map(|m| m.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub meta: ReportMeta,
    pub variables: Vec<VariableRecord>,
    pub lines: Vec<LineRecord>,
    pub excluded: Vec<ExcludedRecord>,
    pub aggregate: Aggregate,
}

fn record_order(a: &VariableRecord, b: &VariableRecord) -> Ordering {
    a.exact_ratio()
        .cmp(&b.exact_ratio())
        .then_with(|| a.function.cmp(&b.function))
        .then_with(|| a.name.cmp(&b.name))
        .then_with(|| a.file.cmp(&b.file))
        .then_with(|| a.decl_line.cmp(&b.decl_line))
}

impl CoverageReport {
    /// Sorts the records canonically and computes the aggregate block.
    pub fn new(
        meta: ReportMeta,
        mut variables: Vec<VariableRecord>,
        mut lines: Vec<LineRecord>,
        mut excluded: Vec<ExcludedRecord>,
    ) -> Self {
        variables.sort_by(record_order);
        lines.sort_by(|a, b| (&a.file, a.line).cmp(&(&b.file, b.line)));
        excluded.sort_by(|a, b| {
            (&a.function, &a.name, &a.file, a.decl_line).cmp(&(&b.function, &b.name, &b.file, b.decl_line))
        });
        let aggregate = Aggregate::of(&variables, &excluded);
        CoverageReport {
            meta,
            variables,
            lines,
            excluded,
            aggregate,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Parses a report and checks that it is internally consistent.
    pub fn from_json(text: &str) -> Result<Self> {
        let report: CoverageReport = serde_json::from_str(text).map_err(|e| Error::Report(format!("malformed report: {e}")))?;
        report.validate()?;
        Ok(report)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Report(m) => Error::Report(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn validate(&self) -> Result<()> {
        for v in &self.variables {
            if v.denominator.is_zero() || v.numerator > v.denominator {
                return Err(Error::Report(format!(
                    "record {} has invalid coverage {}/{}",
                    v.key(),
                    v.numerator,
                    v.denominator
                )));
            }
        }
        if self.variables.windows(2).any(|w| record_order(&w[0], &w[1]) == Ordering::Greater) {
            return Err(Error::Report("variable records are not in canonical order".into()));
        }
        let want = Aggregate::of(&self.variables, &self.excluded);
        if !want.same_as(&self.aggregate) {
            return Err(Error::Report(format!(
                "aggregate block does not match records (expected {want:?}, found {:?})",
                self.aggregate
            )));
        }
        Ok(())
    }

    /// CSV: `index,ratio` in variable mode, `file,line,numerator,denominator`
    /// in line mode.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        match self.meta.mode {
            Mode::Variable => {
                w.write_record(["index", "ratio"]).unwrap();
                for (i, r) in sorted_curve(self) {
                    w.write_record([i.to_string(), Decimal6::render(r)]).unwrap();
                }
            }
            Mode::Line => {
                w.write_record(["file", "line", "numerator", "denominator"]).unwrap();
                for l in &self.lines {
                    w.write_record([
                        l.file.clone(),
                        l.line.to_string(),
                        l.numerator.to_string(),
                        l.denominator.to_string(),
                    ])
                    .unwrap();
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
    }
}

/// The variables' ratios in non-decreasing order, indexed from 0.
pub fn sorted_curve(report: &CoverageReport) -> Vec<(usize, f64)> {
    let mut ratios: Vec<Fraction> = report.variables.iter().map(VariableRecord::exact_ratio).collect();
    ratios.sort();
    ratios.into_iter().map(|r| r.to_f64()).enumerate().collect()
}
