// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{pearson, CoverageReport, Decimal6, InputId, MetricRecord, Mode, VariableKey, VariableRecord};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparedVariable {
    pub function: String,
    pub name: String,
    pub file: Option<String>,
    pub decl_line: Option<u32>,
    pub before: MetricRecord,
    pub after: MetricRecord,
    pub delta: Decimal6,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub matched: usize,
    pub improved: usize,
    pub regressed: usize,
    pub unchanged: usize,
    pub only_before: usize,
    pub only_after: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub before: InputId,
    pub after: InputId,
    pub mode: Mode,
    pub summary: ComparisonSummary,
    /// Correlation of the matched before/after ratios; `None` when undefined.
    pub pearson: Option<Decimal6>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pearson_note: Option<String>,
    pub variables: Vec<ComparedVariable>,
    pub only_before: Vec<VariableKey>,
    pub only_after: Vec<VariableKey>,
}

impl Comparison {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("comparison serializes");
        s.push('\n');
        s
    }
}

fn metric(v: &VariableRecord) -> MetricRecord {
    MetricRecord {
        numerator: v.numerator,
        denominator: v.denominator,
        ratio: Some(Decimal6(v.exact_ratio().to_f64())),
    }
}

/// Per-variable deltas between two reports, matched on function, name and
/// declaration line.
pub fn compare(before: &CoverageReport, after: &CoverageReport) -> Result<Comparison> {
    if before.meta.mode != after.meta.mode {
        return Err(Error::Compare(format!(
            "mode mismatch: before is {}, after is {}",
            before.meta.mode, after.meta.mode
        )));
    }
    let index = |r: &CoverageReport| -> BTreeMap<VariableKey, VariableRecord> {
        r.variables.iter().map(|v| (v.key(), v.clone())).collect()
    };
    let b = index(before);
    let a = index(after);
    let mut variables = Vec::new();
    let (mut improved, mut regressed, mut unchanged) = (0, 0, 0);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (key, bv) in &b {
        let Some(av) = a.get(key) else { continue };
        let (br, ar) = (bv.exact_ratio(), av.exact_ratio());
        let delta = match ar.cmp(&br) {
            std::cmp::Ordering::Greater => {
                improved += 1;
                (ar - br).to_f64()
            }
            std::cmp::Ordering::Less => {
                regressed += 1;
                -(br - ar).to_f64()
            }
            std::cmp::Ordering::Equal => {
                unchanged += 1;
                0.0
            }
        };
        xs.push(br.to_f64());
        ys.push(ar.to_f64());
        variables.push(ComparedVariable {
            function: key.function.clone(),
            name: key.name.clone(),
            file: key.file.clone(),
            decl_line: key.decl_line,
            before: metric(bv),
            after: metric(av),
            delta: Decimal6(delta),
        });
    }
    if variables.is_empty() {
        return Err(Error::Compare("no variables appear in both reports".into()));
    }
    let only_before: Vec<VariableKey> = b.keys().filter(|k| !a.contains_key(k)).cloned().collect();
    let only_after: Vec<VariableKey> = a.keys().filter(|k| !b.contains_key(k)).cloned().collect();
    let (pearson, pearson_note) = match pearson(&xs, &ys) {
        Ok(r) => (Some(Decimal6(r)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(Comparison {
        before: before.meta.input.clone(),
        after: after.meta.input.clone(),
        mode: before.meta.mode,
        summary: ComparisonSummary {
            matched: variables.len(),
            improved,
            regressed,
            unchanged,
            only_before: only_before.len(),
            only_after: only_after.len(),
        },
        pearson,
        pearson_note,
        variables,
        only_before,
        only_after,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::{meta, record};
    use super::*;

    fn report(recs: Vec<VariableRecord>) -> CoverageReport {
        CoverageReport::new(meta(), recs, vec![], vec![])
    }

    #[test]
    fn improvement_and_regression() {
        let before = report(vec![record("a", 0, 4), record("b", 3, 3), record("c", 1, 2)]);
        let after = report(vec![record("a", 4, 4), record("b", 0, 3), record("d", 1, 1)]);
        let c = compare(&before, &after).unwrap();
        assert_eq!(c.summary.matched, 2);
        assert_eq!(c.summary.improved, 1);
        assert_eq!(c.summary.regressed, 1);
        assert_eq!(c.variables[0].delta.to_string(), "1.000000");
        assert_eq!(c.variables[1].delta.to_string(), "-1.000000");
        assert_eq!(c.only_before[0].name, "c");
        assert_eq!(c.only_after[0].name, "d");
        assert_eq!(c.pearson.unwrap().0, -1.0);
    }

    #[test]
    fn self_comparison_is_all_unchanged() {
        let r = report(vec![record("a", 1, 4), record("b", 3, 3)]);
        let c = compare(&r, &r).unwrap();
        assert_eq!((c.summary.improved, c.summary.regressed, c.summary.unchanged), (0, 0, 2));
        assert!(c.variables.iter().all(|v| v.delta.to_string() == "0.000000"));
        assert_eq!(c.pearson.unwrap().0, 1.0);
    }

    #[test]
    fn no_overlap_or_mode_mismatch_fails() {
        let a = report(vec![record("a", 1, 4)]);
        let b = report(vec![record("b", 1, 4)]);
        assert!(matches!(compare(&a, &b), Err(Error::Compare(_))));
        let mut line = a.clone();
        line.meta.mode = Mode::Line;
        assert!(matches!(compare(&a, &line), Err(Error::Compare(_))));
    }
}
