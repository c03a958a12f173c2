// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use super::facts::{LineFractions, VariableFacts};
use crate::fraction::Fraction;
use crate::lines::{LineSet, SourceLineKey};
use crate::model::{covered_bytes, AddressRange, VariableEntry};

/// `numerator / denominator` with `numerator <= denominator`. A zero
/// denominator means the coverage is undefined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CoverageValue {
    pub numerator: Fraction,
    pub denominator: Fraction,
}

impl CoverageValue {
    /// Panics if `numerator > denominator`.
    pub fn new(numerator: Fraction, denominator: Fraction) -> Self {
        assert!(numerator <= denominator, "coverage numerator {numerator} exceeds denominator {denominator}");
        CoverageValue {
            numerator,
            denominator,
        }
    }

    pub fn is_defined(&self) -> bool {
        !self.denominator.is_zero()
    }

    pub fn ratio(&self) -> Option<Fraction> {
        self.is_defined().then(|| self.numerator / self.denominator)
    }

    pub fn ratio_f64(&self) -> Option<f64> {
        self.ratio().map(|r| r.to_f64())
    }
}

impl Add for CoverageValue {
    type Output = CoverageValue;
    fn add(self, rhs: CoverageValue) -> CoverageValue {
        CoverageValue::new(self.numerator + rhs.numerator, self.denominator + rhs.denominator)
    }
}

fn clipped_sum<'a>(described: &LineFractions, baseline: impl Iterator<Item = &'a SourceLineKey>) -> Fraction {
    baseline
        .filter_map(|l| described.get(l))
        .map(|f| (*f).min(Fraction::ONE))
        .sum()
}

/// Scope-shrunk line coverage `|B ∩ D| / |S ∩ D|`.
///
/// Lines of `described` outside `S ∩ D` are ignored and each line counts at
/// most once, so the result never exceeds 1.
pub fn coverage_ratio(described: &LineFractions, scope: &LineSet, defined: &LineSet) -> CoverageValue {
    let coverable: Vec<&SourceLineKey> = scope.intersection(defined).collect();
    let numerator = clipped_sum(described, coverable.iter().copied());
    CoverageValue::new(numerator, Fraction::from(coverable.len()))
}

/// Line coverage without scope shrinking, `|B ∩ S| / |S|`.
pub fn unshrunk_line_coverage(described: &LineFractions, scope: &LineSet) -> CoverageValue {
    CoverageValue::new(clipped_sum(described, scope.iter()), Fraction::from(scope.len()))
}

/// Instruction-byte coverage: bytes of the description ranges inside the
/// scope over bytes of the scope.
pub fn naive_byte_coverage(variable: &VariableEntry, scope_ranges: &[AddressRange]) -> CoverageValue {
    let clipped: Vec<AddressRange> = variable
        .description_ranges
        .iter()
        .flat_map(|d| scope_ranges.iter().filter_map(move |s| d.range.intersect(s)))
        .collect();
    CoverageValue::new(Fraction::from(covered_bytes(&clipped)), Fraction::from(covered_bytes(scope_ranges)))
}

/// Variables coverable at `line`, and the described share of them.
pub fn line_availability(variables: &[VariableFacts], line: SourceLineKey) -> CoverageValue {
    variables
        .iter()
        .filter(|v| v.scope.contains(&line) && v.defined.contains(&line))
        .map(|v| {
            let f = v.described.get(&line).copied().unwrap_or(Fraction::ZERO).min(Fraction::ONE);
            CoverageValue::new(f, Fraction::ONE)
        })
        .fold(CoverageValue::default(), Add::add)
}

/// [`line_availability`] for every line coverable by at least one variable.
pub fn line_availability_all(variables: &[VariableFacts]) -> BTreeMap<SourceLineKey, CoverageValue> {
    let mut out: BTreeMap<SourceLineKey, CoverageValue> = BTreeMap::new();
    for v in variables {
        for line in v.coverable() {
            let f = v.described.get(&line).copied().unwrap_or(Fraction::ZERO).min(Fraction::ONE);
            let slot = out.entry(line).or_default();
            *slot = *slot + CoverageValue::new(f, Fraction::ONE);
        }
    }
    out
}
