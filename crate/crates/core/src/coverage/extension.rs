// SPDX-License-Identifier: Apache-2.0

use crate::fraction::Fraction;
use crate::lines::LineSet;

use super::facts::LineFractions;

/// Simulates a debugger that latches a variable's value at the last line
/// where the debug info describes it and keeps showing it until scope end.
///
/// Every line of `coverable` after the last described line receives that
/// line's fraction; earlier lines are unchanged.
pub fn knowledge_extend(described: &LineFractions, coverable: &LineSet) -> LineFractions {
    let mut out = described.clone();
    let last = coverable
        .iter()
        .rev()
        .find_map(|l| described.get(l).filter(|f| !f.is_zero()).map(|f| (*l, *f)));
    let Some((last_line, latched)) = last else {
        return out;
    };
    for line in coverable.range(last_line..).skip(1) {
        let slot = out.entry(*line).or_insert(Fraction::ZERO);
        *slot = (*slot).max(latched);
    }
    out
}
