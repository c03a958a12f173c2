// SPDX-License-Identifier: Apache-2.0

//! Synthetic inputs for the benchmarks under `benches/`.

use varcov_core::{
    AddressRange, DescriptionKind, DescriptionRange, FileId, FileTable, Fraction, Function, InstanceId,
    LineFractions, LineSet, LineTableRow, NeutralDebugModel, SourceLineKey, VariableEntry, VariableKind,
};

/// `functions` functions of `lines` rows each, with one variable per
/// function described over the first half of its body.
pub fn synthetic_model(functions: usize, lines: u32) -> NeutralDebugModel {
    let mut files = FileTable::new();
    files.insert(FileId(0), "synthetic.c");
    let mut fs = Vec::new();
    let mut rows = Vec::new();
    let mut base = 0u64;
    for i in 0..functions {
        let len = 4 * lines as u64;
        let mut f = Function::new(format!("f{i}"));
        f.ranges.push(AddressRange::new(base, base + len));
        for l in 0..lines {
            rows.push(LineTableRow {
                address: base + 4 * l as u64,
                line_key: SourceLineKey::new(FileId(0), 1 + i as u32 * lines + l),
                is_statement: true,
            });
        }
        f.variables.push(VariableEntry {
            name: "v".into(),
            kind: VariableKind::Local,
            decl_line: Some(SourceLineKey::new(FileId(0), 1 + i as u32 * lines)),
            scope_ranges: vec![],
            description_ranges: vec![DescriptionRange {
                range: AddressRange::new(base, base + len / 2),
                kind: DescriptionKind::RegisterLocation,
            }],
            instance_id: InstanceId("ool".into()),
        });
        fs.push(f);
        base += len;
    }
    NeutralDebugModel::new(files, fs, rows).expect("synthetic model is valid")
}

/// Every other line of `1..=n` described, scope and definition over all.
pub fn synthetic_facts(n: u32) -> (LineSet, LineSet, LineFractions) {
    let all: LineSet = (1..=n).map(|l| SourceLineKey::new(FileId(0), l)).collect();
    let b = all.iter().step_by(2).map(|k| (*k, Fraction::new(2, 3))).collect();
    (all.clone(), all, b)
}
