// SPDX-License-Identifier: Apache-2.0

//! Restricting line sets to lines that actually executed.
//!
//! Traces are plain text, one `path:line` entry per line. Blank lines and
//! anything after `#` are ignored.

use std::collections::BTreeSet;
use std::path::Path;

use crate::coverage::VariableFacts;
use crate::error::{Error, Result};
use crate::lines::{normalize_path, FileTable, LineSet, SourceLineKey};

/// Executed `(normalized path, line)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExecutionTrace {
    pub executed: BTreeSet<(String, u32)>,
}

/// A trace mapped onto a debug model's file table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExecutedLines {
    pub lines: LineSet,
    /// Trace paths that matched no file in the table.
    pub unresolved: Vec<String>,
}

pub fn load_trace(path: &Path) -> Result<ExecutionTrace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(&text)
}

pub fn parse_trace(text: &str) -> Result<ExecutionTrace> {
    let mut executed = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let entry = raw.split('#').next().unwrap_or("").trim();
        if entry.is_empty() {
            continue;
        }
        let Some((file, line)) = entry.rsplit_once(':') else {
            return Err(Error::TraceParse {
                line: line_no,
                message: format!("expected `path:line`, found `{entry}`"),
            });
        };
        let file = file.trim();
        if file.is_empty() {
            return Err(Error::TraceParse {
                line: line_no,
                message: "empty path".into(),
            });
        }
        let line: i64 = line.trim().parse().map_err(|_| Error::TraceParse {
            line: line_no,
            message: format!("`{}` is not a line number", line.trim()),
        })?;
        if line <= 0 {
            return Err(Error::TraceValidation {
                line: line_no,
                message: format!("line numbers start at 1, found {line}"),
            });
        }
        let line = u32::try_from(line).map_err(|_| Error::TraceValidation {
            line: line_no,
            message: format!("line {line} out of range"),
        })?;
        executed.insert((normalize_path(file), line));
    }
    Ok(ExecutionTrace { executed })
}

impl ExecutionTrace {
    pub fn len(&self) -> usize {
        self.executed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.executed.is_empty()
    }

    /// Maps trace paths onto `files`, by exact match or unique path suffix.
    pub fn resolve(&self, files: &FileTable) -> ExecutedLines {
        let mut out = ExecutedLines::default();
        let mut unresolved = BTreeSet::new();
        for (path, line) in &self.executed {
            match files.resolve_suffix(path) {
                Some(id) => {
                    out.lines.insert(SourceLineKey::new(id, *line));
                }
                None => {
                    unresolved.insert(path.clone());
                }
            }
        }
        out.unresolved = unresolved.into_iter().collect();
        out
    }
}

/// Intersects `S`, `D` and `B` with the executed lines.
pub fn apply_filter(facts: &VariableFacts, executed: &ExecutedLines) -> VariableFacts {
    let keep = |s: &LineSet| s.intersection(&executed.lines).copied().collect();
    let keep_map = |m: &crate::coverage::LineFractions| {
        m.iter()
            .filter(|(l, _)| executed.lines.contains(l))
            .map(|(l, f)| (*l, *f))
            .collect()
    };
    VariableFacts {
        identity: facts.identity.clone(),
        scope: keep(&facts.scope),
        defined: keep(&facts.defined),
        described: keep_map(&facts.described),
        scope_described: keep_map(&facts.scope_described),
        instance_count: facts.instance_count,
    }
}
