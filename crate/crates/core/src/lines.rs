// SPDX-License-Identifier: Apache-2.0

//! Source positions: file identifiers, `(file, line)` keys and the file table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Opaque identifier of a source file within one [`FileTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FileId(pub u32);

impl fmt::Display for FileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A program point: one line of one source file. Lines are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceLineKey {
    pub file: FileId,
    pub line: u32,
}

impl SourceLineKey {
    /// Panics if `line` is zero.
    pub fn new(file: FileId, line: u32) -> Self {
        assert!(line >= 1, "source lines are 1-based");
        SourceLineKey { file, line }
    }
}

impl fmt::Display for SourceLineKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.file, self.line)
    }
}

pub type LineSet = BTreeSet<SourceLineKey>;

/// Maps file ids to normalized paths, and back.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FileTable {
    by_id: BTreeMap<FileId, String>,
    by_path: BTreeMap<String, FileId>,
}

impl FileTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `path` under `id`. Returns false if either is already taken.
    pub fn insert(&mut self, id: FileId, path: &str) -> bool {
        let path = normalize_path(path);
        if self.by_id.contains_key(&id) || self.by_path.contains_key(&path) {
            return false;
        }
        self.by_path.insert(path.clone(), id);
        self.by_id.insert(id, path);
        true
    }

    /// Returns the id for `path`, assigning the next free id if it is new.
    pub fn intern(&mut self, path: &str) -> FileId {
        let path = normalize_path(path);
        if let Some(&id) = self.by_path.get(&path) {
            return id;
        }
        let id = FileId(self.by_id.keys().next_back().map_or(0, |id| id.0 + 1));
        self.by_path.insert(path.clone(), id);
        self.by_id.insert(id, path);
        id
    }

    pub fn path(&self, id: FileId) -> Option<&str> {
        self.by_id.get(&id).map(String::as_str)
    }

    pub fn id(&self, path: &str) -> Option<FileId> {
        self.by_path.get(&normalize_path(path)).copied()
    }

    pub fn contains(&self, id: FileId) -> bool {
        self.by_id.contains_key(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (FileId, &str)> {
        self.by_id.iter().map(|(id, p)| (*id, p.as_str()))
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }

    /// Finds the file whose path matches `path` exactly, or failing that, the
    /// unique file for which one path is a component-wise suffix of the other.
    pub fn resolve_suffix(&self, path: &str) -> Option<FileId> {
        let path = normalize_path(path);
        if let Some(&id) = self.by_path.get(&path) {
            return Some(id);
        }
        let mut found = self
            .by_path
            .iter()
            .filter(|(known, _)| is_component_suffix(known, &path) || is_component_suffix(&path, known))
            .map(|(_, id)| *id);
        let first = found.next()?;
        found.next().is_none().then_some(first)
    }
}

fn is_component_suffix(long: &str, short: &str) -> bool {
    let short = short.trim_start_matches('/');
    long.len() > short.len() && long.ends_with(short) && long.as_bytes()[long.len() - short.len() - 1] == b'/'
}

/// Lexically normalizes a path: `\` becomes `/`, empty and `.` components are
/// dropped and `..` pops the previous component where one exists.
pub fn normalize_path(path: &str) -> String {
    let unified = path.replace('\\', "/");
    let absolute = unified.starts_with('/');
    let mut parts: Vec<&str> = Vec::new();
    for comp in unified.split('/') {
        match comp {
            "" | "." => {}
            ".." => match parts.last() {
                Some(&last) if last != ".." => {
                    parts.pop();
                }
                _ if absolute => {}
                _ => parts.push(".."),
            },
            c => parts.push(c),
        }
    }
    let joined = parts.join("/");
    match (absolute, joined.is_empty()) {
        (true, _) => format!("/{joined}"),
        (false, true) => ".".to_owned(),
        (false, false) => joined,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_spellings() {
        assert_eq!(normalize_path("./src//a/../main.c"), "src/main.c");
        assert_eq!(normalize_path("src\\main.c"), "src/main.c");
        assert_eq!(normalize_path("/a/b/../../../c"), "/c");
        assert_eq!(normalize_path("../x/./y"), "../x/y");
        assert_eq!(normalize_path("a/.."), ".");
    }

    #[test]
    fn interning_merges_equivalent_paths() {
        let mut table = FileTable::new();
        let a = table.intern("src/./main.c");
        let b = table.intern("src/lib/../main.c");
        assert_eq!(a, b);
        assert_eq!(table.len(), 1);
        assert!(!table.insert(FileId(7), "src/main.c"));
    }

    #[test]
    fn suffix_resolution_is_unique() {
        let mut table = FileTable::new();
        let main = table.intern("/build/proj/src/main.c");
        table.intern("/build/proj/test/util.c");
        table.intern("/build/other/util.c");
        assert_eq!(table.resolve_suffix("main.c"), Some(main));
        assert_eq!(table.resolve_suffix("src/main.c"), Some(main));
        assert_eq!(table.resolve_suffix("util.c"), None);
        assert_eq!(table.resolve_suffix("ain.c"), None);
    }
}
