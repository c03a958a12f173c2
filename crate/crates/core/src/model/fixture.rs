// SPDX-License-Identifier: Apache-2.0

//! The line-oriented text fixture format.
//!
//! ```text
//! file <id> <path>
//! func <name> <low> <high>
//! inline <func> <instance> <low> <high>
//! row <addr> <file_id> <line> <is_stmt>
//! var <func> <instance> <kind> <name> [decl <file_id>:<line>]
//! scope <func> <instance> <name> <low> <high>
//! desc <func> <instance> <name> <low> <high> <kind>
//! ```
//!
//! Addresses are hexadecimal (`0x` prefix optional), `#` starts a comment and
//! records may appear in any order. `func`, `inline` and `scope` may repeat to
//! give several ranges. An instance without `inline` records is the
//! out-of-line copy; a variable without `scope` records is in scope over its
//! whole instance.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{AddressRange, DescriptionKind, DescriptionRange, Function, InlinedInstance, InstanceId, LineTableRow, NeutralDebugModel, VariableEntry, VariableKind};
use crate::error::{Error, Result};
use crate::lines::{FileId, FileTable, SourceLineKey};

/// Reads a fixture file from disk.
pub fn load_fixture(path: &Path) -> Result<NeutralDebugModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_fixture(&text)
}

type VarKey = (String, InstanceId, String);

#[derive(Default)]
struct Records {
    files: Vec<(usize, FileId, String)>,
    funcs: BTreeMap<String, Vec<AddressRange>>,
    inlines: BTreeMap<(String, InstanceId), Vec<AddressRange>>,
    rows: Vec<(usize, u64, FileId, u32, bool)>,
    vars: BTreeMap<VarKey, (usize, VariableKind, Option<SourceLineKey>)>,
    scopes: BTreeMap<VarKey, Vec<AddressRange>>,
    descs: Vec<(usize, VarKey, DescriptionRange)>,
}

struct Cursor<'a> {
    line_no: usize,
    tokens: Vec<(usize, &'a str)>,
    next: usize,
}

impl<'a> Cursor<'a> {
    fn new(line_no: usize, line: &'a str) -> Self {
        let mut tokens = Vec::new();
        let mut start = None;
        for (i, c) in line.char_indices() {
            match (c.is_whitespace(), start) {
                (true, Some(s)) => {
                    tokens.push((s, &line[s..i]));
                    start = None;
                }
                (false, None) => start = Some(i),
                _ => {}
            }
        }
        if let Some(s) = start {
            tokens.push((s, &line[s..]));
        }
        Cursor {
            line_no,
            tokens,
            next: 0,
        }
    }

    fn error(&self, column: usize, message: impl Into<String>) -> Error {
        Error::FixtureParse {
            line: self.line_no,
            column: column + 1,
            message: message.into(),
        }
    }

    fn end_column(&self) -> usize {
        self.tokens.last().map_or(0, |(s, t)| s + t.len())
    }

    fn word(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let tok = self
            .tokens
            .get(self.next)
            .copied()
            .ok_or_else(|| self.error(self.end_column(), format!("expected {what}")))?;
        self.next += 1;
        Ok(tok)
    }

    fn parse<T>(&mut self, what: &str, f: impl FnOnce(&str) -> Option<T>) -> Result<T> {
        let (col, tok) = self.word(what)?;
        f(tok).ok_or_else(|| self.error(col, format!("invalid {what} `{tok}`")))
    }

    fn address(&mut self, what: &str) -> Result<u64> {
        self.parse(what, |t| {
            let digits = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")).unwrap_or(t);
            u64::from_str_radix(digits, 16).ok()
        })
    }

    fn range(&mut self) -> Result<AddressRange> {
        let col = self.tokens.get(self.next).map_or(0, |t| t.0);
        let low = self.address("low address")?;
        let high = self.address("high address")?;
        if low > high {
            return Err(self.error(col, format!("inverted range {low:#x}..{high:#x}")));
        }
        Ok(AddressRange::new(low, high))
    }

    fn file_id(&mut self) -> Result<FileId> {
        self.parse("file id", |t| t.parse().ok().map(FileId))
    }

    fn line(&mut self) -> Result<u32> {
        let (col, tok) = self.word("line number")?;
        match tok.parse::<u32>() {
            Ok(0) => Err(self.error(col, "line numbers are 1-based")),
            Ok(n) => Ok(n),
            Err(_) => Err(self.error(col, format!("invalid line number `{tok}`"))),
        }
    }

    fn finish(&self) -> Result<()> {
        match self.tokens.get(self.next) {
            Some((col, tok)) => Err(self.error(*col, format!("unexpected `{tok}`"))),
            None => Ok(()),
        }
    }
}

/// Parses fixture text into a validated model.
pub fn parse_fixture(text: &str) -> Result<NeutralDebugModel> {
    let mut rec = Records::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut cur = Cursor::new(idx + 1, line);
        let Some(&(col, kw)) = cur.tokens.first() else {
            continue;
        };
        cur.next = 1;
        match kw {
            "file" => {
                let id = cur.file_id()?;
                let (_, path) = cur.word("path")?;
                rec.files.push((cur.line_no, id, path.to_owned()));
            }
            "func" => {
                let (_, name) = cur.word("function name")?;
                let range = cur.range()?;
                rec.funcs.entry(name.to_owned()).or_default().push(range);
            }
            "inline" => {
                let (_, func) = cur.word("function name")?;
                let (_, inst) = cur.word("instance id")?;
                let range = cur.range()?;
                rec.inlines
                    .entry((func.to_owned(), InstanceId(inst.to_owned())))
                    .or_default()
                    .push(range);
            }
            "row" => {
                let addr = cur.address("address")?;
                let file = cur.file_id()?;
                let line = cur.line()?;
                let stmt = cur.parse("is_stmt flag", |t| match t {
                    "1" | "true" => Some(true),
                    "0" | "false" => Some(false),
                    _ => None,
                })?;
                rec.rows.push((cur.line_no, addr, file, line, stmt));
            }
            "var" => {
                let (_, func) = cur.word("function name")?;
                let (_, inst) = cur.word("instance id")?;
                let kind = cur.parse("variable kind", |t| t.parse::<VariableKind>().ok())?;
                let (_, name) = cur.word("variable name")?;
                let decl = match cur.tokens.get(cur.next) {
                    Some(&(dcol, "decl")) => {
                        cur.next += 1;
                        let (pcol, pos) = cur.word("declaration position")?;
                        let (f, l) = pos
                            .split_once(':')
                            .ok_or_else(|| cur.error(pcol, format!("expected <file_id>:<line>, found `{pos}`")))?;
                        let file = f.parse().map(FileId).map_err(|_| cur.error(pcol, format!("invalid file id `{f}`")))?;
                        let line: u32 = l.parse().map_err(|_| cur.error(pcol, format!("invalid line `{l}`")))?;
                        if line == 0 {
                            return Err(cur.error(dcol, "line numbers are 1-based"));
                        }
                        Some(SourceLineKey::new(file, line))
                    }
                    _ => None,
                };
                let key = (func.to_owned(), InstanceId(inst.to_owned()), name.to_owned());
                if rec.vars.contains_key(&key) {
                    return Err(cur.error(col, format!("duplicate variable `{name}` in {func}/{inst}")));
                }
                rec.vars.insert(key, (cur.line_no, kind, decl));
            }
            "scope" => {
                let (_, func) = cur.word("function name")?;
                let (_, inst) = cur.word("instance id")?;
                let (_, name) = cur.word("variable name")?;
                let range = cur.range()?;
                rec.scopes
                    .entry((func.to_owned(), InstanceId(inst.to_owned()), name.to_owned()))
                    .or_default()
                    .push(range);
            }
            "desc" => {
                let (_, func) = cur.word("function name")?;
                let (_, inst) = cur.word("instance id")?;
                let (_, name) = cur.word("variable name")?;
                let range = cur.range()?;
                let kind = cur.parse("description kind", |t| t.parse::<DescriptionKind>().ok())?;
                let key = (func.to_owned(), InstanceId(inst.to_owned()), name.to_owned());
                rec.descs.push((cur.line_no, key, DescriptionRange { range, kind }));
            }
            other => return Err(cur.error(col, format!("unknown record type `{other}`"))),
        }
        cur.finish()?;
    }
    build(rec)
}

fn build(rec: Records) -> Result<NeutralDebugModel> {
    let invalid = |m: String| Error::Validation(m);

    let mut files = FileTable::new();
    for (line, id, path) in &rec.files {
        if !files.insert(*id, path) {
            return Err(invalid(format!("line {line}: duplicate file id {id} or path `{path}`")));
        }
    }

    let mut functions: BTreeMap<String, Function> = rec
        .funcs
        .into_iter()
        .map(|(name, ranges)| {
            let mut f = Function::new(name);
            f.ranges = ranges;
            (f.name.clone(), f)
        })
        .collect();
    for ((func, id), ranges) in rec.inlines {
        functions
            .entry(func.clone())
            .or_insert_with(|| Function::new(func))
            .inlined
            .push(InlinedInstance { id, ranges });
    }

    let rows = rec
        .rows
        .into_iter()
        .map(|(_, address, file, line, is_statement)| LineTableRow {
            address,
            line_key: SourceLineKey::new(file, line),
            is_statement,
        })
        .collect();

    let mut descs: BTreeMap<VarKey, Vec<DescriptionRange>> = BTreeMap::new();
    for (line, key, d) in rec.descs {
        if !rec.vars.contains_key(&key) {
            return Err(invalid(format!("line {line}: description for undeclared variable `{}` in {}/{}", key.2, key.0, key.1)));
        }
        descs.entry(key).or_default().push(d);
    }
    for key in rec.scopes.keys() {
        if !rec.vars.contains_key(key) {
            return Err(invalid(format!("scope for undeclared variable `{}` in {}/{}", key.2, key.0, key.1)));
        }
    }

    let mut scopes = rec.scopes;
    for (key, (line, kind, decl)) in rec.vars {
        let (func, instance, name) = key.clone();
        let Some(function) = functions.get_mut(&func) else {
            return Err(invalid(format!("line {line}: variable `{name}` references undeclared function `{func}`")));
        };
        let realised = function.instance_ranges(&instance).to_vec();
        if realised.is_empty() && function.ranges.is_empty() && !function.inlined.iter().any(|i| i.id == instance) {
            return Err(invalid(format!("line {line}: instance {instance} of `{func}` has no address ranges")));
        }
        let scope_ranges = scopes.remove(&key).unwrap_or(realised);
        function.variables.push(VariableEntry {
            name,
            kind,
            decl_line: decl,
            scope_ranges,
            description_ranges: descs.remove(&key).unwrap_or_default(),
            instance_id: instance,
        });
    }

    NeutralDebugModel::new(files, functions.into_values().collect(), rows)
}

fn hex(a: u64) -> String {
    format!("{a:#x}")
}

pub(super) fn write_fixture(model: &NeutralDebugModel) -> String {
    let mut out = String::new();
    for (id, path) in model.files().iter() {
        let _ = writeln!(out, "file {id} {path}");
    }
    for f in model.functions() {
        for r in &f.ranges {
            let _ = writeln!(out, "func {} {} {}", f.name, hex(r.low), hex(r.high));
        }
    }
    for f in model.functions() {
        for inl in &f.inlined {
            for r in &inl.ranges {
                let _ = writeln!(out, "inline {} {} {} {}", f.name, inl.id, hex(r.low), hex(r.high));
            }
        }
    }
    for row in model.line_rows() {
        let _ = writeln!(
            out,
            "row {} {} {} {}",
            hex(row.address),
            row.line_key.file,
            row.line_key.line,
            u8::from(row.is_statement)
        );
    }
    for f in model.functions() {
        for v in &f.variables {
            let _ = write!(out, "var {} {} {} {}", f.name, v.instance_id, v.kind.as_str(), v.name);
            if let Some(d) = v.decl_line {
                let _ = write!(out, " decl {}:{}", d.file, d.line);
            }
            out.push('\n');
        }
    }
    for f in model.functions() {
        for v in &f.variables {
            if v.scope_ranges.as_slice() != f.instance_ranges(&v.instance_id) {
                for r in &v.scope_ranges {
                    let _ = writeln!(out, "scope {} {} {} {} {}", f.name, v.instance_id, v.name, hex(r.low), hex(r.high));
                }
            }
        }
    }
    for f in model.functions() {
        for v in &f.variables {
            for d in &v.description_ranges {
                let _ = writeln!(
                    out,
                    "desc {} {} {} {} {} {}",
                    f.name,
                    v.instance_id,
                    v.name,
                    hex(d.range.low),
                    hex(d.range.high),
                    d.kind.as_str()
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
file 0 src/a.c
func f 0x0 0x20
row 0x0 0 1 1
row 0x10 0 2 0
var f 0 local v decl 0:1
desc f 0 v 0x10 0x20 reg
";

    #[test]
    fn canonical_text_round_trips() {
        let m = parse_fixture(SMALL).unwrap();
        assert_eq!(m.to_fixture_string(), SMALL);
    }

    #[test]
    fn records_in_any_order_with_comments() {
        let shuffled = "desc f 0 v 10 20 reg # trailing\n# whole line\nvar f 0 local v decl 0:1\nrow 10 0 2 false\nrow 0 0 1 true\n\nfunc f 0 20\nfile 0 ./src/x/../a.c\n";
        assert_eq!(parse_fixture(shuffled).unwrap(), parse_fixture(SMALL).unwrap());
    }

    #[test]
    fn empty_fixture_is_empty_model() {
        let m = parse_fixture("# nothing\n").unwrap();
        assert!(m.functions().is_empty());
        assert!(m.line_rows().is_empty());
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_fixture("file 0 a.c\nrow 0xzz 0 1 1\n") {
            Err(Error::FixtureParse { line: 2, column: 5, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_fixture("bogus 1\n") {
            Err(Error::FixtureParse { line: 1, column: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_fixture("row 0 0 0 1\n"), Err(Error::FixtureParse { .. })));
        assert!(matches!(parse_fixture("func f 0x20 0x10\n"), Err(Error::FixtureParse { .. })));
        assert!(matches!(parse_fixture("file 0 a.c extra\n"), Err(Error::FixtureParse { .. })));
    }

    #[test]
    fn dangling_file_id_is_validation_error() {
        let text = "file 0 a.c\nfunc f 0 10\nvar f 0 local v decl 3:1\n";
        assert!(matches!(parse_fixture(text), Err(Error::Validation(_))));
        let text = "file 0 a.c\nrow 0 1 1 1\n";
        assert!(matches!(parse_fixture(text), Err(Error::Validation(_))));
    }

    #[test]
    fn undeclared_references_are_validation_errors() {
        assert!(matches!(parse_fixture("var g 0 local v\n"), Err(Error::Validation(_))));
        assert!(matches!(parse_fixture("func f 0 10\ndesc f 0 v 0 4 reg\n"), Err(Error::Validation(_))));
    }

    #[test]
    fn inlined_instances_and_explicit_scopes() {
        let text = "\
file 0 a.c
func g 0x0 0x40
func h 0x100 0x120
inline h i1 0x10 0x20
var h i1 local t decl 0:3
var h ool local t decl 0:3
scope h ool t 0x104 0x110
desc h i1 t 0x10 0x18 value
desc h ool t 0x104 0x108 literal
";
        let m = parse_fixture(text).unwrap();
        let h = m.function("h").unwrap();
        assert_eq!(h.instance_ranges(&InstanceId("i1".into())), &[AddressRange::new(0x10, 0x20)]);
        assert_eq!(h.instance_ranges(&InstanceId("ool".into())), &[AddressRange::new(0x100, 0x120)]);
        assert_eq!(h.variables.len(), 2);
        assert_eq!(h.variables[0].scope_ranges, vec![AddressRange::new(0x10, 0x20)]);
        assert_eq!(h.variables[1].scope_ranges, vec![AddressRange::new(0x104, 0x110)]);
        assert_eq!(m.to_fixture_string(), text);
    }

    #[test]
    fn inlined_description_outside_instance_is_rejected() {
        let text = "func g 0x0 0x40\ninline h i1 0x10 0x20\nvar h i1 local t\ndesc h i1 t 0x18 0x28 reg\n";
        assert!(matches!(parse_fixture(text), Err(Error::Validation(_))));
    }
}
