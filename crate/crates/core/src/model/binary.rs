// SPDX-License-Identifier: Apache-2.0

//! Reads DWARF (versions 4 and 5) from object files into the neutral model.
//!
//! Decoding is delegated to `gimli`; this module only walks the DIE tree and
//! classifies location expressions.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use gimli::{AttributeValue, DebuggingInformationEntry, EndianSlice, Operation, Reader, RunTimeEndian, Unit, UnitOffset};
use object::{Object, ObjectSection};

use super::{ranges_within, AddressRange, DescriptionKind, DescriptionRange, Function, InlinedInstance, InstanceId, LineTableRow, NeutralDebugModel, VariableEntry, VariableKind};
use crate::error::{Error, Result};
use crate::lines::{FileId, FileTable, SourceLineKey};

type R<'a> = gimli::RelocateReader<EndianSlice<'a, RunTimeEndian>, &'a Relocations>;

/// Relocations of one debug section; empty for linked executables.
#[derive(Debug, Default)]
struct Relocations(object::read::RelocationMap);

impl gimli::Relocate for &Relocations {
    fn relocate_address(&self, offset: usize, value: u64) -> gimli::Result<u64> {
        Ok(self.0.relocate(offset as u64, value))
    }

    fn relocate_offset(&self, offset: usize, value: usize) -> gimli::Result<usize> {
        <usize as gimli::ReaderOffset>::from_u64(self.0.relocate(offset as u64, value as u64))
    }
}

const REQUIRED_SECTIONS: [&str; 3] = [".debug_info", ".debug_abbrev", ".debug_line"];

/// Loads every function, named local and parameter, and the full line table
/// from an object file.
pub fn load_binary(path: &Path) -> Result<NeutralDebugModel> {
    let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let file = object::File::parse(&*data).map_err(|e| Error::Decode {
        offset: 0,
        message: format!("{}: {e}", path.display()),
    })?;

    let missing: Vec<String> = REQUIRED_SECTIONS
        .iter()
        .filter(|name| file.section_by_name(name).is_none())
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::NoDebugInfo {
            path: path.to_owned(),
            missing,
        });
    }

    let endian = if file.is_little_endian() {
        RunTimeEndian::Little
    } else {
        RunTimeEndian::Big
    };
    let sections = gimli::DwarfSections::load(|id| -> Result<(Cow<'_, [u8]>, Relocations), Error> {
        match file.section_by_name(id.name()) {
            Some(section) => {
                let fail = |e: object::Error| Error::Decode {
                    offset: section.file_range().map_or(0, |r| r.0),
                    message: format!("section {}: {e}", id.name()),
                };
                let data = section.uncompressed_data().map_err(fail)?;
                let relocs = section.relocation_map().map_err(fail)?;
                Ok((data, Relocations(relocs)))
            }
            None => Ok((Cow::Borrowed(&[][..]), Relocations::default())),
        }
    })?;
    let dwarf = sections.borrow(|(data, relocs)| gimli::RelocateReader::new(EndianSlice::new(data, endian), relocs));

    let mut loader = Loader {
        dwarf: &dwarf,
        files: FileTable::new(),
        functions: BTreeMap::new(),
        rows: Vec::new(),
    };
    let mut units = dwarf.units();
    while let Some(header) = units.next().map_err(|e| decode(e, 0))? {
        let unit_off = header.offset().as_debug_info_offset().map_or(0, |o| o.0 as u64);
        let unit = dwarf.unit(header).map_err(|e| decode(e, unit_off))?;
        loader.load_unit(&unit, unit_off)?;
    }

    NeutralDebugModel::new(loader.files, loader.functions.into_values().collect(), loader.rows)
}

fn decode(e: gimli::Error, offset: u64) -> Error {
    Error::Decode {
        offset,
        message: e.to_string(),
    }
}

struct Loader<'d, 'a> {
    dwarf: &'d gimli::Dwarf<R<'a>>,
    files: FileTable,
    functions: BTreeMap<String, Function>,
    rows: Vec<LineTableRow>,
}

/// The function instance and lexical scope a DIE is nested in.
#[derive(Clone)]
struct Scope {
    function: String,
    instance: InstanceId,
    realised: Vec<AddressRange>,
    ranges: Vec<AddressRange>,
}

struct UnitCtx<'u, 'a> {
    unit: &'u Unit<R<'a>>,
    unit_off: u64,
    file_ids: HashMap<u64, FileId>,
}

impl<'u, 'a> UnitCtx<'u, 'a> {
    fn offset(&self, entry: &DebuggingInformationEntry<'_, '_, R<'a>>) -> u64 {
        entry
            .offset()
            .to_debug_info_offset(&self.unit.header)
            .map_or(self.unit_off, |o| o.0 as u64)
    }
}

impl<'d, 'a> Loader<'d, 'a> {
    fn load_unit(&mut self, unit: &Unit<R<'a>>, unit_off: u64) -> Result<()> {
        let mut ctx = UnitCtx {
            unit,
            unit_off,
            file_ids: HashMap::new(),
        };
        if let Some(program) = unit.line_program.clone() {
            let mut rows = program.rows();
            while let Some((_, row)) = rows.next_row().map_err(|e| decode(e, unit_off))? {
                if row.end_sequence() {
                    continue;
                }
                let Some(line) = row.line() else { continue };
                let Ok(line) = u32::try_from(line.get()) else { continue };
                let Some(file) = self.file_id(&mut ctx, row.file_index())? else { continue };
                self.rows.push(LineTableRow {
                    address: row.address(),
                    line_key: SourceLineKey::new(file, line),
                    is_statement: row.is_stmt(),
                });
            }
        }

        let mut tree = unit.entries_tree(None).map_err(|e| decode(e, unit_off))?;
        let root = tree.root().map_err(|e| decode(e, unit_off))?;
        self.walk(&mut ctx, root, None)
    }

    fn file_id(&mut self, ctx: &mut UnitCtx<'_, 'a>, index: u64) -> Result<Option<FileId>> {
        if let Some(id) = ctx.file_ids.get(&index) {
            return Ok(Some(*id));
        }
        let Some(program) = ctx.unit.line_program.as_ref() else { return Ok(None) };
        let header = program.header();
        let Some(file) = header.file(index) else { return Ok(None) };
        let err = |e| decode(e, ctx.unit_off);
        let name = self.dwarf.attr_string(ctx.unit, file.path_name()).map_err(err)?;
        let name = name.to_string_lossy().map_err(err)?.into_owned();
        let dir = match file.directory(header) {
            Some(attr) => self.dwarf.attr_string(ctx.unit, attr).map_err(err)?.to_string_lossy().map_err(err)?.into_owned(),
            None => String::new(),
        };
        let comp_dir = ctx.unit.comp_dir.as_ref().and_then(|d| d.to_string_lossy().ok().map(|c| c.into_owned())).unwrap_or_default();
        let path = join_path(&join_path(&comp_dir, &dir), &name);
        let id = self.files.intern(&path);
        ctx.file_ids.insert(index, id);
        Ok(Some(id))
    }

    fn walk(&mut self, ctx: &mut UnitCtx<'_, 'a>, node: gimli::EntriesTreeNode<'_, '_, '_, R<'a>>, scope: Option<&Scope>) -> Result<()> {
        let mut children = node.children();
        while let Some(child) = children.next().map_err(|e| decode(e, ctx.unit_off))? {
            let entry = child.entry();
            let off = ctx.offset(entry);
            match entry.tag() {
                gimli::DW_TAG_subprogram => {
                    let ranges = self.ranges(ctx, entry)?;
                    if ranges.is_empty() {
                        continue;
                    }
                    let Some(name) = self.name(ctx, entry)? else { continue };
                    self.functions
                        .entry(name.clone())
                        .or_insert_with(|| Function::new(name.clone()))
                        .ranges
                        .extend(ranges.iter().copied());
                    let inner = Scope {
                        function: name,
                        instance: InstanceId(format!("{off:#x}")),
                        realised: ranges.clone(),
                        ranges,
                    };
                    self.walk(ctx, child, Some(&inner))?;
                }
                gimli::DW_TAG_inlined_subroutine => {
                    let Some(outer) = scope else { continue };
                    let ranges = clip(&self.ranges(ctx, entry)?, &outer.realised);
                    if ranges.is_empty() {
                        continue;
                    }
                    let Some(name) = self.name(ctx, entry)? else { continue };
                    let id = InstanceId(format!("{off:#x}"));
                    self.functions
                        .entry(name.clone())
                        .or_insert_with(|| Function::new(name.clone()))
                        .inlined
                        .push(InlinedInstance {
                            id: id.clone(),
                            ranges: ranges.clone(),
                        });
                    let inner = Scope {
                        function: name,
                        instance: id,
                        realised: ranges.clone(),
                        ranges,
                    };
                    self.walk(ctx, child, Some(&inner))?;
                }
                gimli::DW_TAG_lexical_block => {
                    let Some(outer) = scope else { continue };
                    let ranges = clip(&self.ranges(ctx, entry)?, &outer.realised);
                    let mut inner = outer.clone();
                    if !ranges.is_empty() {
                        inner.ranges = ranges;
                    }
                    self.walk(ctx, child, Some(&inner))?;
                }
                tag @ (gimli::DW_TAG_variable | gimli::DW_TAG_formal_parameter) => {
                    let Some(scope) = scope else { continue };
                    let kind = if tag == gimli::DW_TAG_formal_parameter {
                        VariableKind::FormalParameter
                    } else {
                        VariableKind::Local
                    };
                    if let Some(var) = self.variable(ctx, entry, kind, scope)? {
                        self.functions
                            .get_mut(&scope.function)
                            .expect("scope function registered before its children")
                            .variables
                            .push(var);
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn ranges(&self, ctx: &UnitCtx<'_, 'a>, entry: &DebuggingInformationEntry<'_, '_, R<'a>>) -> Result<Vec<AddressRange>> {
        let off = ctx.offset(entry);
        let mut iter = self.dwarf.die_ranges(ctx.unit, entry).map_err(|e| decode(e, off))?;
        let mut out = Vec::new();
        while let Some(r) = iter.next().map_err(|e| decode(e, off))? {
            if r.begin < r.end {
                out.push(AddressRange::new(r.begin, r.end));
            }
        }
        Ok(out)
    }

    /// Looks up `at` on the entry itself or along its abstract-origin and
    /// specification chain.
    fn inherited_attr(
        &self,
        ctx: &UnitCtx<'_, 'a>,
        entry: &DebuggingInformationEntry<'_, '_, R<'a>>,
        at: gimli::DwAt,
    ) -> Result<Option<AttributeValue<R<'a>>>> {
        let off = ctx.offset(entry);
        let err = |e| decode(e, off);
        if let Some(v) = entry.attr_value(at).map_err(err)? {
            return Ok(Some(v));
        }
        let mut next = origin(entry).map_err(err)?;
        for _ in 0..8 {
            let Some(target) = next else { break };
            let e = ctx.unit.entry(target).map_err(err)?;
            if let Some(v) = e.attr_value(at).map_err(err)? {
                return Ok(Some(v));
            }
            next = origin(&e).map_err(err)?;
        }
        Ok(None)
    }

    fn name(&self, ctx: &UnitCtx<'_, 'a>, entry: &DebuggingInformationEntry<'_, '_, R<'a>>) -> Result<Option<String>> {
        let off = ctx.offset(entry);
        match self.inherited_attr(ctx, entry, gimli::DW_AT_name)? {
            Some(v) => {
                let s = self.dwarf.attr_string(ctx.unit, v).map_err(|e| decode(e, off))?;
                let s = s.to_string_lossy().map_err(|e| decode(e, off))?.into_owned();
                Ok((!s.is_empty()).then_some(s))
            }
            None => Ok(None),
        }
    }

    fn variable(
        &mut self,
        ctx: &mut UnitCtx<'_, 'a>,
        entry: &DebuggingInformationEntry<'_, '_, R<'a>>,
        kind: VariableKind,
        scope: &Scope,
    ) -> Result<Option<VariableEntry>> {
        let Some(name) = self.name(ctx, entry)? else { return Ok(None) };
        let off = ctx.offset(entry);
        let err = |e| decode(e, off);

        let decl_file = match self.inherited_attr(ctx, entry, gimli::DW_AT_decl_file)? {
            Some(AttributeValue::FileIndex(i)) | Some(AttributeValue::Udata(i)) => Some(i),
            Some(other) => other.udata_value(),
            None => None,
        };
        let decl_line = self
            .inherited_attr(ctx, entry, gimli::DW_AT_decl_line)?
            .and_then(|v| v.udata_value())
            .and_then(|l| u32::try_from(l).ok())
            .filter(|&l| l > 0);
        let decl = match (decl_file, decl_line) {
            (Some(f), Some(l)) => self.file_id(ctx, f)?.map(|file| SourceLineKey::new(file, l)),
            _ => None,
        };

        let encoding = ctx.unit.encoding();
        let mut descs = Vec::new();
        match entry.attr_value(gimli::DW_AT_location).map_err(err)? {
            Some(AttributeValue::Exprloc(expr)) => {
                if let Some(k) = classify(expr, encoding) {
                    descs.extend(scope.ranges.iter().map(|&range| DescriptionRange { range, kind: k }));
                }
            }
            Some(value) => {
                if let Some(mut locs) = self.dwarf.attr_locations(ctx.unit, value).map_err(err)? {
                    while let Some(loc) = locs.next().map_err(err)? {
                        let Some(k) = classify(loc.data, encoding) else { continue };
                        if loc.range.begin > loc.range.end {
                            continue;
                        }
                        let r = AddressRange::new(loc.range.begin, loc.range.end);
                        if r.is_empty() {
                            if ranges_within(&r, &scope.realised) {
                                descs.push(DescriptionRange { range: r, kind: k });
                            }
                        } else {
                            descs.extend(clip(&[r], &scope.realised).into_iter().map(|range| DescriptionRange { range, kind: k }));
                        }
                    }
                }
            }
            None => {}
        }
        if entry.attr_value(gimli::DW_AT_const_value).map_err(err)?.is_some() {
            descs.extend(scope.ranges.iter().map(|&range| DescriptionRange {
                range,
                kind: DescriptionKind::LiteralValue,
            }));
        }

        Ok(Some(VariableEntry {
            name,
            kind,
            decl_line: decl,
            scope_ranges: scope.ranges.clone(),
            description_ranges: descs,
            instance_id: scope.instance.clone(),
        }))
    }
}

fn origin(entry: &DebuggingInformationEntry<'_, '_, R<'_>>) -> gimli::Result<Option<UnitOffset>> {
    for at in [gimli::DW_AT_abstract_origin, gimli::DW_AT_specification] {
        if let Some(AttributeValue::UnitRef(off)) = entry.attr_value(at)? {
            return Ok(Some(off));
        }
    }
    Ok(None)
}

fn clip(ranges: &[AddressRange], within: &[AddressRange]) -> Vec<AddressRange> {
    ranges
        .iter()
        .flat_map(|r| within.iter().filter_map(move |w| r.intersect(w)))
        .collect()
}

fn join_path(base: &str, rel: &str) -> String {
    if rel.starts_with('/') || base.is_empty() {
        rel.to_owned()
    } else if rel.is_empty() {
        base.to_owned()
    } else {
        format!("{}/{}", base.trim_end_matches('/'), rel)
    }
}

/// Classifies one location description. Returns `None` for an empty
/// description (the variable is not described over that range).
fn classify<T: Reader>(expr: gimli::Expression<T>, encoding: gimli::Encoding) -> Option<DescriptionKind> {
    let mut ops = expr.operations(encoding);
    let mut first = None;
    let mut any = false;
    let mut only_constants = true;
    let mut stack_value = false;
    loop {
        let op = match ops.next() {
            Ok(Some(op)) => op,
            Ok(None) => break,
            // Operations gimli cannot decode are vendor extensions computing values.
            Err(_) => return Some(DescriptionKind::ValueExpression),
        };
        let kind = match op {
            Operation::Piece { .. } if any => break,
            Operation::Piece { .. } => continue,
            Operation::StackValue => {
                stack_value = true;
                continue;
            }
            Operation::ImplicitValue { .. } => return Some(DescriptionKind::LiteralValue),
            Operation::UnsignedConstant { .. } | Operation::SignedConstant { .. } => {
                any = true;
                first.get_or_insert(DescriptionKind::MemoryLocation);
                continue;
            }
            Operation::Register { .. } => DescriptionKind::RegisterLocation,
            Operation::FrameOffset { .. }
            | Operation::RegisterOffset { .. }
            | Operation::Address { .. }
            | Operation::AddressIndex { .. }
            | Operation::CallFrameCFA
            | Operation::TLS => DescriptionKind::MemoryLocation,
            _ => DescriptionKind::ValueExpression,
        };
        any = true;
        only_constants = false;
        first.get_or_insert(kind);
    }
    if !any {
        return None;
    }
    if stack_value {
        return Some(if only_constants {
            DescriptionKind::LiteralValue
        } else {
            DescriptionKind::ValueExpression
        });
    }
    first
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enc() -> gimli::Encoding {
        gimli::Encoding {
            address_size: 8,
            format: gimli::Format::Dwarf32,
            version: 5,
        }
    }

    fn kind(bytes: &[u8]) -> Option<DescriptionKind> {
        classify(gimli::Expression(EndianSlice::new(bytes, RunTimeEndian::Little)), enc())
    }

    #[test]
    fn classifies_location_expressions() {
        assert_eq!(kind(&[]), None);
        // DW_OP_reg1
        assert_eq!(kind(&[0x51]), Some(DescriptionKind::RegisterLocation));
        // DW_OP_fbreg -24
        assert_eq!(kind(&[0x91, 0x68]), Some(DescriptionKind::MemoryLocation));
        // DW_OP_lit0 DW_OP_stack_value
        assert_eq!(kind(&[0x30, 0x9f]), Some(DescriptionKind::LiteralValue));
        // DW_OP_breg0 0 DW_OP_breg5 0 DW_OP_minus DW_OP_lit4 DW_OP_div DW_OP_stack_value
        assert_eq!(
            kind(&[0x70, 0x00, 0x75, 0x00, 0x1c, 0x34, 0x1b, 0x9f]),
            Some(DescriptionKind::ValueExpression)
        );
        // DW_OP_piece 4 (empty first piece) DW_OP_reg0 DW_OP_piece 4
        assert_eq!(kind(&[0x93, 0x04, 0x50, 0x93, 0x04]), Some(DescriptionKind::RegisterLocation));
    }

    #[test]
    fn empty_file_is_decode_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.o");
        std::fs::write(&path, b"").unwrap();
        assert!(matches!(load_binary(&path), Err(Error::Decode { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_binary(Path::new("/nonexistent/x.o")), Err(Error::Io { .. })));
    }

    #[test]
    fn joins_paths() {
        assert_eq!(join_path("/build", "src/a.c"), "/build/src/a.c");
        assert_eq!(join_path("/build/", "/abs/a.c"), "/abs/a.c");
        assert_eq!(join_path("", "a.c"), "a.c");
    }
}
