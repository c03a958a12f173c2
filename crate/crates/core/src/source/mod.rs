// SPDX-License-Identifier: Apache-2.0

//! The source-side baseline.
//!
//! A C-subset parser feeds an analysis that decides, per line, whether the
//! code there performs computation, and per variable which of those lines
//! are in scope (`S`) and at or after the first definition (`D`). Lines are
//! judged from the source alone, so the baseline does not depend on any
//! compiler's line table.

mod analysis;
mod lexer;
mod parser;

use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;

pub use analysis::{computational_lines, variable_source_facts};

use crate::error::{Error, Result};
use crate::lines::{FileId, LineSet, SourceLineKey};
use crate::model::VariableKind;

/// Inclusive line span.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: u32,
    pub end: u32,
}

impl Span {
    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    TranslationUnit,
    FunctionDef { name: String },
    ParamDecl { name: String },
    /// One declaration statement; its children are the [`NodeKind::VarDecl`]s.
    DeclStmt,
    VarDecl { name: String, has_init: bool },
    ExprStmt,
    Return,
    If,
    For,
    While,
    DoWhile,
    Block,
    Break,
    Continue,
    Empty,
    Assignment { op: &'static str },
    Call,
    BinaryOp { op: &'static str },
    UnaryOp { op: &'static str, postfix: bool },
    Conditional,
    Comma,
    Cast,
    Sizeof,
    Index,
    Member { field: String, arrow: bool },
    Ident { name: String },
    Literal { text: String },
    InitList,
}

/// A syntax tree node with the source lines it covers.
///
/// `header` is set on function definitions (return type through the closing
/// parenthesis of the parameter list) and on `if`/`for`/`while`/`do`
/// (keyword through the closing parenthesis of the condition).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    pub span: Span,
    pub header: Option<Span>,
    pub children: Vec<Node>,
}

impl Node {
    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Node)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceAst {
    pub file: FileId,
    pub root: Node,
    /// Every line holding at least one token.
    pub token_lines: BTreeSet<u32>,
}

impl SourceAst {
    pub fn functions(&self) -> impl Iterator<Item = &Node> {
        self.root
            .children
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::FunctionDef { .. }))
    }
}

/// Parses a C source file; `file` is the id its lines are keyed under.
pub fn parse_source(path: &Path, file: FileId) -> Result<SourceAst> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_str(&text, file)
}

pub fn parse_str(text: &str, file: FileId) -> Result<SourceAst> {
    let tokens = lexer::tokenize(text)?;
    let token_lines = tokens
        .iter()
        .filter(|t| t.tok != lexer::Tok::Eof)
        .flat_map(|t| t.pos.line..=t.end_line)
        .collect();
    let root = parser::Parser::new(tokens).translation_unit()?;
    Ok(SourceAst {
        file,
        root,
        token_lines,
    })
}

/// Lines of one file judged to perform computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComputationalLineSet {
    pub file: FileId,
    pub lines: LineSet,
}

impl ComputationalLineSet {
    pub fn contains(&self, line: u32) -> bool {
        line >= 1 && self.lines.contains(&SourceLineKey::new(self.file, line))
    }

    pub fn line_numbers(&self) -> Vec<u32> {
        self.lines.iter().map(|k| k.line).collect()
    }
}

/// `S` and `D` for one declared variable or parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableSourceFacts {
    pub function: String,
    pub name: String,
    pub kind: VariableKind,
    pub decl_line: SourceLineKey,
    pub scope_lines: LineSet,
    pub defined_lines: LineSet,
    pub first_def_line: Option<SourceLineKey>,
}

#[derive(Serialize)]
struct FactsRecord<'a> {
    function: &'a str,
    name: &'a str,
    decl_line: u32,
    scope_lines: Vec<u32>,
    defined_lines: Vec<u32>,
    first_def_line: Option<u32>,
}

/// Renders facts as a JSON array of
/// `{function, name, decl_line, scope_lines, defined_lines, first_def_line}`.
pub fn facts_to_json(facts: &[VariableSourceFacts]) -> String {
    let records: Vec<FactsRecord<'_>> = facts
        .iter()
        .map(|f| FactsRecord {
            function: &f.function,
            name: &f.name,
            decl_line: f.decl_line.line,
            scope_lines: f.scope_lines.iter().map(|k| k.line).collect(),
            defined_lines: f.defined_lines.iter().map(|k| k.line).collect(),
            first_def_line: f.first_def_line.map(|k| k.line),
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&records).expect("facts serialize");
    s.push('\n');
    s
}
