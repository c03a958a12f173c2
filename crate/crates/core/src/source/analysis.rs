// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use super::{ComputationalLineSet, Node, NodeKind, SourceAst, Span, VariableSourceFacts};
use crate::lines::{LineSet, SourceLineKey};
use crate::model::VariableKind;

/// Lines containing any part of an assignment, call, operator, return,
/// initializer, loop header, condition or function header.
///
/// A construct spanning several lines contributes every one of its lines
/// that holds a token, so blank and comment lines never count.
pub fn computational_lines(ast: &SourceAst) -> ComputationalLineSet {
    let mut lines = BTreeSet::new();
    ast.root.walk(&mut |n| {
        let span = match &n.kind {
            NodeKind::FunctionDef { .. } | NodeKind::If | NodeKind::For | NodeKind::While | NodeKind::DoWhile => n.header,
            NodeKind::VarDecl { has_init: true, .. } | NodeKind::ExprStmt | NodeKind::Return => Some(n.span),
            _ => None,
        };
        if let Some(Span { start, end }) = span {
            lines.extend(ast.token_lines.range(start..=end).copied());
        }
    });
    ComputationalLineSet {
        file: ast.file,
        lines: lines.into_iter().map(|l| SourceLineKey::new(ast.file, l)).collect(),
    }
}

struct Var {
    function: String,
    name: String,
    kind: VariableKind,
    decl: u32,
    scope: Span,
    first_def: Option<u32>,
}

#[derive(Default)]
struct Walker {
    vars: Vec<Var>,
    scopes: Vec<Vec<usize>>,
    function: String,
}

impl Walker {
    fn declare(&mut self, name: &str, kind: VariableKind, decl: u32, scope_end: u32, first_def: Option<u32>) {
        self.vars.push(Var {
            function: self.function.clone(),
            name: name.to_owned(),
            kind,
            decl,
            scope: Span { start: decl, end: scope_end },
            first_def,
        });
        let idx = self.vars.len() - 1;
        self.scopes.last_mut().expect("declaration outside any scope").push(idx);
    }

    fn resolve(&self, name: &str) -> Option<usize> {
        self.scopes
            .iter()
            .rev()
            .flat_map(|s| s.iter().rev())
            .copied()
            .find(|&i| self.vars[i].name == name)
    }

    fn define(&mut self, target: &Node, line: u32) {
        if let Some(name) = root_ident(target) {
            if let Some(i) = self.resolve(name) {
                let v = &mut self.vars[i];
                v.first_def = Some(v.first_def.map_or(line, |d| d.min(line)));
            }
        }
    }

    fn function(&mut self, f: &Node) {
        let NodeKind::FunctionDef { name } = &f.kind else { return };
        self.function = name.clone();
        let header = f.header.unwrap_or(f.span);
        self.scopes.push(Vec::new());
        for child in &f.children {
            match &child.kind {
                NodeKind::ParamDecl { name } => {
                    self.declare(name, VariableKind::FormalParameter, child.span.start, f.span.end, Some(header.start));
                    // Parameters are in scope from the opening line of the function.
                    self.vars.last_mut().unwrap().scope.start = header.start;
                }
                _ => self.statement(child, f.span.end),
            }
        }
        self.scopes.pop();
    }

    fn declaration(&mut self, decl: &Node, scope_end: u32) {
        for v in &decl.children {
            if let NodeKind::VarDecl { name, has_init } = &v.kind {
                let line = v.span.start;
                self.declare(name, VariableKind::Local, line, scope_end, has_init.then_some(line));
                for init in &v.children {
                    self.expression(init);
                }
            }
        }
    }

    fn statement(&mut self, n: &Node, scope_end: u32) {
        match &n.kind {
            NodeKind::Block => {
                self.scopes.push(Vec::new());
                for c in &n.children {
                    self.statement(c, n.span.end);
                }
                self.scopes.pop();
            }
            NodeKind::DeclStmt => self.declaration(n, scope_end),
            NodeKind::For => {
                self.scopes.push(Vec::new());
                let [init, cond, step, body] = &n.children[..] else { unreachable!("for has four children") };
                if matches!(init.kind, NodeKind::DeclStmt) {
                    self.declaration(init, n.span.end);
                } else {
                    self.expression(init);
                }
                self.expression(cond);
                self.expression(step);
                self.statement(body, n.span.end);
                self.scopes.pop();
            }
            NodeKind::If | NodeKind::While | NodeKind::DoWhile | NodeKind::ExprStmt | NodeKind::Return => {
                for c in &n.children {
                    if is_statement(c) {
                        self.statement(c, scope_end);
                    } else {
                        self.expression(c);
                    }
                }
            }
            _ => {}
        }
    }

    fn expression(&mut self, n: &Node) {
        match &n.kind {
            NodeKind::Assignment { .. } => {
                self.define(&n.children[0], n.span.start);
            }
            NodeKind::UnaryOp { op: "++" | "--" | "&", .. } => {
                self.define(&n.children[0], n.span.start);
            }
            _ => {}
        }
        for c in &n.children {
            self.expression(c);
        }
    }
}

fn is_statement(n: &Node) -> bool {
    matches!(
        n.kind,
        NodeKind::Block
            | NodeKind::DeclStmt
            | NodeKind::ExprStmt
            | NodeKind::Return
            | NodeKind::If
            | NodeKind::For
            | NodeKind::While
            | NodeKind::DoWhile
            | NodeKind::Break
            | NodeKind::Continue
            | NodeKind::Empty
    )
}

/// The variable whose storage an lvalue writes: `x`, `x[i]`, `x.f`.
fn root_ident(n: &Node) -> Option<&str> {
    match &n.kind {
        NodeKind::Ident { name } => Some(name),
        NodeKind::Index | NodeKind::Member { arrow: false, .. } => root_ident(&n.children[0]),
        _ => None,
    }
}

/// `S` and `D` for every parameter and local, in declaration order.
///
/// `S` is the computational lines from the declaration to the end of the
/// enclosing scope (parameters: from the function's opening line). `D` is
/// the part of `S` at or after the textually earliest definition: an
/// initializer, an assignment, an increment or taking the address.
pub fn variable_source_facts(ast: &SourceAst) -> Vec<VariableSourceFacts> {
    let comp = computational_lines(ast);
    let mut w = Walker::default();
    for f in ast.functions() {
        w.function(f);
    }
    let key = |l: u32| SourceLineKey::new(ast.file, l);
    w.vars
        .into_iter()
        .map(|v| {
            let scope_lines: LineSet = comp
                .lines
                .range(key(v.scope.start)..=key(v.scope.end))
                .copied()
                .collect();
            let defined_lines = match v.first_def {
                Some(d) => scope_lines.range(key(d)..).copied().collect(),
                None => LineSet::new(),
            };
            VariableSourceFacts {
                function: v.function,
                name: v.name,
                kind: v.kind,
                decl_line: key(v.decl),
                scope_lines,
                defined_lines,
                first_def_line: v.first_def.map(key),
            }
        })
        .collect()
}
