// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent parser for the supported C subset.

use super::lexer::{Pos, Tok, Token};
use super::{Node, NodeKind, Span};
use crate::error::{Error, Result};

const UNSUPPORTED: &[&str] = &[
    "goto", "switch", "case", "default", "typedef", "asm", "__asm__", "_Generic", "_Static_assert",
];

const TYPE_WORDS: &[&str] = &[
    "void", "char", "short", "int", "long", "float", "double", "signed", "unsigned", "_Bool", "const", "volatile",
    "restrict", "__restrict", "static", "extern", "register", "auto", "inline", "__inline", "struct", "union",
    "enum", "_Complex",
];

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="];

struct Declarator {
    name: Option<(String, Pos)>,
    params: Option<Vec<Node>>,
}

pub struct Parser {
    toks: Vec<Token>,
    i: usize,
    last_line: u32,
}

fn binary_precedence(op: &str) -> Option<u8> {
    Some(match op {
        "||" => 1,
        "&&" => 2,
        "|" => 3,
        "^" => 4,
        "&" => 5,
        "==" | "!=" => 6,
        "<" | ">" | "<=" | ">=" => 7,
        "<<" | ">>" => 8,
        "+" | "-" => 9,
        "*" | "/" | "%" => 10,
        _ => return None,
    })
}

impl Parser {
    pub fn new(toks: Vec<Token>) -> Self {
        Parser {
            toks,
            i: 0,
            last_line: 1,
        }
    }

    fn tok(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn tok_at(&self, n: usize) -> &Tok {
        &self.toks[(self.i + n).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn line(&self) -> u32 {
        self.pos().line
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if t.tok != Tok::Eof {
            self.i += 1;
            self.last_line = t.end_line;
        }
        t
    }

    fn is(&self, p: &str) -> bool {
        matches!(self.tok(), Tok::Punct(q) if *q == p)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.tok(), Tok::Ident(s) if s == w)
    }

    fn eat(&mut self, p: &str) -> bool {
        let hit = self.is(p);
        if hit {
            self.bump();
        }
        hit
    }

    fn describe(&self) -> String {
        match self.tok() {
            Tok::Ident(s) | Tok::Number(s) | Tok::Str(s) | Tok::Char(s) => format!("`{s}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of file".to_owned(),
        }
    }

    fn error(&self, construct: &str, message: impl Into<String>) -> Error {
        let pos = self.pos();
        Error::SourceParse {
            line: pos.line,
            column: pos.column,
            construct: construct.to_owned(),
            message: message.into(),
        }
    }

    fn expect(&mut self, p: &str) -> Result<()> {
        if self.eat(p) {
            Ok(())
        } else {
            Err(self.error(p, format!("expected `{p}`, found {}", self.describe())))
        }
    }

    fn reject_unsupported(&self) -> Result<()> {
        if let Tok::Ident(w) = self.tok() {
            if UNSUPPORTED.contains(&w.as_str()) {
                return Err(self.error(w, format!("`{w}` is outside the supported C subset")));
            }
        }
        Ok(())
    }

    fn at_type_start(&self) -> bool {
        matches!(self.tok(), Tok::Ident(w) if TYPE_WORDS.contains(&w.as_str()))
    }

    fn node(kind: NodeKind, start: u32, end: u32, children: Vec<Node>) -> Node {
        Node {
            kind,
            span: Span { start, end },
            header: None,
            children,
        }
    }

    pub fn translation_unit(&mut self) -> Result<Node> {
        let mut items = Vec::new();
        while *self.tok() != Tok::Eof {
            if self.eat(";") {
                continue;
            }
            self.reject_unsupported()?;
            let start = self.line();
            if !self.at_type_start() {
                return Err(self.error("declaration", format!("expected a declaration, found {}", self.describe())));
            }
            self.specifiers()?;
            let decl = self.declarator()?;
            if decl.params.is_some() && self.is("{") {
                let header_end = self.last_line;
                let body = self.block()?;
                let (name, _) = decl.name.ok_or_else(|| self.error("function", "function definition without a name"))?;
                let mut children = decl.params.unwrap_or_default();
                let end = body.span.end;
                children.push(body);
                let mut f = Self::node(NodeKind::FunctionDef { name }, start, end, children);
                f.header = Some(Span { start, end: header_end });
                items.push(f);
                continue;
            }
            // Prototype or global declaration: parsed for syntax, not analyzed.
            let mut first = true;
            loop {
                if !first {
                    self.declarator()?;
                }
                first = false;
                if self.eat("=") {
                    self.initializer()?;
                }
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(";")?;
        }
        let end = self.last_line;
        Ok(Self::node(NodeKind::TranslationUnit, 1, end, items))
    }

    fn specifiers(&mut self) -> Result<()> {
        let mut any = false;
        while self.at_type_start() {
            let Tok::Ident(w) = self.bump().tok else { unreachable!() };
            any = true;
            if matches!(w.as_str(), "struct" | "union" | "enum") {
                match self.tok() {
                    Tok::Ident(_) => {
                        self.bump();
                    }
                    _ => return Err(self.error(&w, format!("anonymous `{w}` types are not supported"))),
                }
                if self.is("{") {
                    return Err(self.error(&w, format!("`{w}` definitions are not supported")));
                }
            }
        }
        if !any {
            return Err(self.error("type", format!("expected a type, found {}", self.describe())));
        }
        Ok(())
    }

    fn declarator(&mut self) -> Result<Declarator> {
        while self.eat("*") {
            while matches!(self.tok(), Tok::Ident(w) if matches!(w.as_str(), "const" | "volatile" | "restrict" | "__restrict")) {
                self.bump();
            }
        }
        let mut name = None;
        let mut nested_function_pointer = false;
        if self.is("(") && matches!(self.tok_at(1), Tok::Punct("*")) {
            self.bump();
            let inner = self.declarator()?;
            self.expect(")")?;
            name = inner.name;
            nested_function_pointer = true;
        } else if let Tok::Ident(w) = self.tok() {
            if !TYPE_WORDS.contains(&w.as_str()) {
                let pos = self.pos();
                let w = w.clone();
                self.bump();
                name = Some((w, pos));
            }
        }
        let mut params = None;
        loop {
            if self.eat("[") {
                if !self.is("]") {
                    self.assignment()?;
                }
                self.expect("]")?;
            } else if self.is("(") {
                self.bump();
                let p = self.parameters()?;
                if params.is_none() && !nested_function_pointer {
                    params = Some(p);
                }
            } else {
                break;
            }
        }
        Ok(Declarator { name, params })
    }

    fn parameters(&mut self) -> Result<Vec<Node>> {
        let mut out = Vec::new();
        if self.eat(")") {
            return Ok(out);
        }
        if self.is_word("void") && matches!(self.tok_at(1), Tok::Punct(")")) {
            self.bump();
            self.bump();
            return Ok(out);
        }
        loop {
            if self.eat("...") {
                break;
            }
            self.specifiers()?;
            let d = self.declarator()?;
            if let Some((name, pos)) = d.name {
                out.push(Self::node(NodeKind::ParamDecl { name }, pos.line, self.last_line, vec![]));
            }
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")?;
        Ok(out)
    }

    fn block(&mut self) -> Result<Node> {
        let start = self.line();
        self.expect("{")?;
        let mut stmts = Vec::new();
        while !self.is("}") {
            if *self.tok() == Tok::Eof {
                return Err(self.error("block", "unterminated block"));
            }
            stmts.push(self.statement()?);
        }
        self.bump();
        Ok(Self::node(NodeKind::Block, start, self.last_line, stmts))
    }

    fn with_header(mut n: Node, start: u32, end: u32) -> Node {
        n.header = Some(Span { start, end });
        n
    }

    fn statement(&mut self) -> Result<Node> {
        self.reject_unsupported()?;
        let start = self.line();
        if self.is("{") {
            return self.block();
        }
        if self.eat(";") {
            return Ok(Self::node(NodeKind::Empty, start, start, vec![]));
        }
        if self.at_type_start() {
            return self.declaration_statement();
        }
        if let Tok::Ident(w) = self.tok().clone() {
            if matches!(self.tok_at(1), Tok::Punct(":")) {
                return Err(self.error("label", format!("label `{w}` is outside the supported C subset")));
            }
            match w.as_str() {
                "if" => {
                    self.bump();
                    self.expect("(")?;
                    let cond = self.expression()?;
                    self.expect(")")?;
                    let header_end = self.last_line;
                    let mut children = vec![cond, self.statement()?];
                    if self.is_word("else") {
                        self.bump();
                        children.push(self.statement()?);
                    }
                    let n = Self::node(NodeKind::If, start, self.last_line, children);
                    return Ok(Self::with_header(n, start, header_end));
                }
                "for" => {
                    self.bump();
                    self.expect("(")?;
                    let init = if self.at_type_start() {
                        self.declaration_statement()?
                    } else if self.is(";") {
                        let l = self.line();
                        self.bump();
                        Self::node(NodeKind::Empty, l, l, vec![])
                    } else {
                        let e = self.expression()?;
                        self.expect(";")?;
                        e
                    };
                    let cond = if self.is(";") {
                        Self::node(NodeKind::Empty, self.line(), self.line(), vec![])
                    } else {
                        self.expression()?
                    };
                    self.expect(";")?;
                    let step = if self.is(")") {
                        Self::node(NodeKind::Empty, self.line(), self.line(), vec![])
                    } else {
                        self.expression()?
                    };
                    self.expect(")")?;
                    let header_end = self.last_line;
                    let body = self.statement()?;
                    let n = Self::node(NodeKind::For, start, self.last_line, vec![init, cond, step, body]);
                    return Ok(Self::with_header(n, start, header_end));
                }
                "while" => {
                    self.bump();
                    self.expect("(")?;
                    let cond = self.expression()?;
                    self.expect(")")?;
                    let header_end = self.last_line;
                    let body = self.statement()?;
                    let n = Self::node(NodeKind::While, start, self.last_line, vec![cond, body]);
                    return Ok(Self::with_header(n, start, header_end));
                }
                "do" => {
                    self.bump();
                    let body = self.statement()?;
                    if !self.is_word("while") {
                        return Err(self.error("do", "expected `while` after `do` body"));
                    }
                    let header_start = self.line();
                    self.bump();
                    self.expect("(")?;
                    let cond = self.expression()?;
                    self.expect(")")?;
                    self.expect(";")?;
                    let n = Self::node(NodeKind::DoWhile, start, self.last_line, vec![body, cond]);
                    return Ok(Self::with_header(n, header_start, self.last_line));
                }
                "return" => {
                    self.bump();
                    let children = if self.is(";") { vec![] } else { vec![self.expression()?] };
                    self.expect(";")?;
                    return Ok(Self::node(NodeKind::Return, start, self.last_line, children));
                }
                "break" | "continue" => {
                    self.bump();
                    self.expect(";")?;
                    let kind = if w == "break" { NodeKind::Break } else { NodeKind::Continue };
                    return Ok(Self::node(kind, start, self.last_line, vec![]));
                }
                "else" => return Err(self.error("else", "`else` without `if`")),
                _ => {}
            }
        }
        let e = self.expression()?;
        self.expect(";")?;
        Ok(Self::node(NodeKind::ExprStmt, start, self.last_line, vec![e]))
    }

    fn declaration_statement(&mut self) -> Result<Node> {
        let start = self.line();
        self.specifiers()?;
        let mut decls = Vec::new();
        loop {
            let d = self.declarator()?;
            let has_init = self.eat("=");
            let init = if has_init { Some(self.initializer()?) } else { None };
            match (d.name, d.params) {
                // A local prototype declares nothing we track.
                (Some(_), Some(_)) | (None, _) => {}
                (Some((name, pos)), None) => {
                    decls.push(Self::node(
                        NodeKind::VarDecl { name, has_init },
                        pos.line,
                        self.last_line,
                        init.into_iter().collect(),
                    ));
                }
            }
            if !self.eat(",") {
                break;
            }
        }
        self.expect(";")?;
        Ok(Self::node(NodeKind::DeclStmt, start, self.last_line, decls))
    }

    fn initializer(&mut self) -> Result<Node> {
        if !self.is("{") {
            return self.assignment();
        }
        let start = self.line();
        self.bump();
        let mut items = Vec::new();
        while !self.is("}") {
            if self.eat(".") {
                self.bump();
                self.expect("=")?;
            } else if self.is("[") {
                self.bump();
                self.conditional()?;
                self.expect("]")?;
                self.expect("=")?;
            }
            items.push(self.initializer()?);
            if !self.eat(",") {
                break;
            }
        }
        self.expect("}")?;
        Ok(Self::node(NodeKind::InitList, start, self.last_line, items))
    }

    pub fn expression(&mut self) -> Result<Node> {
        let start = self.line();
        let first = self.assignment()?;
        if !self.is(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat(",") {
            items.push(self.assignment()?);
        }
        Ok(Self::node(NodeKind::Comma, start, self.last_line, items))
    }

    fn assignment(&mut self) -> Result<Node> {
        let start = self.line();
        let lhs = self.conditional()?;
        if let Tok::Punct(op) = *self.tok() {
            if ASSIGN_OPS.contains(&op) {
                self.bump();
                let rhs = self.assignment()?;
                return Ok(Self::node(NodeKind::Assignment { op }, start, self.last_line, vec![lhs, rhs]));
            }
        }
        Ok(lhs)
    }

    fn conditional(&mut self) -> Result<Node> {
        let start = self.line();
        let cond = self.binary(1)?;
        if !self.eat("?") {
            return Ok(cond);
        }
        let then = self.expression()?;
        self.expect(":")?;
        let other = self.conditional()?;
        Ok(Self::node(NodeKind::Conditional, start, self.last_line, vec![cond, then, other]))
    }

    fn binary(&mut self, min_prec: u8) -> Result<Node> {
        let start = self.line();
        let mut lhs = self.unary()?;
        while let Tok::Punct(op) = *self.tok() {
            let Some(prec) = binary_precedence(op) else { break };
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = Self::node(NodeKind::BinaryOp { op }, start, self.last_line, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn type_name(&mut self) -> Result<()> {
        self.specifiers()?;
        let d = self.declarator()?;
        if let Some((name, _)) = d.name {
            return Err(self.error("cast", format!("unexpected identifier `{name}` in type name")));
        }
        Ok(())
    }

    fn unary(&mut self) -> Result<Node> {
        let start = self.line();
        if let Tok::Punct(op @ ("++" | "--" | "+" | "-" | "!" | "~" | "*" | "&")) = *self.tok() {
            self.bump();
            let operand = self.unary()?;
            return Ok(Self::node(NodeKind::UnaryOp { op, postfix: false }, start, self.last_line, vec![operand]));
        }
        if self.is_word("sizeof") {
            self.bump();
            if self.is("(") && matches!(self.tok_at(1), Tok::Ident(w) if TYPE_WORDS.contains(&w.as_str())) {
                self.bump();
                self.type_name()?;
                self.expect(")")?;
                return Ok(Self::node(NodeKind::Sizeof, start, self.last_line, vec![]));
            }
            let operand = self.unary()?;
            return Ok(Self::node(NodeKind::Sizeof, start, self.last_line, vec![operand]));
        }
        if self.is("(") && matches!(self.tok_at(1), Tok::Ident(w) if TYPE_WORDS.contains(&w.as_str())) {
            self.bump();
            self.type_name()?;
            self.expect(")")?;
            if self.is("{") {
                return Err(self.error("compound literal", "compound literals are not supported"));
            }
            let operand = self.unary()?;
            return Ok(Self::node(NodeKind::Cast, start, self.last_line, vec![operand]));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Node> {
        let start = self.line();
        let mut e = self.primary()?;
        loop {
            if self.eat("[") {
                let idx = self.expression()?;
                self.expect("]")?;
                e = Self::node(NodeKind::Index, start, self.last_line, vec![e, idx]);
            } else if self.eat("(") {
                let mut children = vec![e];
                if !self.is(")") {
                    loop {
                        children.push(self.assignment()?);
                        if !self.eat(",") {
                            break;
                        }
                    }
                }
                self.expect(")")?;
                e = Self::node(NodeKind::Call, start, self.last_line, children);
            } else if self.is(".") || self.is("->") {
                let arrow = self.is("->");
                self.bump();
                let Tok::Ident(field) = self.tok().clone() else {
                    return Err(self.error("member", format!("expected a field name, found {}", self.describe())));
                };
                self.bump();
                e = Self::node(NodeKind::Member { field, arrow }, start, self.last_line, vec![e]);
            } else if let Tok::Punct(op @ ("++" | "--")) = *self.tok() {
                self.bump();
                e = Self::node(NodeKind::UnaryOp { op, postfix: true }, start, self.last_line, vec![e]);
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Node> {
        self.reject_unsupported()?;
        let start = self.line();
        match self.tok().clone() {
            Tok::Ident(name) if !TYPE_WORDS.contains(&name.as_str()) && !is_statement_keyword(&name) => {
                self.bump();
                Ok(Self::node(NodeKind::Ident { name }, start, self.last_line, vec![]))
            }
            Tok::Number(text) | Tok::Char(text) => {
                self.bump();
                Ok(Self::node(NodeKind::Literal { text }, start, self.last_line, vec![]))
            }
            Tok::Str(mut text) => {
                self.bump();
                while let Tok::Str(more) = self.tok().clone() {
                    self.bump();
                    text.push_str(&more);
                }
                Ok(Self::node(NodeKind::Literal { text }, start, self.last_line, vec![]))
            }
            Tok::Punct("(") => {
                self.bump();
                if self.is("{") {
                    return Err(self.error("statement expression", "statement expressions are not supported"));
                }
                let e = self.expression()?;
                self.expect(")")?;
                Ok(e)
            }
            _ => Err(self.error("expression", format!("expected an expression, found {}", self.describe()))),
        }
    }
}

fn is_statement_keyword(w: &str) -> bool {
    matches!(w, "if" | "else" | "for" | "while" | "do" | "return" | "break" | "continue" | "sizeof")
}
