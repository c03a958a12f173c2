// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Char(String),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
    /// Line of the token's last character (string literals may not span,
    /// but this keeps spans honest if they ever do).
    pub end_line: u32,
}

// Longest first so that maximal munch works with a linear scan.
const PUNCTUATORS: &[&str] = &[
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=",
    "%=", "&=", "|=", "^=", "(", ")", "[", "]", "{", "}", ",", ";", ":", "?", "=", "<", ">", "+", "-", "*", "/",
    "%", "&", "|", "^", "!", "~", ".",
];

fn error(pos: Pos, construct: &str, message: impl Into<String>) -> Error {
    Error::SourceParse {
        line: pos.line,
        column: pos.column,
        construct: construct.to_owned(),
        message: message.into(),
    }
}

/// Splits C source into tokens. `#include` lines are skipped; any other
/// preprocessor directive is rejected.
pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let mut line_start = true;

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
                line_start = true;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(error(pos, "comment", "unterminated block comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        if c == '#' && line_start {
            let start = i;
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            let directive: String = chars[start..i].iter().collect();
            let name: String = directive[1..]
                .trim_start()
                .chars()
                .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
                .collect();
            if name != "include" {
                let construct = format!("#{name}");
                return Err(error(pos, &construct, format!("preprocessor directive `{construct}` is not supported")));
            }
            continue;
        }
        line_start = false;

        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                pos,
                end_line: line,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() {
                let d = chars[i];
                let prev = chars[i - 1];
                let hex = chars[start..i].iter().any(|c| matches!(c, 'x' | 'X'));
                let exp_sign = matches!(d, '+' | '-')
                    && ((!hex && matches!(prev, 'e' | 'E')) || (hex && matches!(prev, 'p' | 'P')));
                if d.is_ascii_alphanumeric() || d == '.' || d == '_' || exp_sign {
                    bump!();
                } else {
                    break;
                }
            }
            out.push(Token {
                tok: Tok::Number(chars[start..i].iter().collect()),
                pos,
                end_line: line,
            });
            continue;
        }
        if c == '"' || c == '\'' {
            let quote = c;
            let start = i;
            bump!();
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(error(pos, "literal", "unterminated literal")),
                    Some('\\') => {
                        bump!();
                        if i < chars.len() {
                            bump!();
                        }
                    }
                    Some(&ch) if ch == quote => {
                        bump!();
                        break;
                    }
                    Some(_) => bump!(),
                }
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if quote == '"' { Tok::Str(text) } else { Tok::Char(text) };
            out.push(Token { tok, pos, end_line: line });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match PUNCTUATORS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                for _ in 0..p.len() {
                    bump!();
                }
                out.push(Token {
                    tok: Tok::Punct(p),
                    pos,
                    end_line: line,
                });
            }
            None => return Err(error(pos, "character", format!("unexpected character `{c}`"))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, column: col },
        end_line: line,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn maximal_munch_and_comments() {
        assert_eq!(
            kinds("x<<=1; // c\n/* a\n b */ y->z"),
            vec![
                Tok::Ident("x".into()),
                Tok::Punct("<<="),
                Tok::Number("1".into()),
                Tok::Punct(";"),
                Tok::Ident("y".into()),
                Tok::Punct("->"),
                Tok::Ident("z".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_track_lines() {
        let toks = tokenize("int\n  x = 1e-3;\n").unwrap();
        assert_eq!(toks[1].pos, Pos { line: 2, column: 3 });
        assert_eq!(toks[3].tok, Tok::Number("1e-3".into()));
    }

    #[test]
    fn include_skipped_other_directives_rejected() {
        assert_eq!(kinds("#include <stdio.h>\nint"), vec![Tok::Ident("int".into()), Tok::Eof]);
        match tokenize("#define N 3\n") {
            Err(Error::SourceParse { construct, line: 1, .. }) => assert_eq!(construct, "#define"),
            other => panic!("{other:?}"),
        }
        assert!(tokenize("  # if 0\n").is_err());
    }
}
