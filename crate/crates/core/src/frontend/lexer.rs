//! Tokenizer for `.imp` source text.

use super::ast::Pos;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

// longest first, so that `==>` wins over `==` and `:=` over `:`
const SYMBOLS: &[&str] = &[
    "==>", ":=", "==", "!=", "<=", ">=", "&&", "||", "(", ")", "{", "}", "[", "]", ";", ",", "<", ">", "=", "+", "-",
    "*", "/", "%", "!",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let pos = Pos { line, col };
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            // `int[]` is a single type keyword
            if word == "int" && chars.get(i) == Some(&'[') && chars.get(i + 1) == Some(&']') {
                i += 2;
                col += 2;
                out.push(Token { tok: Tok::Ident("int[]".into()), pos });
            } else {
                out.push(Token { tok: Tok::Ident(word), pos });
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let v = digits.parse::<i64>().map_err(|_| Error::Parse {
                line,
                col,
                msg: format!("integer literal {digits} is too large"),
            })?;
            col += i - start;
            out.push(Token { tok: Tok::Int(v), pos });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push(Token { tok: Tok::Sym(s), pos });
            }
            None => {
                return Err(Error::Parse { line, col, msg: format!("unexpected character '{c}'") });
            }
        }
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_and_positions() {
        let toks = tokenize("x := a[i] + 1; // note\n  y ==> z").unwrap();
        let kinds: Vec<&Tok> = toks.iter().map(|t| &t.tok).collect();
        assert_eq!(kinds[1], &Tok::Sym(":="));
        assert_eq!(kinds[3], &Tok::Sym("["));
        let y = toks.iter().find(|t| t.tok == Tok::Ident("y".into())).unwrap();
        assert_eq!(y.pos, Pos { line: 2, col: 3 });
        assert!(kinds.contains(&&Tok::Sym("==>")));
    }

    #[test]
    fn array_type_keyword() {
        let toks = tokenize("int[] a;").unwrap();
        assert_eq!(toks[0].tok, Tok::Ident("int[]".into()));
    }

    #[test]
    fn bad_character() {
        let err = tokenize("x := 1 @ 2").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, col: 8, .. }));
    }
}
