//! Tokenizer for `.npt` sources. ASCII syntax with Unicode aliases.

use crate::diagnostic::{Diagnostic, ErrorCode, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(u64),
    LParen,
    RParen,
    Colon,
    Define,
    Arrow,
    Lolli,
    Lambda,
    Dot,
    Comma,
    Bar,
    AtI,
    /// Contents of `{-# ... #-}`, trimmed.
    Pragma(String),
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Define => "`:=`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Lolli => "`-o`".into(),
            Tok::Lambda => "`\\`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Bar => "`|`".into(),
            Tok::AtI => "`@I`".into(),
            Tok::Pragma(p) => format!("pragma `{p}`"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub const KEYWORDS: &[&str] = &[
    "def", "postulate", "data", "where", "U", "Nm", "Gel", "gel", "ung", "ext", "name", "indNm",
    "with", "motive", "Sig", "fst", "snd", "Id", "refl", "J", "pair",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

fn is_ident_start(c: char) -> bool {
    (c.is_alphabetic() || c == '_') && !matches!(c, 'λ' | 'Σ' | '𝕀')
}

fn is_ident_char(c: char) -> bool {
    is_ident_start(c) || c.is_ascii_digit() || c == '\''
}

pub fn is_valid_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if is_ident_start(c))
        && cs.all(is_ident_char)
        && !is_keyword(s)
}

pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    let syntax = |at: usize, len: usize, msg: String| {
        Diagnostic::new(ErrorCode::SyntaxError, msg).with_span(Span::new(at, at + len))
    };
    while let Some(&(i, c)) = it.peek() {
        let rest = &src[i..];
        if c.is_whitespace() {
            it.next();
            continue;
        }
        if rest.starts_with("--") {
            while let Some(&(_, c)) = it.peek() {
                if c == '\n' {
                    break;
                }
                it.next();
            }
            continue;
        }
        if rest.starts_with("{-#") {
            let end = rest
                .find("#-}")
                .ok_or_else(|| syntax(i, 3, "unterminated pragma".into()))?;
            let body = rest[3..end].trim().to_string();
            let stop = i + end + 3;
            while matches!(it.peek(), Some(&(j, _)) if j < stop) {
                it.next();
            }
            out.push(Token {
                tok: Tok::Pragma(body),
                span: Span::new(i, stop),
            });
            continue;
        }
        if rest.starts_with("{-") {
            let end = rest
                .find("-}")
                .ok_or_else(|| syntax(i, 2, "unterminated comment".into()))?;
            let stop = i + end + 2;
            while matches!(it.peek(), Some(&(j, _)) if j < stop) {
                it.next();
            }
            continue;
        }
        let two = |t: Tok| (t, 2usize);
        let fixed = if rest.starts_with(":=") {
            Some(two(Tok::Define))
        } else if rest.starts_with("->") {
            Some(two(Tok::Arrow))
        } else if rest.starts_with("-o") && !rest[2..].starts_with(is_ident_char) {
            Some(two(Tok::Lolli))
        } else if rest.starts_with("@I") && !rest[2..].starts_with(is_ident_char) {
            Some(two(Tok::AtI))
        } else {
            match c {
                '(' => Some((Tok::LParen, 1)),
                ')' => Some((Tok::RParen, 1)),
                ':' => Some((Tok::Colon, 1)),
                '\\' => Some((Tok::Lambda, 1)),
                '.' => Some((Tok::Dot, 1)),
                ',' => Some((Tok::Comma, 1)),
                '|' => Some((Tok::Bar, 1)),
                'λ' => Some((Tok::Lambda, c.len_utf8())),
                '→' => Some((Tok::Arrow, c.len_utf8())),
                '⊸' => Some((Tok::Lolli, c.len_utf8())),
                '𝕀' => Some((Tok::AtI, c.len_utf8())),
                'Σ' => Some((Tok::Ident("Sig".into()), c.len_utf8())),
                _ => None,
            }
        };
        if let Some((tok, len)) = fixed {
            for _ in 0..rest[..len].chars().count() {
                it.next();
            }
            out.push(Token {
                tok,
                span: Span::new(i, i + len),
            });
            continue;
        }
        if c.is_ascii_digit() {
            let len = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
            let n = rest[..len]
                .parse()
                .map_err(|_| syntax(i, len, "number too large".into()))?;
            for _ in 0..len {
                it.next();
            }
            out.push(Token {
                tok: Tok::Num(n),
                span: Span::new(i, i + len),
            });
            continue;
        }
        if is_ident_start(c) {
            let len = rest
                .char_indices()
                .find(|&(_, c)| !is_ident_char(c))
                .map_or(rest.len(), |(j, _)| j);
            for _ in rest[..len].chars() {
                it.next();
            }
            out.push(Token {
                tok: Tok::Ident(rest[..len].to_string()),
                span: Span::new(i, i + len),
            });
            continue;
        }
        return Err(syntax(i, c.len_utf8(), format!("unexpected character `{c}`")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn ascii_and_unicode_agree() {
        assert_eq!(toks("\\(x : @I). a -o b -> c"), toks("λ(x : 𝕀). a ⊸ b → c"));
    }

    #[test]
    fn comments_and_pragmas() {
        assert_eq!(
            toks("{-# budget 10 #-} -- hi\nn' {- block -} x"),
            vec![
                Tok::Pragma("budget 10".into()),
                Tok::Ident("n'".into()),
                Tok::Ident("x".into())
            ]
        );
    }

    #[test]
    fn lolli_needs_boundary() {
        assert_eq!(toks("a -o b"), vec![Tok::Ident("a".into()), Tok::Lolli, Tok::Ident("b".into())]);
        assert!(lex("a -oops").is_err());
    }
}
