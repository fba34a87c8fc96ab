//! Recursive-descent parser producing surface declarations.

use crate::diagnostic::{Diagnostic, ErrorCode, Span};

use super::lexer::{is_keyword, lex, Tok, Token};

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

/// Binder annotation: none, the name interval `@I`, or a type.
#[derive(Clone, Debug, PartialEq)]
pub enum BinderTy {
    None,
    Aff,
    Ty(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Binder {
    pub name: String,
    pub ty: BinderTy,
    pub span: Span,
}

/// A name-variable reference in an affine slot.
#[derive(Clone, Debug, PartialEq)]
pub struct NameRef {
    pub name: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Ident(String),
    Universe,
    NmTy,
    /// `(x : A) -> B`, `A -> B` (binder `_`), `(x : @I) -o B`, `@I -o B`.
    Pi(Binder, Box<Expr>),
    Lam(Binder, Box<Expr>),
    App(Box<Expr>, Box<Expr>),
    Sigma(String, Box<Expr>, Box<Expr>),
    Pair(Box<Expr>, Box<Expr>),
    Fst(Box<Expr>),
    Snd(Box<Expr>),
    Gel(Box<Expr>, NameRef),
    GelIntro(Box<Expr>, NameRef),
    Ung(Box<Expr>),
    Ext {
        method: Box<Expr>,
        name: NameRef,
        arg: Box<Expr>,
        motive: Option<Box<Expr>>,
    },
    Name(NameRef),
    IndNm {
        name: NameRef,
        scrut: Box<Expr>,
        base: Box<Expr>,
        step: Box<Expr>,
        motive: Box<Expr>,
    },
    Id(Box<Expr>, Box<Expr>, Box<Expr>),
    Refl,
    J(Box<Expr>, Box<Expr>, Box<Expr>),
    Ann(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CtorDecl {
    pub name: String,
    pub ty: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DeclKind {
    Def {
        name: String,
        binders: Vec<Binder>,
        ty: Expr,
        body: Expr,
    },
    Postulate {
        name: String,
        binders: Vec<Binder>,
        ty: Expr,
    },
    Data {
        name: String,
        params: Vec<Binder>,
        ctors: Vec<CtorDecl>,
    },
    Pragma(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceDecl {
    pub kind: DeclKind,
    pub span: Span,
}

pub fn parse(src: &str) -> Result<Vec<SurfaceDecl>, Diagnostic> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        eof: src.len(),
    };
    let mut out = Vec::new();
    while !p.at_end() {
        out.push(p.decl()?);
    }
    Ok(out)
}

/// Parses a single expression (used by the REPL).
pub fn parse_expr(src: &str) -> Result<Expr, Diagnostic> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        eof: src.len(),
    };
    let e = p.expr()?;
    if !p.at_end() {
        return Err(p.unexpected("end of input"));
    }
    Ok(e)
}

/// Parses a binder group such as `(x : @I)` or `(a b : A)` (used by the REPL).
pub fn parse_binders(src: &str) -> Result<Vec<Binder>, Diagnostic> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        eof: src.len(),
    };
    let bs = p.typed_binder_groups()?;
    if !p.at_end() || bs.is_empty() {
        return Err(p.unexpected("a binder group `(x : A)`"));
    }
    Ok(bs)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof: usize,
}

fn bx(e: Expr) -> Box<Expr> {
    Box::new(e)
}

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn span_here(&self) -> Span {
        self.toks
            .get(self.pos)
            .map_or(Span::new(self.eof, self.eof), |t| t.span)
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].span.end
        }
    }

    fn span_from(&self, start: usize) -> Span {
        Span::new(start, self.prev_end().max(start))
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        let found = self
            .peek()
            .map_or("end of input".to_string(), Tok::describe);
        Diagnostic::new(
            ErrorCode::SyntaxError,
            format!("expected {wanted}, found {found}"),
        )
        .with_span(self.span_here())
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        self.pos += 1;
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<Span, Diagnostic> {
        if self.peek() == Some(&t) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&t.describe()))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn is_kw_at(&self, k: usize, kw: &str) -> bool {
        matches!(self.peek_at(k), Some(Tok::Ident(s)) if s == kw)
    }

    fn expect_kw(&mut self, kw: &str) -> Result<Span, Diagnostic> {
        if self.is_kw(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    /// A non-keyword identifier.
    fn ident(&mut self, what: &str) -> Result<(String, Span), Diagnostic> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_keyword(s) => {
                let s = s.clone();
                let sp = self.bump().span;
                Ok((s, sp))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn name_ref(&mut self) -> Result<NameRef, Diagnostic> {
        let (name, span) = self.ident("a name variable")?;
        Ok(NameRef { name, span })
    }

    fn decl(&mut self) -> Result<SurfaceDecl, Diagnostic> {
        let start = self.span_here().start;
        if let Some(Tok::Pragma(p)) = self.peek() {
            let p = p.clone();
            let span = self.bump().span;
            return Ok(SurfaceDecl {
                kind: DeclKind::Pragma(p),
                span,
            });
        }
        let kind = if self.is_kw("def") {
            self.bump();
            let (name, _) = self.ident("a definition name")?;
            let binders = self.typed_binder_groups()?;
            self.expect(Tok::Colon)?;
            let ty = self.expr()?;
            self.expect(Tok::Define)?;
            let body = self.expr()?;
            DeclKind::Def {
                name,
                binders,
                ty,
                body,
            }
        } else if self.is_kw("postulate") {
            self.bump();
            let (name, _) = self.ident("a postulate name")?;
            let binders = self.typed_binder_groups()?;
            self.expect(Tok::Colon)?;
            let ty = self.expr()?;
            DeclKind::Postulate { name, binders, ty }
        } else if self.is_kw("data") {
            self.bump();
            let (name, _) = self.ident("a data type name")?;
            let params = self.typed_binder_groups()?;
            self.expect(Tok::Colon)?;
            self.expect_kw("U")?;
            self.expect_kw("where")?;
            let mut ctors = Vec::new();
            while self.eat(&Tok::Bar) {
                let cstart = self.span_here().start;
                let (cname, _) = self.ident("a constructor name")?;
                self.expect(Tok::Colon)?;
                let ty = self.expr()?;
                ctors.push(CtorDecl {
                    name: cname,
                    ty,
                    span: self.span_from(cstart),
                });
            }
            DeclKind::Data {
                name,
                params,
                ctors,
            }
        } else {
            return Err(self.unexpected("`def`, `postulate`, `data` or a pragma"));
        };
        Ok(SurfaceDecl {
            kind,
            span: self.span_from(start),
        })
    }

    /// Zero or more `(x y : A)` / `(x : @I)` groups.
    fn typed_binder_groups(&mut self) -> Result<Vec<Binder>, Diagnostic> {
        let mut out = Vec::new();
        while self.peek() == Some(&Tok::LParen) {
            let start = self.pos;
            match self.binder_group(true) {
                Ok(bs) => out.extend(bs),
                Err(e) => {
                    self.pos = start;
                    return Err(e);
                }
            }
        }
        Ok(out)
    }

    /// `(x y : A)`; with `typed == false` also accepts a bare identifier.
    fn binder_group(&mut self, typed: bool) -> Result<Vec<Binder>, Diagnostic> {
        if !typed {
            if let Some(Tok::Ident(_)) = self.peek() {
                let (name, span) = self.binder_name()?;
                return Ok(vec![Binder {
                    name,
                    ty: BinderTy::None,
                    span,
                }]);
            }
        }
        let open = self.expect(Tok::LParen)?;
        let mut names = vec![self.binder_name()?];
        while let Some(Tok::Ident(_)) = self.peek() {
            names.push(self.binder_name()?);
        }
        self.expect(Tok::Colon)?;
        let ty = if self.peek() == Some(&Tok::AtI) && self.peek_at(1) == Some(&Tok::RParen) {
            self.bump();
            BinderTy::Aff
        } else {
            BinderTy::Ty(bx(self.expr()?))
        };
        self.expect(Tok::RParen)?;
        let _ = open;
        Ok(names
            .into_iter()
            .map(|(name, span)| Binder {
                name,
                ty: ty.clone(),
                span,
            })
            .collect())
    }

    fn binder_name(&mut self) -> Result<(String, Span), Diagnostic> {
        self.ident("a binder name")
    }

    pub fn expr(&mut self) -> Result<Expr, Diagnostic> {
        let start = self.span_here().start;
        match self.peek() {
            Some(Tok::Lambda) => {
                self.bump();
                let mut binders = Vec::new();
                while self.peek() != Some(&Tok::Dot) {
                    binders.extend(self.binder_group(false)?);
                }
                if binders.is_empty() {
                    return Err(self.unexpected("a binder"));
                }
                self.expect(Tok::Dot)?;
                let body = self.expr()?;
                let span = self.span_from(start);
                Ok(binders.into_iter().rev().fold(body, |acc, b| Expr {
                    kind: ExprKind::Lam(b, bx(acc)),
                    span,
                }))
            }
            Some(Tok::AtI) => {
                self.bump();
                self.expect(Tok::Lolli)?;
                let body = self.expr()?;
                let span = self.span_from(start);
                Ok(Expr {
                    kind: ExprKind::Pi(
                        Binder {
                            name: "_".into(),
                            ty: BinderTy::Aff,
                            span: Span::new(start, start),
                        },
                        bx(body),
                    ),
                    span,
                })
            }
            Some(Tok::LParen) => {
                if let Some(e) = self.try_pi_telescope(start)? {
                    return Ok(e);
                }
                self.arrow_expr(start)
            }
            Some(Tok::Ident(s)) if s == "Sig" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let (x, _) = self.binder_name()?;
                self.expect(Tok::Colon)?;
                let a = self.expr()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Dot)?;
                let b = self.expr()?;
                Ok(Expr {
                    kind: ExprKind::Sigma(x, bx(a), bx(b)),
                    span: self.span_from(start),
                })
            }
            _ => self.arrow_expr(start),
        }
    }

    /// `(x : A) (y : @I) ... -> B` / `-o B`, restoring the position when the
    /// leading parenthesis is not a binder telescope.
    fn try_pi_telescope(&mut self, start: usize) -> Result<Option<Expr>, Diagnostic> {
        let save = self.pos;
        let looks_like_binder = matches!(self.peek_at(1), Some(Tok::Ident(s)) if !is_keyword(s))
            && {
                let mut k = 2;
                while matches!(self.peek_at(k), Some(Tok::Ident(s)) if !is_keyword(s)) {
                    k += 1;
                }
                self.peek_at(k) == Some(&Tok::Colon)
            };
        if !looks_like_binder {
            return Ok(None);
        }
        let binders = match self.typed_binder_groups() {
            Ok(bs) => bs,
            Err(_) => {
                self.pos = save;
                return Ok(None);
            }
        };
        let arrow = match self.peek() {
            Some(Tok::Arrow) => Tok::Arrow,
            Some(Tok::Lolli) => Tok::Lolli,
            _ => {
                self.pos = save;
                return Ok(None);
            }
        };
        let last_aff = matches!(binders.last().map(|b| &b.ty), Some(BinderTy::Aff));
        if last_aff != (arrow == Tok::Lolli) {
            return Err(Diagnostic::new(
                ErrorCode::SyntaxError,
                "use `-o` after name binders `(x : @I)` and `->` after typed binders",
            )
            .with_span(self.span_here()));
        }
        self.bump();
        let body = self.expr()?;
        let span = self.span_from(start);
        Ok(Some(binders.into_iter().rev().fold(body, |acc, b| Expr {
            kind: ExprKind::Pi(b, bx(acc)),
            span,
        })))
    }

    fn arrow_expr(&mut self, start: usize) -> Result<Expr, Diagnostic> {
        let lhs = self.app_expr()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.expr()?;
            return Ok(Expr {
                kind: ExprKind::Pi(
                    Binder {
                        name: "_".into(),
                        ty: BinderTy::Ty(bx(lhs)),
                        span: Span::new(start, start),
                    },
                    bx(rhs),
                ),
                span: self.span_from(start),
            });
        }
        if self.peek() == Some(&Tok::Lolli) {
            return Err(Diagnostic::new(
                ErrorCode::SyntaxError,
                "`-o` must follow a name binder `(x : @I)` or `@I`",
            )
            .with_span(self.span_here()));
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Some(Tok::LParen) => true,
            Some(Tok::Ident(s)) => !is_keyword(s) || matches!(s.as_str(), "U" | "Nm" | "refl"),
            _ => false,
        }
    }

    fn is_special_head(&self, s: &str) -> bool {
        matches!(
            s,
            "Gel" | "gel" | "ung" | "ext" | "name" | "indNm" | "fst" | "snd" | "Id" | "J" | "pair"
        )
    }

    fn app_expr(&mut self) -> Result<Expr, Diagnostic> {
        let start = self.span_here().start;
        let mut head = match self.peek() {
            Some(Tok::Ident(s)) if self.is_special_head(s) => {
                let s = s.clone();
                self.special(&s, start)?
            }
            _ => self.atom()?,
        };
        if matches!(head.kind, ExprKind::IndNm { .. })
            || matches!(&head.kind, ExprKind::Ext { motive: Some(_), .. })
        {
            return Ok(head);
        }
        while self.starts_atom() {
            let arg = self.atom()?;
            head = Expr {
                kind: ExprKind::App(bx(head), bx(arg)),
                span: self.span_from(start),
            };
        }
        Ok(head)
    }

    fn special(&mut self, kw: &str, start: usize) -> Result<Expr, Diagnostic> {
        self.bump();
        let kind = match kw {
            "Gel" => {
                let a = self.atom()?;
                ExprKind::Gel(bx(a), self.name_ref()?)
            }
            "gel" => {
                let a = self.atom()?;
                ExprKind::GelIntro(bx(a), self.name_ref()?)
            }
            "ung" => ExprKind::Ung(bx(self.atom()?)),
            "fst" => ExprKind::Fst(bx(self.atom()?)),
            "snd" => ExprKind::Snd(bx(self.atom()?)),
            "name" => ExprKind::Name(self.name_ref()?),
            "pair" => {
                let a = self.atom()?;
                ExprKind::Pair(bx(a), bx(self.atom()?))
            }
            "Id" => {
                let a = self.atom()?;
                let l = self.atom()?;
                ExprKind::Id(bx(a), bx(l), bx(self.atom()?))
            }
            "J" => {
                let p = self.atom()?;
                let d = self.atom()?;
                ExprKind::J(bx(p), bx(d), bx(self.atom()?))
            }
            "ext" => {
                let method = self.atom()?;
                let name = self.name_ref()?;
                let arg = self.atom()?;
                let motive = if self.is_kw("with") && self.is_kw_at(1, "motive") {
                    self.bump();
                    self.bump();
                    Some(bx(self.expr()?))
                } else {
                    None
                };
                ExprKind::Ext {
                    method: bx(method),
                    name,
                    arg: bx(arg),
                    motive,
                }
            }
            "indNm" => {
                let name = self.name_ref()?;
                let scrut = self.atom()?;
                let base = self.atom()?;
                let step = self.atom()?;
                self.expect_kw("with")?;
                self.expect_kw("motive")?;
                let motive = self.expr()?;
                ExprKind::IndNm {
                    name,
                    scrut: bx(scrut),
                    base: bx(base),
                    step: bx(step),
                    motive: bx(motive),
                }
            }
            _ => unreachable!("special head"),
        };
        Ok(Expr {
            kind,
            span: self.span_from(start),
        })
    }

    fn atom(&mut self) -> Result<Expr, Diagnostic> {
        let start = self.span_here().start;
        let kind = match self.peek() {
            Some(Tok::Ident(s)) => {
                let k = match s.as_str() {
                    "U" => ExprKind::Universe,
                    "Nm" => ExprKind::NmTy,
                    "refl" => ExprKind::Refl,
                    s if is_keyword(s) => return Err(self.unexpected("an expression")),
                    s => ExprKind::Ident(s.to_string()),
                };
                self.bump();
                k
            }
            Some(Tok::LParen) => {
                self.bump();
                let e = self.expr()?;
                if self.eat(&Tok::Colon) {
                    let ty = self.expr()?;
                    self.expect(Tok::RParen)?;
                    ExprKind::Ann(bx(e), bx(ty))
                } else if self.peek() == Some(&Tok::Comma) {
                    let mut items = vec![e];
                    while self.eat(&Tok::Comma) {
                        items.push(self.expr()?);
                    }
                    self.expect(Tok::RParen)?;
                    let span = self.span_from(start);
                    let last = items.pop().expect("at least two items");
                    return Ok(items.into_iter().rev().fold(last, |acc, a| Expr {
                        kind: ExprKind::Pair(bx(a), bx(acc)),
                        span,
                    }));
                } else {
                    self.expect(Tok::RParen)?;
                    return Ok(Expr {
                        kind: e.kind,
                        span: self.span_from(start),
                    });
                }
            }
            _ => return Err(self.unexpected("an expression")),
        };
        Ok(Expr {
            kind,
            span: self.span_from(start),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input() {
        assert_eq!(parse("").unwrap(), vec![]);
        assert_eq!(parse("-- only a comment\n").unwrap(), vec![]);
    }

    #[test]
    fn missing_type_is_syntax_error() {
        let e = parse("def x : := 3").unwrap_err();
        assert_eq!(e.code, ErrorCode::SyntaxError);
    }

    #[test]
    fn tighten_parses() {
        let ds = parse("def tighten (n' : @I -o Sum Unit Nm) : Sum Unit Nm := ung (t2 (t1 n'))")
            .unwrap();
        assert!(matches!(&ds[0].kind, DeclKind::Def { name, .. } if name == "tighten"));
    }

    #[test]
    fn arrows_associate_right() {
        let e = parse_expr("A -> B -> C").unwrap();
        match e.kind {
            ExprKind::Pi(_, b) => assert!(matches!(b.kind, ExprKind::Pi(..))),
            _ => panic!(),
        }
        let e = parse_expr("@I -o @I -o Nm").unwrap();
        match e.kind {
            ExprKind::Pi(b, body) => {
                assert_eq!(b.ty, BinderTy::Aff);
                assert!(matches!(body.kind, ExprKind::Pi(..)));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn ascription_vs_binder() {
        assert!(matches!(parse_expr("(x : A)").unwrap().kind, ExprKind::Ann(..)));
        assert!(matches!(parse_expr("(x : A) -> A").unwrap().kind, ExprKind::Pi(..)));
    }

    #[test]
    fn tuples_nest_right() {
        let e = parse_expr("(a, b, c)").unwrap();
        match e.kind {
            ExprKind::Pair(_, r) => assert!(matches!(r.kind, ExprKind::Pair(..))),
            _ => panic!(),
        }
    }

    #[test]
    fn spans_lie_within_input() {
        let src = "def f : U := Nm\ndata D : U where | c : D";
        for d in parse(src).unwrap() {
            assert!(d.span.end <= src.len());
        }
    }
}
