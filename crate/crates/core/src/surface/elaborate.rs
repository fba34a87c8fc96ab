//! Bidirectional elaboration of surface syntax into core terms.
//!
//! Names are resolved innermost-local first, then a constructor of the
//! expected data type, then globals, then a constructor with a unique,
//! parameterless owner. Constructors are written without their data type's
//! parameters; those come from the expected type.

use std::sync::Arc;

use crate::datatypes::{eliminator_name, DataDecl, RawDataDecl};
use crate::diagnostic::{Diagnostic, ErrorCode, Span};
use crate::freshness::capture_ix;
use crate::signature::{GlobalEntry, Signature};
use crate::syntax::{
    instantiate, instantiate_aff, instantiate_env, shift, shift_from, CtorApp, Elim, Ident,
    IndNm, Kind, Repl, Term,
};
use crate::telescope::{Entry, Scope, Telescope};
use crate::typecheck::{Checker, CoreDecl};

use super::parser::{Binder, BinderTy, DeclKind, Expr, ExprKind, NameRef, SurfaceDecl};
use super::pretty::show_in;

type R<T> = Result<T, Diagnostic>;

fn err(code: ErrorCode, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::new(code, msg)
}

pub struct Elaborator<'s> {
    sig: &'s Signature,
    ck: Checker<'s>,
    tele: Telescope,
    eta: usize,
}

/// How an identifier at the head of an application resolves.
enum Head {
    Local(usize),
    Global(Arc<str>),
    Data(Arc<DataDecl>),
    Ctor(Arc<DataDecl>, usize, Vec<Term>),
    Elim(Arc<DataDecl>),
}

impl<'s> Elaborator<'s> {
    pub fn new(sig: &'s Signature, budget: u64) -> Self {
        Elaborator {
            sig,
            ck: Checker::with_budget(sig, budget),
            tele: Telescope::new(),
            eta: 0,
        }
    }

    pub fn with_telescope(sig: &'s Signature, budget: u64, tele: Telescope) -> Self {
        Elaborator {
            tele,
            ..Self::new(sig, budget)
        }
    }

    pub fn telescope(&self) -> &Telescope {
        &self.tele
    }

    fn show(&self, t: &Term) -> String {
        show_in(self.sig, &self.tele, t)
    }

    fn whnf(&mut self, t: &Term) -> R<Term> {
        self.ck.whnf(&self.tele, t)
    }

    fn push(&mut self, e: Entry) {
        self.tele.push(e);
    }

    fn pop(&mut self) {
        self.tele.pop();
    }

    fn lookup(&self, s: &str) -> Option<usize> {
        if s == "_" {
            return None;
        }
        self.tele
            .entries()
            .iter()
            .rev()
            .position(|e| e.name().as_str() == s)
    }

    fn affine_name(&self, n: &NameRef) -> R<usize> {
        match self.lookup(&n.name) {
            Some(ix) if self.tele.kind_at(ix) == Some(Kind::Aff) => Ok(ix),
            Some(_) => Err(err(
                ErrorCode::KindMismatch,
                format!("`{}` is a term variable, but a name variable `(x : @I)` is expected here", n.name),
            )
            .with_span(n.span)),
            None => Err(err(
                ErrorCode::UnboundName,
                format!("unbound name variable `{}`", n.name),
            )
            .with_span(n.span)),
        }
    }

    fn conv_or_mismatch(&mut self, t: &Term, got: &Term, want: &Term) -> R<()> {
        if self.ck.conv_types(&self.tele, got, want)? {
            Ok(())
        } else {
            Err(err(
                ErrorCode::TypeMismatch,
                format!(
                    "`{}` has type `{}` but `{}` was expected",
                    self.show(t),
                    self.show(got),
                    self.show(want)
                ),
            ))
        }
    }

    pub fn infer(&mut self, e: &Expr) -> R<(Term, Term)> {
        let depth = self.tele.len();
        let r = self.infer_inner(e);
        self.tele.truncate(depth);
        r.map_err(|d| d.with_span(e.span).with_telescope(&self.tele))
    }

    pub fn check(&mut self, e: &Expr, ty: &Term) -> R<Term> {
        let depth = self.tele.len();
        let r = self.check_inner(e, ty);
        self.tele.truncate(depth);
        r.map_err(|d| d.with_span(e.span).with_telescope(&self.tele))
    }

    fn check_type(&mut self, e: &Expr) -> R<Term> {
        self.check(e, &Term::Universe)
    }

    fn check_inner(&mut self, e: &Expr, ty: &Term) -> R<Term> {
        match &e.kind {
            ExprKind::Lam(b, body) => {
                let wty = self.whnf(ty)?;
                match (&wty, &b.ty) {
                    (Term::Pi(_, a, cod), BinderTy::None | BinderTy::Ty(_)) => {
                        let dom = match &b.ty {
                            BinderTy::Ty(t) => {
                                let d = self.check_type(t)?;
                                if !self.ck.conv_types(&self.tele, &d, a)? {
                                    return Err(err(
                                        ErrorCode::TypeMismatch,
                                        format!(
                                            "binder `{}` is annotated `{}` but the expected domain is `{}`",
                                            b.name,
                                            self.show(&d),
                                            self.show(a)
                                        ),
                                    )
                                    .with_span(b.span));
                                }
                                d
                            }
                            _ => (**a).clone(),
                        };
                        let x = Ident::new(&b.name);
                        self.push(Entry::Cart(x.clone(), dom.clone()));
                        let body = self.check(body, cod)?;
                        self.pop();
                        Ok(Term::Lam(x, Box::new(dom), Box::new(body)))
                    }
                    (Term::BridgePi(_, cod), BinderTy::None | BinderTy::Aff) => {
                        let x = Ident::new(&b.name);
                        self.push(Entry::Aff(x.clone()));
                        let body = self.check(body, cod)?;
                        self.pop();
                        Ok(Term::BridgeLam(x, Box::new(body)))
                    }
                    (Term::Pi(..), BinderTy::Aff) => Err(err(
                        ErrorCode::KindMismatch,
                        format!(
                            "`{}` is bound as a name `(x : @I)` but a function of type `{}` is expected",
                            b.name,
                            self.show(ty)
                        ),
                    )
                    .with_span(b.span)),
                    (Term::BridgePi(..), BinderTy::Ty(_)) => Err(err(
                        ErrorCode::KindMismatch,
                        format!(
                            "`{}` is bound as a term but a bridge of type `{}` is expected; annotate it `@I`",
                            b.name,
                            self.show(ty)
                        ),
                    )
                    .with_span(b.span)),
                    _ => self.check_by_infer(e, ty),
                }
            }
            ExprKind::Pair(a, b) => match self.whnf(ty)? {
                Term::Sigma(_, ta, tb) => {
                    let a = self.check(a, &ta)?;
                    let tb = instantiate(&tb, &a);
                    let b = self.check(b, &tb)?;
                    Ok(Term::pair(a, b))
                }
                _ => self.check_by_infer(e, ty),
            },
            ExprKind::Refl => {
                self.ck.check(&mut self.tele, &Term::Refl, ty)?;
                Ok(Term::Refl)
            }
            ExprKind::GelIntro(a, n) => {
                let x = self.affine_name(n)?;
                match self.whnf(ty)? {
                    Term::Gel(ta, y) if y == x => {
                        let a = self.check(a, &ta)?;
                        let t = Term::gel(a, x);
                        self.ck.check(&mut self.tele, &t, ty)?;
                        Ok(t)
                    }
                    _ => self.check_by_infer(e, ty),
                }
            }
            ExprKind::Ident(_) | ExprKind::App(..) => {
                let (t, got) = self.spine(e, Some(ty))?;
                self.conv_or_mismatch(&t, &got, ty)?;
                Ok(t)
            }
            ExprKind::Ext { .. } => {
                let (t, got) = self.ext(e, Some(ty))?;
                self.conv_or_mismatch(&t, &got, ty)?;
                Ok(t)
            }
            _ => self.check_by_infer(e, ty),
        }
    }

    fn check_by_infer(&mut self, e: &Expr, ty: &Term) -> R<Term> {
        let (t, got) = self.infer(e)?;
        self.conv_or_mismatch(&t, &got, ty)?;
        Ok(t)
    }

    /// Kernel type of a node whose children are already elaborated.
    fn kernel_infer(&mut self, t: &Term) -> R<Term> {
        self.ck.infer(&mut self.tele, t)
    }

    fn infer_inner(&mut self, e: &Expr) -> R<(Term, Term)> {
        match &e.kind {
            ExprKind::Ident(_) | ExprKind::App(..) => self.spine(e, None),
            ExprKind::Universe => Ok((Term::Universe, Term::Universe)),
            ExprKind::NmTy => Ok((Term::Nm, Term::Universe)),
            ExprKind::Pi(b, body) => {
                let x = Ident::new(&b.name);
                match &b.ty {
                    BinderTy::Aff => {
                        self.push(Entry::Aff(x.clone()));
                        let body = self.check_type(body)?;
                        self.pop();
                        Ok((Term::BridgePi(x, Box::new(body)), Term::Universe))
                    }
                    BinderTy::Ty(a) => {
                        let a = self.check_type(a)?;
                        self.push(Entry::Cart(x.clone(), a.clone()));
                        let body = self.check_type(body)?;
                        self.pop();
                        Ok((Term::Pi(x, Box::new(a), Box::new(body)), Term::Universe))
                    }
                    BinderTy::None => Err(err(
                        ErrorCode::AmbiguousBinderKind,
                        format!("binder `{}` needs a type or `@I`", b.name),
                    )),
                }
            }
            ExprKind::Lam(b, body) => {
                let x = Ident::new(&b.name);
                match &b.ty {
                    BinderTy::Aff => {
                        self.push(Entry::Aff(x.clone()));
                        let (body, bty) = self.infer(body)?;
                        self.pop();
                        Ok((
                            Term::BridgeLam(x.clone(), Box::new(body)),
                            Term::BridgePi(x, Box::new(bty)),
                        ))
                    }
                    BinderTy::Ty(a) => {
                        let a = self.check_type(a)?;
                        self.push(Entry::Cart(x.clone(), a.clone()));
                        let (body, bty) = self.infer(body)?;
                        self.pop();
                        Ok((
                            Term::Lam(x.clone(), Box::new(a.clone()), Box::new(body)),
                            Term::Pi(x, Box::new(a), Box::new(bty)),
                        ))
                    }
                    BinderTy::None => Err(err(
                        ErrorCode::AmbiguousBinderKind,
                        format!(
                            "cannot tell whether `{}` binds a term or a name; annotate it `(x : A)` or `(x : @I)`",
                            b.name
                        ),
                    )
                    .with_span(b.span)),
                }
            }
            ExprKind::Sigma(x, a, b) => {
                let x = Ident::new(x);
                let a = self.check_type(a)?;
                self.push(Entry::Cart(x.clone(), a.clone()));
                let b = self.check_type(b)?;
                self.pop();
                Ok((Term::Sigma(x, Box::new(a), Box::new(b)), Term::Universe))
            }
            ExprKind::Pair(a, b) => {
                let (a, ta) = self.infer(a)?;
                let (b, tb) = self.infer(b)?;
                Ok((
                    Term::pair(a, b),
                    Term::Sigma(Ident::anon(), Box::new(ta), Box::new(shift(&tb, 1))),
                ))
            }
            ExprKind::Fst(p) | ExprKind::Snd(p) => {
                let (p, _) = self.infer(p)?;
                let t = match &e.kind {
                    ExprKind::Fst(_) => Term::Fst(Box::new(p)),
                    _ => Term::Snd(Box::new(p)),
                };
                let ty = self.kernel_infer(&t)?;
                Ok((t, ty))
            }
            ExprKind::Gel(a, n) => {
                let x = self.affine_name(n)?;
                let a = self.check_type(a)?;
                let t = Term::gel_ty(a, x);
                self.kernel_infer(&t)?;
                Ok((t, Term::Universe))
            }
            ExprKind::GelIntro(a, n) => {
                let x = self.affine_name(n)?;
                let (a, _) = self.infer(a)?;
                let t = Term::gel(a, x);
                let ty = self.kernel_infer(&t)?;
                Ok((t, ty))
            }
            ExprKind::Ung(g) => {
                let (g, _) = self.infer(g)?;
                let t = Term::ung(g);
                let ty = self.kernel_infer(&t)?;
                Ok((t, ty))
            }
            ExprKind::Name(n) => Ok((Term::Name(self.affine_name(n)?), Term::Nm)),
            ExprKind::Ext { .. } => self.ext(e, None),
            ExprKind::IndNm {
                name,
                scrut,
                base,
                step,
                motive,
            } => {
                let x = self.affine_name(name)?;
                let scrut = self.check(scrut, &Term::Nm)?;
                let mty = Term::pi("z", Term::Nm, Term::Universe);
                let motive = self.check(motive, &mty)?;
                let (motive_binder, motive) = open(motive, "z");
                let base = self.check(base, &instantiate(&motive, &Term::Name(x)))?;
                let step_dom = Term::gel_ty(Term::Nm, x);
                let step_cod = instantiate(
                    &shift_from(&motive, 1, 1),
                    &Term::forg_nm(x + 1, Term::Var(0)),
                );
                let step_ty = Term::pi("g", step_dom, step_cod);
                let step = self.check(step, &step_ty)?;
                let (step_binder, step) = open(step, "g");
                let ty = instantiate(&motive, &scrut);
                Ok((
                    Term::IndNm(Box::new(IndNm {
                        name: x,
                        scrut,
                        base,
                        step_binder,
                        step,
                        motive_binder,
                        motive,
                    })),
                    ty,
                ))
            }
            ExprKind::Id(a, l, r) => {
                let a = self.check_type(a)?;
                let l = self.check(l, &a)?;
                let r = self.check(r, &a)?;
                Ok((Term::Id(Box::new(a), Box::new(l), Box::new(r)), Term::Universe))
            }
            ExprKind::Refl => Err(err(
                ErrorCode::CannotInfer,
                "cannot infer the type of `refl`; write `(refl : Id A a a)`",
            )),
            ExprKind::J(p, d, q) => {
                // a bare `refl` takes its type from the motive
                let mut motive = None;
                let (q, qty) = if matches!(q.kind, ExprKind::Refl) {
                    let (pc, _) = self.infer(p)?;
                    let ty = self
                        .ck
                        .refl_type_from_motive(&mut self.tele, &pc)
                        .map_err(|e| e.with_span(q.span))?;
                    motive = Some(pc);
                    (Term::Refl, ty)
                } else {
                    self.infer(q)?
                };
                let (a, l, r) = match self.whnf(&qty)? {
                    Term::Id(a, l, r) => (*a, *l, *r),
                    other => {
                        return Err(err(
                            ErrorCode::TypeMismatch,
                            format!("J expects an identity proof, got type `{}`", self.show(&other)),
                        ))
                    }
                };
                let pty = Term::pi(
                    "y",
                    a.clone(),
                    Term::pi(
                        "e",
                        Term::Id(
                            Box::new(shift(&a, 1)),
                            Box::new(shift(&l, 1)),
                            Box::new(Term::Var(0)),
                        ),
                        Term::Universe,
                    ),
                );
                let p = match motive {
                    Some(pc) => {
                        self.ck.check(&mut self.tele, &pc, &pty)?;
                        pc
                    }
                    None => self.check(p, &pty)?,
                };
                let d = self.check(d, &Term::apps(p.clone(), [l, Term::Refl]))?;
                let ty = Term::apps(p.clone(), [r, q.clone()]);
                Ok((Term::J(Box::new(p), Box::new(d), Box::new(q)), ty))
            }
            ExprKind::Ann(e, t) => {
                let t = self.check_type(t)?;
                let e = self.check(e, &t)?;
                Ok((e, t))
            }
        }
    }

    fn ext(&mut self, e: &Expr, expected: Option<&Term>) -> R<(Term, Term)> {
        let ExprKind::Ext {
            method,
            name,
            arg,
            motive,
        } = &e.kind
        else {
            unreachable!("ext node")
        };
        let x = self.affine_name(name)?;
        let y = Ident::new("y");
        let arg_span = arg.span;
        let arg_first = match self.infer(arg) {
            Ok(r) => Some(r),
            Err(d) if matches!(d.code, ErrorCode::CannotInfer | ErrorCode::AmbiguousBinderKind) => {
                None
            }
            Err(d) => return Err(d),
        };
        let (method, arg, motive) = match arg_first {
            Some((arg, arg_ty)) => {
                let a_y = self.capture_retry(x, &arg_ty, &y)?;
                if a_y.is_none() {
                    return Err(err(
                        ErrorCode::CaptureViolation,
                        format!(
                            "the type `{}` of the ext argument mentions a variable declared after `{}`, so it cannot be abstracted over that name",
                            self.show(&arg_ty),
                            name.name
                        ),
                    )
                                        .with_span(arg_span));
                }
                let motive = match (motive, &a_y) {
                    (Some(m), Some(a_y)) => {
                        let mty = Term::BridgePi(
                            y.clone(),
                            Box::new(Term::pi("a", a_y.clone(), Term::Universe)),
                        );
                        Some(self.check(m, &mty)?)
                    }
                    (Some(m), None) => Some(self.infer(m)?.0),
                    (None, _) => None,
                };
                let cod = match (&motive, expected) {
                    (Some(m), _) => Some(Term::app(
                        Term::bapp(shift(m, 2), 0),
                        Term::bapp(Term::Var(1), 0),
                    )),
                    (None, Some(ty)) => self
                        .capture_retry(x, ty, &y)?
                        .map(|b_y| shift_from(&b_y, 1, 1)),
                    (None, None) => None,
                };
                let method = match (a_y, cod) {
                    (Some(a_y), Some(cod)) => {
                        let mty = Term::pi(
                            "a'",
                            Term::BridgePi(y.clone(), Box::new(a_y)),
                            Term::BridgePi(y.clone(), Box::new(cod)),
                        );
                        self.check(method, &mty)?
                    }
                    _ => self.infer(method)?.0,
                };
                (method, arg, motive)
            }
            None => {
                let (method, mty) = self.infer(method)?;
                let a_y = match self.whnf(&mty)? {
                    Term::Pi(_, dom, _) => match self.whnf(&dom)? {
                        Term::BridgePi(_, a_y) => Some(*a_y),
                        _ => None,
                    },
                    _ => None,
                };
                let Some(a_y) = a_y else {
                    return Err(err(
                        ErrorCode::TypeMismatch,
                        format!(
                            "ext method must have type `((y : @I) -o A) -> (y : @I) -o B`, got `{}`",
                            self.show(&mty)
                        ),
                    ));
                };
                let arg = self.check(arg, &instantiate_aff(&a_y, x))?;
                let motive = match motive {
                    Some(m) => {
                        let mty = Term::BridgePi(
                            y.clone(),
                            Box::new(Term::pi("a", a_y, Term::Universe)),
                        );
                        Some(self.check(m, &mty)?)
                    }
                    None => None,
                };
                (method, arg, motive)
            }
        };
        let t = Term::Ext(Box::new(crate::syntax::Ext {
            method,
            name: x,
            arg,
            motive,
        }));
        let ty = self.kernel_infer(&t)?;
        Ok((t, ty))
    }

    /// Body of the capture of `t` at `x`, retrying once on the normal form.
    fn capture_retry(&mut self, x: usize, t: &Term, y: &Ident) -> R<Option<Term>> {
        if let Ok(Term::BridgeLam(_, b)) = capture_ix(&self.tele, x, t, y.clone()) {
            return Ok(Some(*b));
        }
        let n = self.ck.normalize(&self.tele, t)?;
        Ok(match capture_ix(&self.tele, x, &n, y.clone()) {
            Ok(Term::BridgeLam(_, b)) => Some(*b),
            _ => None,
        })
    }

    fn resolve_head(&mut self, s: &str, span: Span, nargs: usize, expected: Option<&Term>) -> R<Head> {
        if let Some(ix) = self.lookup(s) {
            return Ok(Head::Local(ix));
        }
        if self.sig.is_ctor_name(s) {
            if let Some(ty) = expected {
                if let Term::Data(d, ps) = self.whnf(ty)? {
                    if let Some(decl) = self.sig.data(&d) {
                        if let Some(ci) = decl.ctor_index(s) {
                            if nargs >= decl.ctors[ci].args.len() {
                                return Ok(Head::Ctor(decl.clone(), ci, ps));
                            }
                        }
                    }
                }
            }
        }
        match self.sig.get(s) {
            Some(GlobalEntry::Data(d)) => return Ok(Head::Data(d.clone())),
            Some(GlobalEntry::Def { .. }) => {
                if let Some(d) = s.strip_prefix("ind").and_then(|d| self.sig.data(d)) {
                    return Ok(Head::Elim(d.clone()));
                }
                return Ok(Head::Global(Arc::from(s)));
            }
            Some(GlobalEntry::Postulate { .. }) => return Ok(Head::Global(Arc::from(s))),
            None => {}
        }
        let owners = self.sig.ctor_owners(s);
        if owners.len() == 1 {
            let d = self.sig.data(&owners[0]).expect("owner is data").clone();
            if d.params.is_empty() {
                let ci = d.ctor_index(s).expect("owner declares ctor");
                return Ok(Head::Ctor(d, ci, vec![]));
            }
        }
        if !owners.is_empty() {
            return Err(err(
                ErrorCode::CannotInfer,
                format!(
                    "cannot determine the data type of constructor `{s}` (declared by {}); add a type ascription",
                    owners.iter().map(|o| format!("`{o}`")).collect::<Vec<_>>().join(", ")
                ),
            )
            .with_span(span));
        }
        Err(err(ErrorCode::UnboundName, format!("unbound name `{s}`")).with_span(span))
    }

    /// Elaborates `head arg1 ... argn` where the head is an identifier or any
    /// other expression.
    fn spine(&mut self, e: &Expr, expected: Option<&Term>) -> R<(Term, Term)> {
        let mut args = Vec::new();
        let mut cur = e;
        while let ExprKind::App(f, a) = &cur.kind {
            args.push(&**a);
            cur = f;
        }
        args.reverse();
        let ExprKind::Ident(s) = &cur.kind else {
            let (h, hty) = self.infer(cur)?;
            return self.apply(h, hty, &args);
        };
        // A partially applied constructor checked against a function type is
        // η-expanded so that the constructor node ends up saturated.
        if let Some(ty) = expected {
            if self.lookup(s).is_none() && !self.sig.contains(s) && self.sig.is_ctor_name(s) {
                if let Term::Pi(x, dom, cod) = self.whnf(ty)? {
                    let n = format!("%eta{}", self.eta);
                    self.eta += 1;
                    self.push(Entry::Cart(x.clone(), (*dom).clone()));
                    let mut renamed = self.tele.pop().expect("just pushed");
                    if let Entry::Cart(_, t) = renamed {
                        renamed = Entry::Cart(Ident::new(&n), t);
                    }
                    self.push(renamed);
                    let extra = Expr {
                        kind: ExprKind::Ident(n),
                        span: e.span,
                    };
                    let whole = Expr {
                        kind: ExprKind::App(Box::new(e.clone()), Box::new(extra)),
                        span: e.span,
                    };
                    let body = self.check(&whole, &cod);
                    self.pop();
                    let body = body?;
                    let t = Term::Lam(x.clone(), dom.clone(), Box::new(body));
                    return Ok((t, Term::Pi(x, dom, cod)));
                }
            }
        }
        match self.resolve_head(s, cur.span, args.len(), expected)? {
            Head::Local(ix) => match self.tele.get(ix) {
                Some(Entry::Cart(..)) => {
                    let ty = self.tele.type_of(ix).expect("cartesian");
                    self.apply(Term::Var(ix), ty, &args)
                }
                _ => Err(err(
                    ErrorCode::KindMismatch,
                    format!("name variable `{s}` used as a term; write `name {s}`"),
                )
                .with_span(cur.span)),
            },
            Head::Global(g) => {
                let ty = self.sig.type_of(&g).expect("global has a type").clone();
                self.apply(Term::Global(g), ty, &args)
            }
            Head::Data(d) => {
                let fty = d.type_former_type();
                let n = d.params.len();
                let name = d.name.clone();
                self.saturate(fty, n, &args, move |ps| Term::Data(name.clone(), ps))
            }
            Head::Ctor(d, ci, ps) => {
                let env: Vec<Repl> = ps.iter().rev().map(|p| Repl::Term(p.clone())).collect();
                let fty = instantiate_env(&d.ctor_type(ci), &env).expect("cartesian params");
                let n = d.ctors[ci].args.len();
                let (data, ctor) = (d.name.clone(), d.ctors[ci].name.clone());
                self.saturate(fty, n, &args, move |args| {
                    let depth = args.len().saturating_sub(n);
                    let _ = depth;
                    Term::Ctor(Box::new(CtorApp {
                        data: data.clone(),
                        ctor: ctor.clone(),
                        params: vec![],
                        args,
                    }))
                })
                .map(|(t, ty)| (fill_ctor_params(t, &ps), ty))
            }
            Head::Elim(d) => {
                let name = eliminator_name(&d.name);
                let ty = self.sig.type_of(&name).expect("eliminator").clone();
                let p = d.params.len();
                let m = d.ctors.len();
                let n = p + m + 2;
                if args.len() < n {
                    return self.apply(Term::Global(Arc::from(name.as_str())), ty, &args);
                }
                let data = d.name.clone();
                self.saturate(ty, n, &args, move |all| {
                    let mut it = all.into_iter();
                    let params: Vec<Term> = it.by_ref().take(p).collect();
                    let motive = it.next().expect("motive");
                    let methods: Vec<Term> = it.by_ref().take(m).collect();
                    let scrut = it.next().expect("scrutinee");
                    Term::Elim(Box::new(Elim {
                        data: data.clone(),
                        params,
                        motive,
                        methods,
                        scrut,
                    }))
                })
            }
        }
    }

    /// Applies `head : fty` to surface arguments one at a time.
    fn apply(&mut self, mut t: Term, mut ty: Term, args: &[&Expr]) -> R<(Term, Term)> {
        for a in args {
            match self.whnf(&ty)? {
                Term::Pi(_, dom, cod) => {
                    let a = self.check(a, &dom)?;
                    ty = instantiate(&cod, &a);
                    t = Term::app(t, a);
                }
                Term::BridgePi(_, cod) => {
                    let x = match &a.kind {
                        ExprKind::Ident(s) => self.affine_name(&NameRef {
                            name: s.clone(),
                            span: a.span,
                        })?,
                        _ => {
                            return Err(err(
                                ErrorCode::KindMismatch,
                                format!(
                                    "`{}` expects a name variable argument",
                                    self.show(&t)
                                ),
                            )
                            .with_span(a.span))
                        }
                    };
                    let node = Term::bapp(t, x);
                    self.kernel_bridge_app(&node, a.span)?;
                    ty = instantiate_aff(&cod, x);
                    t = node;
                }
                other => {
                    return Err(err(
                        ErrorCode::NotAFunction,
                        format!(
                            "`{}` has type `{}` and cannot be applied",
                            self.show(&t),
                            self.show(&other)
                        ),
                    )
                    .with_span(a.span))
                }
            }
        }
        Ok((t, ty))
    }

    /// Freshness side condition of bridge application, reported at `span`.
    fn kernel_bridge_app(&mut self, node: &Term, span: Span) -> R<()> {
        let Term::BridgeApp(f, x) = node else { unreachable!() };
        if crate::freshness::is_fresh_ix(&self.tele, *x, f) {
            return Ok(());
        }
        let n = self.ck.normalize(&self.tele, f)?;
        if crate::freshness::is_fresh_ix(&self.tele, *x, &n) {
            return Ok(());
        }
        Err(err(
            ErrorCode::AffinityViolation,
            format!(
                "`{}` cannot be applied to `{}`: it mentions that name or a variable declared after it",
                self.show(f),
                self.tele.name_of(*x).map_or("?".into(), |n| n.to_string())
            ),
        )
        .with_span(span))
    }

    /// Elaborates arguments against the Π-telescope `fty` of an `n`-ary former
    /// and builds the saturated node with `build`, η-expanding when fewer than
    /// `n` arguments are given and applying any extra ones.
    fn saturate(
        &mut self,
        fty: Term,
        n: usize,
        args: &[&Expr],
        build: impl Fn(Vec<Term>) -> Term,
    ) -> R<(Term, Term)> {
        let k = args.len().min(n);
        let mut ty = fty;
        let mut done = Vec::with_capacity(n);
        for a in &args[..k] {
            match self.whnf(&ty)? {
                Term::Pi(_, dom, cod) => {
                    let a = self.check(a, &dom)?;
                    ty = instantiate(&cod, &a);
                    done.push(a);
                }
                _ => unreachable!("former types are Π-telescopes"),
            }
        }
        if k == n {
            let t = build(done);
            return self.apply(t, ty, &args[n..]);
        }
        // η-expand over the remaining binders
        let m = n - k;
        let mut binders = Vec::with_capacity(m);
        let mut rest = ty.clone();
        for _ in 0..m {
            match rest {
                Term::Pi(x, dom, cod) => {
                    binders.push((x, *dom));
                    rest = *cod;
                }
                _ => unreachable!("former types are Π-telescopes"),
            }
        }
        let mut all: Vec<Term> = done.iter().map(|a| shift(a, m)).collect();
        all.extend((0..m).rev().map(Term::Var));
        let body = build(all);
        let t = binders
            .into_iter()
            .rev()
            .fold(body, |acc, (x, dom)| Term::Lam(x, Box::new(dom), Box::new(acc)));
        Ok((t, ty))
    }

    pub fn elab_binders(&mut self, binders: &[Binder]) -> R<()> {
        for b in binders {
            let x = Ident::new(&b.name);
            match &b.ty {
                BinderTy::Aff => self.push(Entry::Aff(x)),
                BinderTy::Ty(t) => {
                    let t = self.check_type(t)?;
                    self.push(Entry::Cart(x, t));
                }
                BinderTy::None => {
                    return Err(err(
                        ErrorCode::AmbiguousBinderKind,
                        format!("binder `{}` needs a type or `@I`", b.name),
                    )
                    .with_span(b.span))
                }
            }
        }
        Ok(())
    }
}

/// Fills in the parameters of every constructor node built by `saturate`
/// (they are shifted when the node sits under η-binders).
fn fill_ctor_params(t: Term, ps: &[Term]) -> Term {
    fn go(t: Term, ps: &[Term], depth: usize) -> Term {
        match t {
            Term::Lam(x, a, b) => Term::Lam(x, a, Box::new(go(*b, ps, depth + 1))),
            Term::Ctor(mut c) if c.params.is_empty() && !ps.is_empty() => {
                c.params = ps.iter().map(|p| shift(p, depth)).collect();
                Term::Ctor(c)
            }
            Term::App(f, a) => Term::App(Box::new(go(*f, ps, depth)), a),
            Term::BridgeApp(f, x) => Term::BridgeApp(Box::new(go(*f, ps, depth)), x),
            other => other,
        }
    }
    go(t, ps, 0)
}

/// Splits an elaborated function into binder name and body under that binder.
fn open(f: Term, default: &str) -> (Ident, Term) {
    match f {
        Term::Lam(x, _, body) => (x, *body),
        other => (Ident::new(default), Term::app(shift(&other, 1), Term::Var(0))),
    }
}

fn wrap_pi(binders: &[Binder], body: Expr) -> Expr {
    binders.iter().rev().fold(body, |acc, b| {
        let span = acc.span;
        Expr {
            kind: ExprKind::Pi(b.clone(), Box::new(acc)),
            span,
        }
    })
}

fn wrap_lam(binders: &[Binder], body: Expr) -> Expr {
    binders.iter().rev().fold(body, |acc, b| {
        let span = acc.span;
        Expr {
            kind: ExprKind::Lam(b.clone(), Box::new(acc)),
            span,
        }
    })
}

/// Elaborates one declaration against `sig` (which is left unchanged).
/// Pragmas yield `None`.
pub fn elaborate_decl(
    sig: &mut Signature,
    decl: &SurfaceDecl,
    budget: u64,
) -> Result<Option<CoreDecl>, Diagnostic> {
    let r = match &decl.kind {
        DeclKind::Pragma(_) => return Ok(None),
        DeclKind::Def {
            name,
            binders,
            ty,
            body,
        } => {
            let mut el = Elaborator::new(sig, budget);
            let ty_e = wrap_pi(binders, ty.clone());
            let body_e = wrap_lam(binders, body.clone());
            (|| {
                let ty = el.check(&ty_e, &Term::Universe)?;
                let body = el.check(&body_e, &ty)?;
                Ok(CoreDecl::Def {
                    name: Arc::from(name.as_str()),
                    ty,
                    body,
                })
            })()
            .map_err(|d: Diagnostic| d.in_decl(name))
        }
        DeclKind::Postulate { name, binders, ty } => {
            let mut el = Elaborator::new(sig, budget);
            let ty_e = wrap_pi(binders, ty.clone());
            el.check(&ty_e, &Term::Universe)
                .map(|ty| CoreDecl::Postulate {
                    name: Arc::from(name.as_str()),
                    ty,
                })
                .map_err(|d| d.in_decl(name))
        }
        DeclKind::Data {
            name,
            params,
            ctors,
        } => elaborate_data(sig, name, params, ctors, budget).map_err(|d| d.in_decl(name)),
    };
    r.map(Some).map_err(|d| d.with_span(decl.span))
}

fn elaborate_data(
    sig: &mut Signature,
    name: &str,
    params: &[Binder],
    ctors: &[super::parser::CtorDecl],
    budget: u64,
) -> R<CoreDecl> {
    if sig.contains(name) {
        return Err(err(
            ErrorCode::DuplicateName,
            format!("`{name}` is already defined"),
        ));
    }
    let mut el = Elaborator::new(sig, budget);
    el.elab_binders(params)?;
    let tele = el.tele.clone();
    drop(el);
    let param_list: Vec<(Ident, Term)> = tele
        .entries()
        .iter()
        .map(|e| match e {
            Entry::Cart(x, t) => Ok((x.clone(), t.clone())),
            Entry::Aff(x) => Err(err(
                ErrorCode::KindMismatch,
                format!("data parameter `{x}` must be a typed binder"),
            )),
        })
        .collect::<R<_>>()?;
    let gname: Arc<str> = Arc::from(name);
    sig.insert(
        gname.clone(),
        GlobalEntry::Data(Arc::new(DataDecl {
            name: gname.clone(),
            params: param_list.clone(),
            ctors: vec![],
        })),
    );
    let result = (|| -> R<Vec<(Arc<str>, Term)>> {
        let mut out = Vec::new();
        for c in ctors {
            let mut el = Elaborator::with_telescope(sig, budget, tele.clone());
            let ty = el
                .check(&c.ty, &Term::Universe)
                .map_err(|d| d.with_span(c.span))?;
            out.push((Arc::from(c.name.as_str()), ty));
        }
        Ok(out)
    })();
    sig.pop();
    Ok(CoreDecl::Data(RawDataDecl {
        name: gname,
        params: param_list,
        ctors: result?,
    }))
}
