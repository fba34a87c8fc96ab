//! Bidirectional type checking of core terms and declarations.

use std::sync::Arc;

use crate::datatypes::{check_positivity, DataDecl, RawDataDecl};
use crate::diagnostic::{Diagnostic, ErrorCode};
use crate::eval::{Machine, DEFAULT_BUDGET};
use crate::freshness::is_fresh_ix;
use crate::signature::{GlobalEntry, Signature};
use crate::surface::pretty::show_in;
use crate::syntax::{
    instantiate, instantiate_aff, shift, shift_from, strengthen_at, GName, Ident, Kind, Term,
};
use crate::telescope::{Entry, Scope, Telescope};

/// A declaration in core syntax, ready for checking.
#[derive(Clone, Debug)]
pub enum CoreDecl {
    Def { name: GName, ty: Term, body: Term },
    Postulate { name: GName, ty: Term },
    Data(RawDataDecl),
}

impl CoreDecl {
    pub fn name(&self) -> &GName {
        match self {
            CoreDecl::Def { name, .. } | CoreDecl::Postulate { name, .. } => name,
            CoreDecl::Data(d) => &d.name,
        }
    }
}

type TcResult<T> = Result<T, Diagnostic>;

pub struct Checker<'s> {
    pub(crate) m: Machine<'s>,
}

fn err(code: ErrorCode, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::new(code, msg)
}

impl<'s> Checker<'s> {
    pub fn new(sig: &'s Signature) -> Self {
        Checker { m: Machine::new(sig) }
    }

    pub fn with_budget(sig: &'s Signature, budget: u64) -> Self {
        Checker {
            m: Machine::new(sig).with_budget(budget),
        }
    }

    pub fn machine(&mut self) -> &mut Machine<'s> {
        &mut self.m
    }

    fn sig(&self) -> &'s Signature {
        self.m.signature()
    }

    pub fn whnf(&mut self, tele: &Telescope, t: &Term) -> TcResult<Term> {
        Ok(self.m.whnf(tele, t)?)
    }

    pub fn normalize(&mut self, tele: &Telescope, t: &Term) -> TcResult<Term> {
        Ok(self.m.normalize(tele, t)?)
    }

    pub fn conv(&mut self, tele: &Telescope, t: &Term, u: &Term, ty: &Term) -> TcResult<bool> {
        Ok(self.m.convertible(tele, t, u, ty)?)
    }

    pub fn conv_types(&mut self, tele: &Telescope, a: &Term, b: &Term) -> TcResult<bool> {
        Ok(self.m.convertible_untyped(tele, a, b)?)
    }

    pub fn check_telescope(&mut self, tele: &Telescope) -> TcResult<()> {
        let mut prefix = Telescope::new();
        for e in tele.entries() {
            if let Entry::Cart(x, ty) = e {
                self.check(&mut prefix, ty, &Term::Universe).map_err(|d| {
                    err(
                        ErrorCode::IllFormedEntryType,
                        format!("type of `{x}` is ill-formed: {}", d.message),
                    )
                    .with_telescope(&prefix)
                })?;
            }
            prefix.push(e.clone());
        }
        Ok(())
    }

    fn affine(&self, tele: &Telescope, x: usize) -> TcResult<()> {
        match tele.kind_at(x) {
            Some(Kind::Aff) => Ok(()),
            Some(Kind::Cart) => Err(err(
                ErrorCode::KindMismatch,
                format!(
                    "`{}` is a term variable used where a name variable is expected",
                    tele.name_of(x).map_or("?".into(), |n| n.to_string())
                ),
            )
            .with_telescope(tele)),
            None => Err(err(
                ErrorCode::UnboundVariable,
                format!("variable index {x} is out of scope"),
            )
            .with_telescope(tele)),
        }
    }

    /// `t` itself when `x` is fresh in it, else its normal form when that is
    /// fresh, else `None`.
    fn fresh_form(&mut self, tele: &Telescope, x: usize, t: &Term) -> TcResult<Option<Term>> {
        if is_fresh_ix(tele, x, t) {
            return Ok(Some(t.clone()));
        }
        let n = self.m.normalize(tele, t)?;
        Ok(is_fresh_ix(tele, x, &n).then_some(n))
    }

    fn under<R>(
        &mut self,
        tele: &mut Telescope,
        e: Entry,
        f: impl FnOnce(&mut Self, &mut Telescope) -> TcResult<R>,
    ) -> TcResult<R> {
        tele.push(e);
        let r = f(self, tele);
        tele.pop();
        r
    }

    fn mismatch(&self, tele: &Telescope, t: &Term, expected: &Term, got: &Term) -> Diagnostic {
        err(
            ErrorCode::TypeMismatch,
            format!(
                "`{}` has type `{}` but `{}` was expected",
                show_in(self.sig(), tele, t),
                show_in(self.sig(), tele, got),
                show_in(self.sig(), tele, expected),
            ),
        )
        .with_telescope(tele)
    }

    pub fn check(&mut self, tele: &mut Telescope, t: &Term, ty: &Term) -> TcResult<()> {
        match t {
            Term::Lam(x, dom, body) => {
                let wty = self.whnf(tele, ty)?;
                match &wty {
                    Term::Pi(_, a, b) => {
                        self.check(tele, dom, &Term::Universe)?;
                        if !self.conv_types(tele, dom, a)? {
                            return Err(self.mismatch(tele, t, ty, &Term::Pi(
                                x.clone(),
                                dom.clone(),
                                Box::new(Term::Universe),
                            )));
                        }
                        self.under(tele, Entry::Cart(x.clone(), (**dom).clone()), |c, tele| {
                            c.check(tele, body, b)
                        })
                    }
                    _ => self.check_by_infer(tele, t, ty),
                }
            }
            Term::BridgeLam(x, body) => {
                let wty = self.whnf(tele, ty)?;
                match &wty {
                    Term::BridgePi(_, b) => self.under(tele, Entry::Aff(x.clone()), |c, tele| {
                        c.check(tele, body, b)
                    }),
                    _ => self.check_by_infer(tele, t, ty),
                }
            }
            Term::Pair(a, b) => {
                let wty = self.whnf(tele, ty)?;
                match &wty {
                    Term::Sigma(_, ta, tb) => {
                        self.check(tele, a, ta)?;
                        self.check(tele, b, &instantiate(tb, a))
                    }
                    _ => self.check_by_infer(tele, t, ty),
                }
            }
            Term::Refl => {
                let wty = self.whnf(tele, ty)?;
                match &wty {
                    Term::Id(a, l, r) => {
                        if self.conv(tele, l, r, a)? {
                            Ok(())
                        } else {
                            Err(err(
                                ErrorCode::TypeMismatch,
                                format!(
                                    "refl: `{}` and `{}` are not definitionally equal",
                                    show_in(self.sig(), tele, l),
                                    show_in(self.sig(), tele, r)
                                ),
                            )
                            .with_telescope(tele))
                        }
                    }
                    _ => Err(err(
                        ErrorCode::TypeMismatch,
                        format!(
                            "refl checked against non-identity type `{}`",
                            show_in(self.sig(), tele, ty)
                        ),
                    )
                    .with_telescope(tele)),
                }
            }
            Term::GelIntro(a, x) => {
                self.affine(tele, *x)?;
                let wty = self.whnf(tele, ty)?;
                match &wty {
                    Term::Gel(ta, y) if y == x => {
                        let a = self.gel_content(tele, a, *x)?;
                        self.check(tele, &a, ta)
                    }
                    _ => self.check_by_infer(tele, t, ty),
                }
            }
            _ => self.check_by_infer(tele, t, ty),
        }
    }

    fn check_by_infer(&mut self, tele: &mut Telescope, t: &Term, ty: &Term) -> TcResult<()> {
        let got = self.infer(tele, t)?;
        if self.conv_types(tele, &got, ty)? {
            Ok(())
        } else {
            Err(self.mismatch(tele, t, ty, &got))
        }
    }

    fn gel_content(&mut self, tele: &Telescope, a: &Term, x: usize) -> TcResult<Term> {
        self.fresh_form(tele, x, a)?.ok_or_else(|| {
            err(
                ErrorCode::GelFreshnessViolation,
                format!(
                    "`{}` mentions `{}` or a variable declared after it",
                    show_in(self.sig(), tele, a),
                    tele.name_of(x).map_or("?".into(), |n| n.to_string())
                ),
            )
            .with_telescope(tele)
        })
    }

    /// `Id A l l` read off a motive `P : (y : A) -> Id A l y -> U`, for
    /// `J P d refl` where the proof alone has no inferable type.
    /// `Id A l l` read off a motive `P : (y : A) -> Id A l y -> U`.
    pub fn refl_type_from_motive(&mut self, tele: &mut Telescope, p: &Term) -> TcResult<Term> {
        let pty = self.infer(tele, p)?;
        if let Term::Pi(_, a, cod) = self.whnf(tele, &pty)? {
            tele.push(Entry::Cart(Ident::new("y"), (*a).clone()));
            let inner = self.whnf(tele, &cod);
            tele.pop();
            if let Term::Pi(_, dom, _) = inner? {
                if let Term::Id(_, l, _) = *dom {
                    let l = instantiate(&l, &Term::Refl);
                    return Ok(Term::Id(a, Box::new(l.clone()), Box::new(l)));
                }
            }
        }
        Err(err(
            ErrorCode::CannotInfer,
            "cannot infer the type of `refl` from the J motive".to_string(),
        )
        .with_telescope(tele))
    }

    fn data_decl(&self, tele: &Telescope, name: &str) -> TcResult<Arc<DataDecl>> {
        self.sig().data(name).cloned().ok_or_else(|| {
            err(ErrorCode::UnboundName, format!("unknown data type `{name}`")).with_telescope(tele)
        })
    }

    /// Checks parameter values against a data type's parameter telescope.
    fn check_params(&mut self, tele: &mut Telescope, d: &DataDecl, ps: &[Term]) -> TcResult<()> {
        if ps.len() != d.params.len() {
            return Err(err(
                ErrorCode::TypeMismatch,
                format!(
                    "`{}` expects {} parameters, got {}",
                    d.name,
                    d.params.len(),
                    ps.len()
                ),
            ));
        }
        for (j, (_, pty)) in d.params.iter().enumerate() {
            let env: Vec<_> = ps[..j]
                .iter()
                .rev()
                .map(|t| crate::syntax::Repl::Term(t.clone()))
                .collect();
            let pty = crate::syntax::instantiate_env(pty, &env)
                .expect("parameter types are cartesian");
            self.check(tele, &ps[j], &pty)?;
        }
        Ok(())
    }

    pub fn infer(&mut self, tele: &mut Telescope, t: &Term) -> TcResult<Term> {
        match t {
            Term::Var(i) => match tele.get(*i) {
                Some(Entry::Cart(..)) => Ok(tele.type_of(*i).expect("cartesian entry")),
                Some(Entry::Aff(x)) => Err(err(
                    ErrorCode::KindMismatch,
                    format!("name variable `{x}` used as a term; write `name {x}`"),
                )
                .with_telescope(tele)),
                None => Err(err(
                    ErrorCode::UnboundVariable,
                    format!("variable index {i} is out of scope"),
                )
                .with_telescope(tele)),
            },
            Term::Universe | Term::Nm => Ok(Term::Universe),
            Term::Pi(x, a, b) | Term::Sigma(x, a, b) => {
                self.check(tele, a, &Term::Universe)?;
                self.under(tele, Entry::Cart(x.clone(), (**a).clone()), |c, tele| {
                    c.check(tele, b, &Term::Universe)
                })?;
                Ok(Term::Universe)
            }
            Term::Lam(x, a, body) => {
                self.check(tele, a, &Term::Universe)?;
                let b = self.under(tele, Entry::Cart(x.clone(), (**a).clone()), |c, tele| {
                    c.infer(tele, body)
                })?;
                Ok(Term::Pi(x.clone(), a.clone(), Box::new(b)))
            }
            Term::App(f, a) => {
                let fty = self.infer(tele, f)?;
                match self.whnf(tele, &fty)? {
                    Term::Pi(_, dom, cod) => {
                        self.check(tele, a, &dom)?;
                        Ok(instantiate(&cod, a))
                    }
                    other => Err(err(
                        ErrorCode::NotAFunction,
                        format!(
                            "`{}` has type `{}`, which is not a function type",
                            show_in(self.sig(), tele, f),
                            show_in(self.sig(), tele, &other)
                        ),
                    )
                    .with_telescope(tele)),
                }
            }
            Term::BridgePi(x, b) => {
                self.under(tele, Entry::Aff(x.clone()), |c, tele| {
                    c.check(tele, b, &Term::Universe)
                })?;
                Ok(Term::Universe)
            }
            Term::BridgeLam(x, body) => {
                let b = self.under(tele, Entry::Aff(x.clone()), |c, tele| c.infer(tele, body))?;
                Ok(Term::BridgePi(x.clone(), Box::new(b)))
            }
            Term::BridgeApp(f, x) => {
                self.affine(tele, *x)?;
                let fty = self.infer(tele, f)?;
                if self.fresh_form(tele, *x, f)?.is_none() {
                    return Err(err(
                        ErrorCode::AffinityViolation,
                        format!(
                            "`{}` cannot be applied to `{}`: it mentions that name or a variable declared after it",
                            show_in(self.sig(), tele, f),
                            tele.name_of(*x).map_or("?".into(), |n| n.to_string())
                        ),
                    )
                    .with_telescope(tele));
                }
                match self.whnf(tele, &fty)? {
                    Term::BridgePi(_, b) => Ok(instantiate_aff(&b, *x)),
                    other => Err(err(
                        ErrorCode::NotAFunction,
                        format!(
                            "`{}` has type `{}`, which is not a bridge type",
                            show_in(self.sig(), tele, f),
                            show_in(self.sig(), tele, &other)
                        ),
                    )
                    .with_telescope(tele)),
                }
            }
            Term::Pair(a, b) => {
                let ta = self.infer(tele, a)?;
                let tb = self.infer(tele, b)?;
                Ok(Term::Sigma(Ident::anon(), Box::new(ta), Box::new(shift(&tb, 1))))
            }
            Term::Fst(p) | Term::Snd(p) => {
                let pty = self.infer(tele, p)?;
                match self.whnf(tele, &pty)? {
                    Term::Sigma(_, a, b) => Ok(match t {
                        Term::Fst(_) => *a,
                        _ => instantiate(&b, &Term::Fst(p.clone())),
                    }),
                    other => Err(err(
                        ErrorCode::TypeMismatch,
                        format!(
                            "projection from `{}` of non-Σ type `{}`",
                            show_in(self.sig(), tele, p),
                            show_in(self.sig(), tele, &other)
                        ),
                    )
                    .with_telescope(tele)),
                }
            }
            Term::Name(x) => {
                self.affine(tele, *x)?;
                Ok(Term::Nm)
            }
            Term::IndNm(n) => {
                self.affine(tele, n.name)?;
                self.check(tele, &n.scrut, &Term::Nm)?;
                let z = Entry::Cart(n.motive_binder.clone(), Term::Nm);
                self.under(tele, z, |c, tele| c.check(tele, &n.motive, &Term::Universe))?;
                self.check(tele, &n.base, &instantiate(&n.motive, &Term::Name(n.name)))?;
                let g = Entry::Cart(n.step_binder.clone(), Term::gel_ty(Term::Nm, n.name));
                let step_ty = instantiate(
                    &shift_from(&n.motive, 1, 1),
                    &Term::forg_nm(n.name + 1, Term::Var(0)),
                );
                self.under(tele, g, |c, tele| c.check(tele, &n.step, &step_ty))?;
                Ok(instantiate(&n.motive, &n.scrut))
            }
            Term::Gel(a, x) => {
                self.affine(tele, *x)?;
                let a = self.gel_content(tele, a, *x)?;
                self.check(tele, &a, &Term::Universe)?;
                Ok(Term::Universe)
            }
            Term::GelIntro(a, x) => {
                self.affine(tele, *x)?;
                let a = self.gel_content(tele, a, *x)?;
                let ta = self.infer(tele, &a)?;
                Ok(Term::gel_ty(ta, *x))
            }
            Term::Ung(g) => {
                let gty = self.infer(tele, g)?;
                let not_gel = |c: &Self, tele: &Telescope, other: &Term| {
                    err(
                        ErrorCode::TypeMismatch,
                        format!(
                            "ung expects a bridge into `Gel A x` with `A` free of `x`, got `{}`",
                            show_in(c.sig(), tele, other)
                        ),
                    )
                    .with_telescope(tele)
                };
                match self.whnf(tele, &gty)? {
                    Term::BridgePi(y, b) => {
                        tele.push(Entry::Aff(y));
                        let wb = self.whnf(tele, &b);
                        tele.pop();
                        match wb? {
                            Term::Gel(a, 0) => match strengthen_at(&a, 0) {
                                Some(a) => Ok(a),
                                None => Err(not_gel(self, tele, &gty)),
                            },
                            _ => Err(not_gel(self, tele, &gty)),
                        }
                    }
                    other => Err(not_gel(self, tele, &other)),
                }
            }
            Term::Ext(e) => self.infer_ext(tele, e),
            Term::Id(a, l, r) => {
                self.check(tele, a, &Term::Universe)?;
                self.check(tele, l, a)?;
                self.check(tele, r, a)?;
                Ok(Term::Universe)
            }
            Term::Refl => Err(err(
                ErrorCode::CannotInfer,
                "cannot infer the type of `refl`; add an annotation",
            )
            .with_telescope(tele)),
            Term::J(p, d, e) => {
                let ety = if **e == Term::Refl {
                    self.refl_type_from_motive(tele, p)?
                } else {
                    self.infer(tele, e)?
                };
                let (a, l, r) = match self.whnf(tele, &ety)? {
                    Term::Id(a, l, r) => (*a, *l, *r),
                    other => {
                        return Err(err(
                            ErrorCode::TypeMismatch,
                            format!(
                                "J eliminates an identity proof, got type `{}`",
                                show_in(self.sig(), tele, &other)
                            ),
                        )
                        .with_telescope(tele))
                    }
                };
                let p_ty = Term::pi(
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
                self.check(tele, p, &p_ty)?;
                self.check(tele, d, &Term::apps((**p).clone(), [l, Term::Refl]))?;
                Ok(Term::apps((**p).clone(), [r, (**e).clone()]))
            }
            Term::Data(name, ps) => {
                let d = self.data_decl(tele, name)?;
                self.check_params(tele, &d, ps)?;
                Ok(Term::Universe)
            }
            Term::Ctor(c) => {
                let d = self.data_decl(tele, &c.data)?;
                let ci = d.ctor_index(&c.ctor).ok_or_else(|| {
                    err(
                        ErrorCode::UnboundName,
                        format!("`{}` is not a constructor of `{}`", c.ctor, c.data),
                    )
                })?;
                self.check_params(tele, &d, &c.params)?;
                let n = d.ctors[ci].args.len();
                if c.args.len() != n {
                    return Err(err(
                        ErrorCode::TypeMismatch,
                        format!("constructor `{}` expects {n} arguments", c.ctor),
                    ));
                }
                for j in 0..n {
                    let ty = d.ctor_arg_type(ci, j, &c.params, &c.args);
                    self.check(tele, &c.args[j], &ty)?;
                }
                Ok(Term::Data(c.data.clone(), c.params.clone()))
            }
            Term::Elim(e) => {
                let d = self.data_decl(tele, &e.data)?;
                self.check_params(tele, &d, &e.params)?;
                let dt = Term::Data(e.data.clone(), e.params.clone());
                let motive_ty = Term::pi("s", dt.clone(), Term::Universe);
                self.check(tele, &e.motive, &motive_ty)?;
                if e.methods.len() != d.ctors.len() {
                    return Err(err(
                        ErrorCode::TypeMismatch,
                        format!("eliminator for `{}` expects {} methods", d.name, d.ctors.len()),
                    ));
                }
                for (ci, m) in e.methods.iter().enumerate() {
                    let mty = d.method_type(ci, &e.params, &e.motive);
                    self.check(tele, m, &mty)?;
                }
                self.check(tele, &e.scrut, &dt)?;
                Ok(Term::app(e.motive.clone(), e.scrut.clone()))
            }
            Term::Global(name) => self.sig().type_of(name).cloned().ok_or_else(|| {
                err(ErrorCode::UnboundName, format!("unknown global `{name}`")).with_telescope(tele)
            }),
        }
    }

    fn infer_ext(&mut self, tele: &mut Telescope, e: &crate::syntax::Ext) -> TcResult<Term> {
        let x = e.name;
        self.affine(tele, x)?;
        let mty = self.infer(tele, &e.method)?;
        if self.fresh_form(tele, x, &e.method)?.is_none() {
            return Err(err(
                ErrorCode::AffinityViolation,
                format!(
                    "ext method `{}` mentions `{}` or a variable declared after it",
                    show_in(self.sig(), tele, &e.method),
                    tele.name_of(x).map_or("?".into(), |n| n.to_string())
                ),
            )
            .with_telescope(tele));
        }
        let bad_method = |c: &Self, tele: &Telescope, ty: &Term| {
            err(
                ErrorCode::TypeMismatch,
                format!(
                    "ext method must have type `((y : @I) -o A) -> (y : @I) -o B`, got `{}`",
                    show_in(c.sig(), tele, ty)
                ),
            )
            .with_telescope(tele)
        };
        let (a_name, dom, cod) = match self.whnf(tele, &mty)? {
            Term::Pi(n, dom, cod) => (n, *dom, *cod),
            other => return Err(bad_method(self, tele, &other)),
        };
        let a_y = match self.whnf(tele, &dom)? {
            Term::BridgePi(_, a) => *a,
            _ => return Err(bad_method(self, tele, &mty)),
        };
        tele.push(Entry::Cart(a_name, dom.clone()));
        let wcod = self.whnf(tele, &cod);
        let (y, b) = match wcod {
            Ok(Term::BridgePi(y, b)) => (y, *b),
            Ok(_) => {
                tele.pop();
                return Err(bad_method(self, tele, &mty));
            }
            Err(d) => {
                tele.pop();
                return Err(d);
            }
        };
        tele.pop();
        self.check(tele, &e.arg, &instantiate_aff(&a_y, x))?;
        match &e.motive {
            Some(mv) => {
                let mv_ty = Term::bpi(
                    "y",
                    Term::pi("a", a_y.clone(), Term::Universe),
                );
                self.check(tele, mv, &mv_ty)?;
                // B ≡ M y (a' y) in Γ, a', y
                let expect = Term::app(
                    Term::bapp(shift(mv, 2), 0),
                    Term::bapp(Term::Var(1), 0),
                );
                tele.push(Entry::Cart(Ident::new("a'"), dom));
                tele.push(Entry::Aff(y));
                let ok = self.conv_types(tele, &b, &expect);
                tele.pop();
                tele.pop();
                if !ok? {
                    return Err(err(
                        ErrorCode::MotiveMismatch,
                        "the ext motive does not match the method's codomain",
                    )
                    .with_telescope(tele));
                }
                Ok(Term::app(Term::bapp(mv.clone(), x), e.arg.clone()))
            }
            None => {
                // B lives in Γ, a', y; it must not depend on a' (index 1).
                let strengthened = match strengthen_at(&b, 1) {
                    Some(b) => Some(b),
                    None => {
                        let mut inner = tele.clone();
                        inner.push(Entry::Cart(Ident::new("a'"), dom));
                        inner.push(Entry::Aff(y));
                        let nb = self.m.normalize(&inner, &b)?;
                        strengthen_at(&nb, 1)
                    }
                };
                match strengthened {
                    Some(b) => Ok(instantiate_aff(&b, x)),
                    None => Err(err(
                        ErrorCode::MotiveMismatch,
                        "ext method's codomain depends on its bridge argument; supply `with motive`",
                    )
                    .with_telescope(tele)),
                }
            }
        }
    }
}

impl Signature {
    /// Checks `decl` against the current signature and appends it.
    pub fn add_decl(&mut self, decl: CoreDecl, budget: u64) -> Result<(), Diagnostic> {
        let name = decl.name().clone();
        let r = self.add_decl_inner(decl, budget);
        r.map_err(|d| d.in_decl(&name))
    }

    fn ensure_fresh(&self, name: &str) -> Result<(), Diagnostic> {
        if self.contains(name) {
            Err(err(ErrorCode::DuplicateName, format!("`{name}` is already defined")))
        } else {
            Ok(())
        }
    }

    fn add_decl_inner(&mut self, decl: CoreDecl, budget: u64) -> Result<(), Diagnostic> {
        self.ensure_fresh(decl.name())?;
        match decl {
            CoreDecl::Def { name, ty, body } => {
                let mut c = Checker::with_budget(self, budget);
                let mut tele = Telescope::new();
                c.check(&mut tele, &ty, &Term::Universe)?;
                c.check(&mut tele, &body, &ty)?;
                self.insert(name, GlobalEntry::Def { ty, body });
            }
            CoreDecl::Postulate { name, ty } => {
                let mut c = Checker::with_budget(self, budget);
                c.check(&mut Telescope::new(), &ty, &Term::Universe)?;
                self.insert(name, GlobalEntry::Postulate { ty });
            }
            CoreDecl::Data(raw) => {
                let elim = crate::datatypes::eliminator_name(&raw.name);
                self.ensure_fresh(&elim)?;
                let params = Telescope::from_entries(
                    raw.params
                        .iter()
                        .map(|(x, t)| Entry::Cart(x.clone(), t.clone()))
                        .collect(),
                );
                Checker::with_budget(self, budget).check_telescope(&params)?;
                self.insert(
                    raw.name.clone(),
                    GlobalEntry::Data(Arc::new(DataDecl {
                        name: raw.name.clone(),
                        params: raw.params.clone(),
                        ctors: vec![],
                    })),
                );
                let checked = (|| {
                    let mut c = Checker::with_budget(self, budget);
                    for (cname, cty) in &raw.ctors {
                        let mut tele = params.clone();
                        c.check(&mut tele, cty, &Term::Universe).map_err(|d| {
                            Diagnostic {
                                message: format!("constructor `{cname}`: {}", d.message),
                                ..d
                            }
                        })?;
                    }
                    check_positivity(&raw)
                })();
                self.pop();
                let d = checked?;
                let ty = d.eliminator_type();
                let body = d.eliminator_body();
                self.insert(raw.name.clone(), GlobalEntry::Data(Arc::new(d)));
                let mut c = Checker::with_budget(self, budget);
                let mut tele = Telescope::new();
                let r = c
                    .check(&mut tele, &ty, &Term::Universe)
                    .and_then(|_| c.check(&mut tele, &body, &ty));
                if let Err(e) = r {
                    self.pop();
                    return Err(e);
                }
                self.insert(Arc::from(elim.as_str()), GlobalEntry::Def { ty, body });
            }
        }
        Ok(())
    }
}

/// Checks a list of declarations in order, starting from `sig`.
pub fn check_signature(
    sig: &mut Signature,
    decls: impl IntoIterator<Item = CoreDecl>,
) -> Result<(), Diagnostic> {
    for d in decls {
        sig.add_decl(d, DEFAULT_BUDGET)?;
    }
    Ok(())
}

/// Convenience wrappers with the default budget.
pub fn infer(sig: &Signature, tele: &Telescope, t: &Term) -> Result<Term, Diagnostic> {
    Checker::new(sig).infer(&mut tele.clone(), t)
}

pub fn check(sig: &Signature, tele: &Telescope, t: &Term, ty: &Term) -> Result<(), Diagnostic> {
    Checker::new(sig).check(&mut tele.clone(), t, ty)
}

pub fn check_telescope(sig: &Signature, tele: &Telescope) -> Result<(), Diagnostic> {
    Checker::new(sig).check_telescope(tele)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tel(spec: &[(&str, Option<Term>)]) -> Telescope {
        let mut t = Telescope::new();
        for (n, ty) in spec {
            match ty {
                Some(ty) => t.push_cart(n, ty.clone()),
                None => t.push_aff(n),
            }
        }
        t
    }

    #[test]
    fn name_intro() {
        let sig = Signature::new();
        let g = tel(&[("x", None)]);
        assert_eq!(infer(&sig, &g, &Term::Name(0)).unwrap(), Term::Nm);
    }

    #[test]
    fn bridge_app_affinity() {
        let sig = Signature::new();
        let a = Term::bpi("y", Term::Nm);
        let g = tel(&[("a'", Some(a.clone())), ("x", None)]);
        assert_eq!(infer(&sig, &g, &Term::bapp(Term::Var(1), 0)).unwrap(), Term::Nm);
        let g = tel(&[("x", None), ("a'", Some(a))]);
        assert_eq!(
            infer(&sig, &g, &Term::bapp(Term::Var(0), 1)).unwrap_err().code,
            ErrorCode::AffinityViolation
        );
    }

    #[test]
    fn gel_intro_freshness() {
        let sig = Signature::new();
        let g = tel(&[("x", None)]);
        assert_eq!(
            infer(&sig, &g, &Term::gel(Term::Name(0), 0)).unwrap_err().code,
            ErrorCode::GelFreshnessViolation
        );
    }

    #[test]
    fn bridge_lambda_checks() {
        let sig = Signature::new();
        let g = Telescope::new();
        let t = Term::blam("x", Term::Name(0));
        check(&sig, &g, &t, &Term::bpi("x", Term::Nm)).unwrap();
        assert_eq!(
            check(&sig, &g, &t, &Term::Nm).unwrap_err().code,
            ErrorCode::TypeMismatch
        );
    }

    #[test]
    fn refl_checks() {
        let sig = Signature::new();
        let g = tel(&[("x", None)]);
        let ty = Term::Id(
            Box::new(Term::Nm),
            Box::new(Term::Name(0)),
            Box::new(Term::Name(0)),
        );
        check(&sig, &g, &Term::Refl, &ty).unwrap();
    }

    #[test]
    fn telescope_checks() {
        let sig = Signature::new();
        check_telescope(&sig, &tel(&[("x", None), ("y", None), ("z", None)])).unwrap();
        let bad = tel(&[("b", Some(Term::Var(3)))]);
        assert_eq!(
            check_telescope(&sig, &bad).unwrap_err().code,
            ErrorCode::IllFormedEntryType
        );
    }

    #[test]
    fn forg_nm_types() {
        let sig = Signature::new();
        // Γ = (x, g : Gel Nm x) ⊢ forg x g : Nm
        let mut g = Telescope::new();
        g.push_aff("x");
        g.push_cart("g", Term::gel_ty(Term::Nm, 0));
        assert_eq!(infer(&sig, &g, &Term::forg_nm(1, Term::Var(0))).unwrap(), Term::Nm);
    }

    #[test]
    fn duplicate_name() {
        let mut sig = Signature::new();
        let d = || CoreDecl::Postulate {
            name: Arc::from("A"),
            ty: Term::Universe,
        };
        check_signature(&mut sig, [d()]).unwrap();
        assert_eq!(
            check_signature(&mut sig, [d()]).unwrap_err().code,
            ErrorCode::DuplicateName
        );
    }
}
