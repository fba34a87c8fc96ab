//! Core term syntax.
//!
//! Variables are de Bruijn indices into one ordered telescope whose entries
//! are either cartesian (typed) or affine (bridge names). `Var` is the only
//! cartesian reference; affine references live in the dedicated slots of
//! `BridgeApp`, `Name`, `IndNm`, `Gel`, `GelIntro` and `Ext`.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// Global name of a definition, postulate, data type or constructor.
pub type GName = Arc<str>;

/// Display name of a binder or telescope entry.
///
/// Names are metadata: any two `Ident`s compare equal, so derived equality on
/// [`Term`] is α-equivalence.
#[derive(Clone)]
pub struct Ident(Arc<str>);

impl Ident {
    pub fn new(s: &str) -> Self {
        Ident(Arc::from(s))
    }

    pub fn anon() -> Self {
        Ident::new("_")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl PartialEq for Ident {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Ident {}

impl Hash for Ident {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl fmt::Debug for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Ident {
    fn from(s: &str) -> Self {
        Ident::new(s)
    }
}

/// Kind of a telescope entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Cart,
    Aff,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    Universe,
    Pi(Ident, Box<Term>, Box<Term>),
    Lam(Ident, Box<Term>, Box<Term>),
    App(Box<Term>, Box<Term>),
    /// `(x : 𝕀) ⊸ B`, body under one affine binder.
    BridgePi(Ident, Box<Term>),
    BridgeLam(Ident, Box<Term>),
    BridgeApp(Box<Term>, usize),
    Sigma(Ident, Box<Term>, Box<Term>),
    Pair(Box<Term>, Box<Term>),
    Fst(Box<Term>),
    Snd(Box<Term>),
    Nm,
    /// The name `c x` of an affine variable.
    Name(usize),
    IndNm(Box<IndNm>),
    Gel(Box<Term>, usize),
    GelIntro(Box<Term>, usize),
    Ung(Box<Term>),
    Ext(Box<Ext>),
    Id(Box<Term>, Box<Term>, Box<Term>),
    Refl,
    /// `J motive base eq`.
    J(Box<Term>, Box<Term>, Box<Term>),
    Data(GName, Vec<Term>),
    Ctor(Box<CtorApp>),
    Elim(Box<Elim>),
    Global(GName),
}

/// Name induction `ind_Nm x scrut base (λ g. step)` with motive `λ z. motive`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndNm {
    pub name: usize,
    pub scrut: Term,
    pub base: Term,
    pub step_binder: Ident,
    /// Under one cartesian binder `g : Gel Nm x`.
    pub step: Term,
    pub motive_binder: Ident,
    /// Under one cartesian binder `z : Nm`.
    pub motive: Term,
}

/// Extent `ext method x arg`.
///
/// `motive`, when present, is a term of type `(y : 𝕀) ⊸ (a : A y) → U`
/// fixing the result family; otherwise the result type is read off the
/// method's codomain, which must not depend on the bridge argument.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ext {
    pub method: Term,
    pub name: usize,
    pub arg: Term,
    pub motive: Option<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CtorApp {
    pub data: GName,
    pub ctor: GName,
    pub params: Vec<Term>,
    pub args: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Elim {
    pub data: GName,
    pub params: Vec<Term>,
    pub motive: Term,
    pub methods: Vec<Term>,
    pub scrut: Term,
}

impl Term {
    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn bapp(f: Term, x: usize) -> Term {
        Term::BridgeApp(Box::new(f), x)
    }

    pub fn pi(x: &str, dom: Term, cod: Term) -> Term {
        Term::Pi(Ident::new(x), Box::new(dom), Box::new(cod))
    }

    pub fn lam(x: &str, dom: Term, body: Term) -> Term {
        Term::Lam(Ident::new(x), Box::new(dom), Box::new(body))
    }

    pub fn bpi(x: &str, body: Term) -> Term {
        Term::BridgePi(Ident::new(x), Box::new(body))
    }

    pub fn blam(x: &str, body: Term) -> Term {
        Term::BridgeLam(Ident::new(x), Box::new(body))
    }

    pub fn sigma(x: &str, a: Term, b: Term) -> Term {
        Term::Sigma(Ident::new(x), Box::new(a), Box::new(b))
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::Pair(Box::new(a), Box::new(b))
    }

    pub fn gel_ty(a: Term, x: usize) -> Term {
        Term::Gel(Box::new(a), x)
    }

    pub fn gel(a: Term, x: usize) -> Term {
        Term::GelIntro(Box::new(a), x)
    }

    pub fn ung(g: Term) -> Term {
        Term::Ung(Box::new(g))
    }

    pub fn ext(method: Term, name: usize, arg: Term) -> Term {
        Term::Ext(Box::new(Ext {
            method,
            name,
            arg,
            motive: None,
        }))
    }

    pub fn global(n: &str) -> Term {
        Term::Global(Arc::from(n))
    }

    pub fn data(n: &str, params: Vec<Term>) -> Term {
        Term::Data(Arc::from(n), params)
    }

    pub fn ctor(data: &str, ctor: &str, params: Vec<Term>, args: Vec<Term>) -> Term {
        Term::Ctor(Box::new(CtorApp {
            data: Arc::from(data),
            ctor: Arc::from(ctor),
            params,
            args,
        }))
    }

    /// The closed method `λ(g' : (y:𝕀) ⊸ Gel A y). λ(_:𝕀). ung g'` of `forg`,
    /// with `a` the (closed or suitably shifted) carrier.
    pub fn forg_method(a: Term) -> Term {
        let a1 = shift(&a, 1);
        Term::lam(
            "g'",
            Term::bpi("y", Term::gel_ty(a1, 0)),
            Term::blam("_", Term::ung(Term::Var(1))),
        )
    }

    /// `forg x g` at carrier `Nm`, as it appears in the name-induction rule.
    pub fn forg_nm(x: usize, g: Term) -> Term {
        Term::ext(Term::forg_method(Term::Nm), x, g)
    }

    /// Immediate subterms with the kind of binder (if any) entered to reach them.
    pub fn children(&self) -> Vec<(&Term, Option<Kind>)> {
        use Term::*;
        const C: Option<Kind> = Some(Kind::Cart);
        const A: Option<Kind> = Some(Kind::Aff);
        match self {
            Var(_) | Universe | Nm | Name(_) | Refl | Global(_) => vec![],
            Pi(_, a, b) | Lam(_, a, b) | Sigma(_, a, b) => vec![(a, None), (b, C)],
            App(f, a) | Pair(f, a) => vec![(f, None), (a, None)],
            BridgePi(_, b) | BridgeLam(_, b) => vec![(b, A)],
            BridgeApp(f, _) | Fst(f) | Snd(f) | Gel(f, _) | GelIntro(f, _) | Ung(f) => {
                vec![(f, None)]
            }
            IndNm(n) => vec![
                (&n.scrut, None),
                (&n.base, None),
                (&n.step, C),
                (&n.motive, C),
            ],
            Ext(e) => {
                let mut v = vec![(&e.method, None), (&e.arg, None)];
                if let Some(m) = &e.motive {
                    v.push((m, None));
                }
                v
            }
            Id(a, b, c) | J(a, b, c) => vec![(a, None), (b, None), (c, None)],
            Data(_, ps) => ps.iter().map(|p| (p, None)).collect(),
            Ctor(c) => c.params.iter().chain(&c.args).map(|p| (p, None)).collect(),
            Elim(e) => e
                .params
                .iter()
                .chain(std::iter::once(&e.motive))
                .chain(&e.methods)
                .chain(std::iter::once(&e.scrut))
                .map(|p| (p, None))
                .collect(),
        }
    }

    pub fn children_mut(&mut self) -> Vec<(&mut Term, Option<Kind>)> {
        use Term::*;
        const C: Option<Kind> = Some(Kind::Cart);
        const A: Option<Kind> = Some(Kind::Aff);
        match self {
            Var(_) | Universe | Nm | Name(_) | Refl | Global(_) => vec![],
            Pi(_, a, b) | Lam(_, a, b) | Sigma(_, a, b) => vec![(a, None), (b, C)],
            App(f, a) | Pair(f, a) => vec![(f, None), (a, None)],
            BridgePi(_, b) | BridgeLam(_, b) => vec![(b, A)],
            BridgeApp(f, _) | Fst(f) | Snd(f) | Gel(f, _) | GelIntro(f, _) | Ung(f) => {
                vec![(f, None)]
            }
            IndNm(n) => {
                let n = &mut **n;
                vec![
                    (&mut n.scrut, None),
                    (&mut n.base, None),
                    (&mut n.step, C),
                    (&mut n.motive, C),
                ]
            }
            Ext(e) => {
                let e = &mut **e;
                let mut v = vec![(&mut e.method, None), (&mut e.arg, None)];
                if let Some(m) = &mut e.motive {
                    v.push((m, None));
                }
                v
            }
            Id(a, b, c) | J(a, b, c) => vec![(a, None), (b, None), (c, None)],
            Data(_, ps) => ps.iter_mut().map(|p| (p, None)).collect(),
            Ctor(c) => {
                let c = &mut **c;
                c.params
                    .iter_mut()
                    .chain(c.args.iter_mut())
                    .map(|p| (p, None))
                    .collect()
            }
            Elim(e) => {
                let e = &mut **e;
                e.params
                    .iter_mut()
                    .chain(std::iter::once(&mut e.motive))
                    .chain(e.methods.iter_mut())
                    .chain(std::iter::once(&mut e.scrut))
                    .map(|p| (p, None))
                    .collect()
            }
        }
    }

    /// Affine variable slots held directly by this node.
    pub fn affine_slots(&self) -> Vec<usize> {
        match self {
            Term::BridgeApp(_, x) | Term::Name(x) | Term::Gel(_, x) | Term::GelIntro(_, x) => {
                vec![*x]
            }
            Term::IndNm(n) => vec![n.name],
            Term::Ext(e) => vec![e.name],
            _ => vec![],
        }
    }

    fn affine_slots_mut(&mut self) -> Vec<&mut usize> {
        match self {
            Term::BridgeApp(_, x) | Term::Name(x) | Term::Gel(_, x) | Term::GelIntro(_, x) => {
                vec![x]
            }
            Term::IndNm(n) => vec![&mut n.name],
            Term::Ext(e) => vec![&mut e.name],
            _ => vec![],
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|(c, _)| c.size()).sum::<usize>()
    }
}

/// Rewrites every free variable reference of `t` in place.
///
/// `on_var(ix, depth)` sees cartesian references with `ix >= depth` (i.e.
/// free) and may return a replacement already valid at `depth`; `on_aff`
/// does the same for affine slots, returning the new index.
pub fn traverse<E>(
    t: &mut Term,
    depth: usize,
    on_var: &mut dyn FnMut(usize, usize) -> Result<Option<Term>, E>,
    on_aff: &mut dyn FnMut(usize, usize) -> Result<usize, E>,
) -> Result<(), E> {
    if let Term::Var(i) = t {
        if *i >= depth {
            if let Some(r) = on_var(*i, depth)? {
                *t = r;
            }
        }
        return Ok(());
    }
    for slot in t.affine_slots_mut() {
        if *slot >= depth {
            *slot = on_aff(*slot, depth)?;
        }
    }
    for (child, binder) in t.children_mut() {
        let d = depth + usize::from(binder.is_some());
        traverse(child, d, on_var, on_aff)?;
    }
    Ok(())
}

/// Calls `f(kind, ix)` on every free occurrence (indices relative to the
/// ambient context of `t`).
pub fn visit_free(t: &Term, f: &mut dyn FnMut(Kind, usize)) {
    fn go(t: &Term, depth: usize, f: &mut dyn FnMut(Kind, usize)) {
        if let Term::Var(i) = t {
            if *i >= depth {
                f(Kind::Cart, i - depth);
            }
            return;
        }
        for x in t.affine_slots() {
            if x >= depth {
                f(Kind::Aff, x - depth);
            }
        }
        for (c, b) in t.children() {
            go(c, depth + usize::from(b.is_some()), f);
        }
    }
    go(t, 0, f)
}

/// True iff `t` has a free occurrence (of either kind) of index `ix`.
pub fn mentions(t: &Term, ix: usize) -> bool {
    let mut found = false;
    visit_free(t, &mut |_, i| found |= i == ix);
    found
}

/// Shifts free indices `>= cutoff` up by `by`.
pub fn shift_from(t: &Term, cutoff: usize, by: usize) -> Term {
    if by == 0 {
        return t.clone();
    }
    let mut out = t.clone();
    let _ = traverse::<()>(
        &mut out,
        0,
        &mut |i, d| {
            Ok((i - d >= cutoff).then(|| Term::Var(i + by)))
        },
        &mut |i, d| Ok(if i - d >= cutoff { i + by } else { i }),
    );
    out
}

pub fn shift(t: &Term, by: usize) -> Term {
    shift_from(t, 0, by)
}

/// Removes the unused free index `ix`, decrementing indices above it.
/// Returns `None` when `t` mentions `ix`.
pub fn strengthen_at(t: &Term, ix: usize) -> Option<Term> {
    let mut out = t.clone();
    traverse::<()>(
        &mut out,
        0,
        &mut |i, d| match (i - d).cmp(&ix) {
            std::cmp::Ordering::Less => Ok(None),
            std::cmp::Ordering::Equal => Err(()),
            std::cmp::Ordering::Greater => Ok(Some(Term::Var(i - 1))),
        },
        &mut |i, d| match (i - d).cmp(&ix) {
            std::cmp::Ordering::Less => Ok(i),
            std::cmp::Ordering::Equal => Err(()),
            std::cmp::Ordering::Greater => Ok(i - 1),
        },
    )
    .ok()?;
    Some(out)
}

/// Replacement for one variable in a substitution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Repl {
    Term(Term),
    Aff(usize),
}

/// Raised when a substitution would put a term into an affine slot or an
/// affine variable into a term position.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("kind mismatch substituting index {0}")]
pub struct KindMismatch(pub usize);

/// Parallel substitution for the `env.len()` innermost variables of `body`:
/// index `i < env.len()` becomes `env[i]` and the binders are dropped, so the
/// result lives in the context the replacements are expressed in.
pub fn instantiate_env(body: &Term, env: &[Repl]) -> Result<Term, KindMismatch> {
    let n = env.len();
    let mut out = body.clone();
    traverse(
        &mut out,
        0,
        &mut |i, d| {
            let k = i - d;
            if k < n {
                match &env[k] {
                    Repl::Term(r) => Ok(Some(shift(r, d))),
                    Repl::Aff(_) => Err(KindMismatch(k)),
                }
            } else {
                Ok(Some(Term::Var(i - n)))
            }
        },
        &mut |i, d| {
            let k = i - d;
            if k < n {
                match &env[k] {
                    Repl::Aff(x) => Ok(x + d),
                    Repl::Term(_) => Err(KindMismatch(k)),
                }
            } else {
                Ok(i - n)
            }
        },
    )?;
    Ok(out)
}

/// `body[arg/0]` for a body under one cartesian binder.
///
/// Panics if `body` uses index 0 in an affine slot; well-scoped terms never do.
pub fn instantiate(body: &Term, arg: &Term) -> Term {
    instantiate_env(body, &[Repl::Term(arg.clone())])
        .expect("cartesian binder referenced from an affine slot")
}

/// `body[x/0]` for a body under one affine binder.
pub fn instantiate_aff(body: &Term, x: usize) -> Term {
    instantiate_env(body, &[Repl::Aff(x)]).expect("affine binder referenced as a term")
}

/// Substitutes `s` for every free occurrence of index `target`, keeping the
/// context unchanged.
pub fn subst(t: &Term, target: usize, s: &Repl) -> Result<Term, KindMismatch> {
    let mut out = t.clone();
    traverse(
        &mut out,
        0,
        &mut |i, d| {
            if i - d != target {
                return Ok(None);
            }
            match s {
                Repl::Term(r) => Ok(Some(shift(r, d))),
                Repl::Aff(_) => Err(KindMismatch(target)),
            }
        },
        &mut |i, d| {
            if i - d != target {
                return Ok(i);
            }
            match s {
                Repl::Aff(x) => Ok(x + d),
                Repl::Term(_) => Err(KindMismatch(target)),
            }
        },
    )?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_do_not_affect_equality() {
        let a = Term::lam("x", Term::Nm, Term::Var(0));
        let b = Term::lam("y", Term::Nm, Term::Var(0));
        assert_eq!(a, b);
    }

    #[test]
    fn shift_respects_binders() {
        // λ(a:Nm). v1 v0  ↦  λ(a:Nm). v3 v0
        let t = Term::lam("a", Term::Nm, Term::app(Term::Var(1), Term::Var(0)));
        let s = shift(&t, 2);
        assert_eq!(
            s,
            Term::lam("a", Term::Nm, Term::app(Term::Var(3), Term::Var(0)))
        );
    }

    #[test]
    fn bridge_beta_substitution() {
        // (λy. name y) x  with x at index 3 gives name x
        let body = Term::Name(0);
        assert_eq!(instantiate_aff(&body, 3), Term::Name(3));
        // a gel under the binder keeps outer references decremented
        let body = Term::gel(Term::Name(2), 0);
        assert_eq!(instantiate_aff(&body, 0), Term::gel(Term::Name(1), 0));
    }

    #[test]
    fn subst_rejects_term_into_affine_slot() {
        let t = Term::Name(0);
        assert_eq!(
            subst(&t, 0, &Repl::Term(Term::Nm)),
            Err(KindMismatch(0))
        );
        assert_eq!(subst(&Term::Var(0), 0, &Repl::Aff(1)), Err(KindMismatch(0)));
    }

    #[test]
    fn subst_self_is_identity() {
        let t = Term::app(Term::Var(2), Term::gel(Term::Var(2), 1));
        assert_eq!(subst(&t, 2, &Repl::Term(Term::Var(2))).unwrap(), t);
        assert_eq!(subst(&t, 1, &Repl::Aff(1)).unwrap(), t);
    }

    #[test]
    fn strengthen_detects_use() {
        let t = Term::app(Term::Var(0), Term::Var(2));
        assert_eq!(strengthen_at(&t, 2), None);
        assert_eq!(
            strengthen_at(&t, 1),
            Some(Term::app(Term::Var(0), Term::Var(1)))
        );
    }
}
