//! Reduction: weak-head and full normalization, traces, and conversion.

use std::fmt;

use crate::diagnostic::{Diagnostic, ErrorCode};
use crate::freshness::{capture_ix, is_fresh_ix};
use crate::signature::{GlobalEntry, Signature};
use crate::syntax::{
    instantiate, instantiate_aff, shift, strengthen_at, Ident, Kind, Term,
};
use crate::telescope::{Entry, Kinds, Scope, Telescope};

pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Beta,
    BridgeBeta,
    ExtBeta,
    GelBeta,
    NmBeta0,
    NmBeta1,
    Iota,
    Delta,
    Fst,
    Snd,
    JBeta,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Beta => "beta",
            Rule::BridgeBeta => "bridge-beta",
            Rule::ExtBeta => "ext-beta",
            Rule::GelBeta => "gel-beta",
            Rule::NmBeta0 => "nm-beta0",
            Rule::NmBeta1 => "nm-beta1",
            Rule::Iota => "iota",
            Rule::Delta => "delta",
            Rule::Fst => "fst",
            Rule::Snd => "snd",
            Rule::JBeta => "j-beta",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One contraction: the rule and the child-index path to the redex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: Rule,
    pub path: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    /// Leftmost-outermost.
    #[default]
    Lo,
    /// Rightmost-innermost.
    Ri,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("reduction budget of {0} steps exceeded")]
    BudgetExceeded(u64),
    #[error("trace step {0} does not match the term")]
    BadTrace(usize),
}

impl From<EvalError> for Diagnostic {
    fn from(e: EvalError) -> Self {
        let code = match e {
            EvalError::BudgetExceeded(_) => ErrorCode::BudgetExceeded,
            EvalError::BadTrace(_) => ErrorCode::TypeMismatch,
        };
        Diagnostic::new(code, e.to_string())
    }
}

pub struct Machine<'s> {
    sig: &'s Signature,
    budget: u64,
    steps: u64,
    strategy: Strategy,
    trace: Option<Vec<TraceStep>>,
    path: Vec<usize>,
}

impl<'s> Machine<'s> {
    pub fn new(sig: &'s Signature) -> Self {
        Machine {
            sig,
            budget: DEFAULT_BUDGET,
            steps: 0,
            strategy: Strategy::Lo,
            trace: None,
            path: Vec::new(),
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_strategy(mut self, s: Strategy) -> Self {
        self.strategy = s;
        self
    }

    pub fn tracing(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn signature(&self) -> &'s Signature {
        self.sig
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn take_trace(&mut self) -> Vec<TraceStep> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    fn reset(&mut self) {
        self.steps = 0;
        self.path.clear();
    }

    pub fn whnf(&mut self, scope: &impl Scope, t: &Term) -> Result<Term, EvalError> {
        self.reset();
        let mut k = Kinds::of(scope);
        let mut t = t.clone();
        self.whnf_mut(&mut k, &mut t)?;
        Ok(t)
    }

    pub fn normalize(&mut self, scope: &impl Scope, t: &Term) -> Result<Term, EvalError> {
        self.reset();
        let mut k = Kinds::of(scope);
        let mut t = t.clone();
        self.normalize_mut(&mut k, &mut t)?;
        Ok(t)
    }

    fn tick(&mut self) -> Result<(), EvalError> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(EvalError::BudgetExceeded(self.budget))
        } else {
            Ok(())
        }
    }

    fn record(&mut self, rule: Rule) {
        if let Some(tr) = &mut self.trace {
            tr.push(TraceStep {
                rule,
                path: self.path.clone(),
            });
        }
    }

    /// Normalizes a subterm for a freshness retry without recording its steps.
    fn quiet_normalize(&mut self, k: &mut Kinds, t: &Term) -> Result<Term, EvalError> {
        let saved_trace = self.trace.take();
        let saved_path = std::mem::take(&mut self.path);
        let mut t = t.clone();
        let r = self.normalize_mut(k, &mut t);
        self.trace = saved_trace;
        self.path = saved_path;
        r.map(|_| t)
    }

    /// One contraction at the root of `t`, if `t` is a redex.
    pub fn contract(&mut self, k: &mut Kinds, t: &Term) -> Result<Option<(Rule, Term)>, EvalError> {
        let r = match t {
            Term::App(f, a) => match &**f {
                Term::Lam(_, _, b) => Some((Rule::Beta, instantiate(b, a))),
                _ => None,
            },
            Term::BridgeApp(f, x) => match &**f {
                Term::BridgeLam(_, b) => Some((Rule::BridgeBeta, instantiate_aff(b, *x))),
                _ => None,
            },
            Term::Fst(p) => match &**p {
                Term::Pair(a, _) => Some((Rule::Fst, (**a).clone())),
                _ => None,
            },
            Term::Snd(p) => match &**p {
                Term::Pair(_, b) => Some((Rule::Snd, (**b).clone())),
                _ => None,
            },
            Term::Ung(g) => match &**g {
                Term::BridgeLam(_, body) => match &**body {
                    Term::GelIntro(a, 0) => match strengthen_at(a, 0) {
                        Some(a) => Some((Rule::GelBeta, a)),
                        None => {
                            k.push(Kind::Aff);
                            let n = self.quiet_normalize(k, a);
                            k.pop();
                            strengthen_at(&n?, 0).map(|a| (Rule::GelBeta, a))
                        }
                    },
                    _ => None,
                },
                _ => None,
            },
            Term::Ext(e) => {
                let binder = Ident::new("y");
                let captured = match capture_ix(k, e.name, &e.arg, binder.clone()) {
                    Ok(c) => Some(c),
                    Err(_) => {
                        let n = self.quiet_normalize(k, &e.arg)?;
                        capture_ix(k, e.name, &n, binder).ok()
                    }
                };
                captured.map(|c| {
                    (
                        Rule::ExtBeta,
                        Term::bapp(Term::app(e.method.clone(), c), e.name),
                    )
                })
            }
            Term::IndNm(n) => {
                if n.scrut == Term::Name(n.name) {
                    Some((Rule::NmBeta0, n.base.clone()))
                } else {
                    let fresh = if is_fresh_ix(k, n.name, &n.scrut) {
                        Some(n.scrut.clone())
                    } else {
                        let s = self.quiet_normalize(k, &n.scrut)?;
                        is_fresh_ix(k, n.name, &s).then_some(s)
                    };
                    fresh.map(|s| {
                        (
                            Rule::NmBeta1,
                            instantiate(&n.step, &Term::gel(s, n.name)),
                        )
                    })
                }
            }
            Term::J(_, d, e) => match &**e {
                Term::Refl => Some((Rule::JBeta, (**d).clone())),
                _ => None,
            },
            Term::Global(name) => match self.sig.get(name) {
                Some(GlobalEntry::Def { body, .. }) => Some((Rule::Delta, body.clone())),
                _ => None,
            },
            Term::Elim(e) => match &e.scrut {
                Term::Ctor(c) if c.data == e.data => {
                    let decl = self.sig.data(&e.data);
                    let ix = decl.and_then(|d| d.ctor_index(&c.ctor).map(|i| (d, i)));
                    ix.map(|(d, i)| (Rule::Iota, d.iota(e, i, &c.args)))
                }
                _ => None,
            },
            _ => None,
        };
        if r.is_some() {
            self.tick()?;
        }
        Ok(r)
    }

    fn with_child<R>(
        &mut self,
        k: &mut Kinds,
        t: &mut Term,
        i: usize,
        f: impl FnOnce(&mut Self, &mut Kinds, &mut Term) -> Result<R, EvalError>,
    ) -> Result<R, EvalError> {
        let (child, binder) = t
            .children_mut()
            .into_iter()
            .nth(i)
            .expect("child index in range");
        if let Some(b) = binder {
            k.push(b);
        }
        self.path.push(i);
        let r = f(self, k, child);
        self.path.pop();
        if binder.is_some() {
            k.pop();
        }
        r
    }

    fn principal(t: &Term) -> Option<usize> {
        match t {
            Term::App(..)
            | Term::BridgeApp(..)
            | Term::Fst(_)
            | Term::Snd(_)
            | Term::Ung(_)
            | Term::IndNm(_) => Some(0),
            Term::J(..) => Some(2),
            Term::Elim(e) => Some(e.params.len() + 1 + e.methods.len()),
            _ => None,
        }
    }

    fn whnf_mut(&mut self, k: &mut Kinds, t: &mut Term) -> Result<(), EvalError> {
        loop {
            if let Some(i) = Self::principal(t) {
                self.with_child(k, t, i, |m, k, c| m.whnf_mut(k, c))?;
                if let Term::Ung(g) = t {
                    if let Term::BridgeLam(..) = **g {
                        self.with_child(k, t, 0, |m, k, g| {
                            m.with_child(k, g, 0, |m, k, body| m.whnf_mut(k, body))
                        })?;
                    }
                }
            }
            match self.contract(k, t)? {
                Some((rule, u)) => {
                    self.record(rule);
                    *t = u;
                }
                None => return Ok(()),
            }
        }
    }

    fn normalize_mut(&mut self, k: &mut Kinds, t: &mut Term) -> Result<(), EvalError> {
        loop {
            match self.strategy {
                Strategy::Lo => {
                    self.whnf_mut(k, t)?;
                    let n = t.children().len();
                    for i in 0..n {
                        self.with_child(k, t, i, |m, k, c| m.normalize_mut(k, c))?;
                    }
                }
                Strategy::Ri => {
                    let n = t.children().len();
                    for i in (0..n).rev() {
                        self.with_child(k, t, i, |m, k, c| m.normalize_mut(k, c))?;
                    }
                }
            }
            match self.contract(k, t)? {
                Some((rule, u)) => {
                    self.record(rule);
                    *t = u;
                }
                None => return Ok(()),
            }
        }
    }

    /// Re-applies `trace` to `t`, contracting the redex at each recorded path.
    pub fn replay(
        &mut self,
        scope: &impl Scope,
        t: &Term,
        trace: &[TraceStep],
    ) -> Result<Term, EvalError> {
        self.reset();
        let saved = self.trace.take();
        let mut t = t.clone();
        let mut k = Kinds::of(scope);
        let mut result = Ok(());
        for (n, step) in trace.iter().enumerate() {
            result = self.replay_at(&mut k, &mut t, &step.path, step.rule, n);
            if result.is_err() {
                break;
            }
        }
        self.trace = saved;
        result.map(|_| t)
    }

    fn replay_at(
        &mut self,
        k: &mut Kinds,
        t: &mut Term,
        path: &[usize],
        rule: Rule,
        n: usize,
    ) -> Result<(), EvalError> {
        match path.split_first() {
            None => match self.contract(k, t)? {
                Some((r, u)) if r == rule => {
                    *t = u;
                    Ok(())
                }
                _ => Err(EvalError::BadTrace(n)),
            },
            Some((&i, rest)) => {
                if i >= t.children().len() {
                    return Err(EvalError::BadTrace(n));
                }
                self.with_child(k, t, i, |m, k, c| m.replay_at(k, c, rest, rule, n))
            }
        }
    }

    /// Type-directed definitional equality of `t` and `u` at `ty` in `tele`.
    pub fn convertible(
        &mut self,
        tele: &Telescope,
        t: &Term,
        u: &Term,
        ty: &Term,
    ) -> Result<bool, EvalError> {
        self.reset();
        let mut tele = tele.clone();
        self.conv_typed(&mut tele, t, u, ty)
    }

    /// Untyped definitional equality (η for functions, bridges and pairs).
    pub fn convertible_untyped(
        &mut self,
        scope: &impl Scope,
        t: &Term,
        u: &Term,
    ) -> Result<bool, EvalError> {
        self.reset();
        let mut k = Kinds::of(scope);
        self.conv(&mut k, t, u)
    }

    fn whnf_in(&mut self, k: &mut Kinds, t: &Term) -> Result<Term, EvalError> {
        let mut t = t.clone();
        let saved = std::mem::take(&mut self.path);
        let r = self.whnf_mut(k, &mut t);
        self.path = saved;
        r.map(|_| t)
    }

    fn conv_typed(
        &mut self,
        tele: &mut Telescope,
        t: &Term,
        u: &Term,
        ty: &Term,
    ) -> Result<bool, EvalError> {
        if t == u {
            return Ok(true);
        }
        let ty = self.whnf_in(&mut Kinds::of(tele), ty)?;
        match &ty {
            Term::Pi(x, a, b) => {
                tele.push(Entry::Cart(x.clone(), (**a).clone()));
                let r = self.conv_typed(
                    tele,
                    &Term::app(shift(t, 1), Term::Var(0)),
                    &Term::app(shift(u, 1), Term::Var(0)),
                    b,
                );
                tele.pop();
                r
            }
            Term::BridgePi(x, b) => {
                tele.push(Entry::Aff(x.clone()));
                let r = self.conv_typed(
                    tele,
                    &Term::bapp(shift(t, 1), 0),
                    &Term::bapp(shift(u, 1), 0),
                    b,
                );
                tele.pop();
                r
            }
            Term::Sigma(_, a, b) => {
                let (ft, fu) = (Term::Fst(Box::new(t.clone())), Term::Fst(Box::new(u.clone())));
                if !self.conv_typed(tele, &ft, &fu, a)? {
                    return Ok(false);
                }
                let b = instantiate(b, &ft);
                self.conv_typed(
                    tele,
                    &Term::Snd(Box::new(t.clone())),
                    &Term::Snd(Box::new(u.clone())),
                    &b,
                )
            }
            Term::Gel(a, x) => {
                let y = Ident::new("y");
                let ct = capture_ix(tele, *x, t, y.clone()).ok();
                let cu = capture_ix(tele, *x, u, y).ok();
                match (ct, cu) {
                    (Some(ct), Some(cu)) => self.conv_typed(tele, &Term::ung(ct), &Term::ung(cu), a),
                    _ => self.conv(&mut Kinds::of(tele), t, u),
                }
            }
            _ => self.conv(&mut Kinds::of(tele), t, u),
        }
    }

    fn conv_under(&mut self, k: &mut Kinds, kind: Kind, t: &Term, u: &Term) -> Result<bool, EvalError> {
        k.push(kind);
        let r = self.conv(k, t, u);
        k.pop();
        r
    }

    fn conv_all(&mut self, k: &mut Kinds, ts: &[Term], us: &[Term]) -> Result<bool, EvalError> {
        if ts.len() != us.len() {
            return Ok(false);
        }
        for (t, u) in ts.iter().zip(us) {
            if !self.conv(k, t, u)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn conv(&mut self, k: &mut Kinds, t: &Term, u: &Term) -> Result<bool, EvalError> {
        if t == u {
            return Ok(true);
        }
        let t = self.whnf_in(k, t)?;
        let u = self.whnf_in(k, u)?;
        if t == u {
            return Ok(true);
        }
        use Term::*;
        Ok(match (&t, &u) {
            (Lam(_, _, b), Lam(_, _, c)) => self.conv_under(k, Kind::Cart, b, c)?,
            (Lam(_, _, b), _) => {
                self.conv_under(k, Kind::Cart, b, &Term::app(shift(&u, 1), Var(0)))?
            }
            (_, Lam(_, _, c)) => {
                self.conv_under(k, Kind::Cart, &Term::app(shift(&t, 1), Var(0)), c)?
            }
            (BridgeLam(_, b), BridgeLam(_, c)) => self.conv_under(k, Kind::Aff, b, c)?,
            (BridgeLam(_, b), _) => {
                self.conv_under(k, Kind::Aff, b, &Term::bapp(shift(&u, 1), 0))?
            }
            (_, BridgeLam(_, c)) => {
                self.conv_under(k, Kind::Aff, &Term::bapp(shift(&t, 1), 0), c)?
            }
            (Pair(a, b), Pair(c, d)) => self.conv(k, a, c)? && self.conv(k, b, d)?,
            (Pair(a, b), _) => {
                self.conv(k, a, &Fst(Box::new(u.clone())))?
                    && self.conv(k, b, &Snd(Box::new(u.clone())))?
            }
            (_, Pair(c, d)) => {
                self.conv(k, &Fst(Box::new(t.clone())), c)?
                    && self.conv(k, &Snd(Box::new(t.clone())), d)?
            }
            (Pi(_, a, b), Pi(_, c, d)) | (Sigma(_, a, b), Sigma(_, c, d)) => {
                self.conv(k, a, c)? && self.conv_under(k, Kind::Cart, b, d)?
            }
            (BridgePi(_, b), BridgePi(_, d)) => self.conv_under(k, Kind::Aff, b, d)?,
            (App(f, a), App(g, b)) => self.conv(k, f, g)? && self.conv(k, a, b)?,
            (BridgeApp(f, x), BridgeApp(g, y)) => x == y && self.conv(k, f, g)?,
            (Fst(a), Fst(b)) | (Snd(a), Snd(b)) | (Ung(a), Ung(b)) => self.conv(k, a, b)?,
            (Gel(a, x), Gel(b, y)) | (GelIntro(a, x), GelIntro(b, y)) => {
                x == y && self.conv(k, a, b)?
            }
            (Id(a, b, c), Id(d, e, f)) | (J(a, b, c), J(d, e, f)) => {
                self.conv(k, a, d)? && self.conv(k, b, e)? && self.conv(k, c, f)?
            }
            (IndNm(m), IndNm(n)) => {
                m.name == n.name
                    && self.conv(k, &m.scrut, &n.scrut)?
                    && self.conv(k, &m.base, &n.base)?
                    && self.conv_under(k, Kind::Cart, &m.step, &n.step)?
            }
            (Ext(e), Ext(f)) => {
                e.name == f.name && self.conv(k, &e.method, &f.method)? && self.conv(k, &e.arg, &f.arg)?
            }
            (Data(m, ps), Data(n, qs)) => m == n && self.conv_all(k, ps, qs)?,
            (Ctor(c), Ctor(d)) => {
                c.data == d.data
                    && c.ctor == d.ctor
                    && self.conv_all(k, &c.params, &d.params)?
                    && self.conv_all(k, &c.args, &d.args)?
            }
            (Elim(e), Elim(f)) => {
                e.data == f.data
                    && self.conv_all(k, &e.params, &f.params)?
                    && self.conv(k, &e.motive, &f.motive)?
                    && self.conv_all(k, &e.methods, &f.methods)?
                    && self.conv(k, &e.scrut, &f.scrut)?
            }
            _ => false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::IndNm;

    fn kinds(spec: &[Kind]) -> Kinds {
        let mut k = Kinds::default();
        for &x in spec {
            k.push(x);
        }
        k
    }

    fn indnm(name: usize, scrut: Term) -> Term {
        Term::IndNm(Box::new(IndNm {
            name,
            scrut,
            base: Term::Universe,
            step_binder: Ident::new("g"),
            step: Term::Var(0),
            motive_binder: Ident::new("z"),
            motive: Term::Universe,
        }))
    }

    #[test]
    fn gel_beta() {
        let sig = Signature::new();
        let k = kinds(&[Kind::Aff]);
        // Γ = (y): ung (λx. gel (name y) x) → name y
        let t = Term::ung(Term::blam("x", Term::gel(Term::Name(1), 0)));
        assert_eq!(Machine::new(&sig).whnf(&k, &t).unwrap(), Term::Name(0));
    }

    #[test]
    fn nm_beta0_and_beta1() {
        let sig = Signature::new();
        let k = kinds(&[Kind::Aff]);
        assert_eq!(
            Machine::new(&sig).whnf(&k, &indnm(0, Term::Name(0))).unwrap(),
            Term::Universe
        );
        let k = kinds(&[Kind::Aff, Kind::Aff]);
        assert_eq!(
            Machine::new(&sig).whnf(&k, &indnm(0, Term::Name(1))).unwrap(),
            Term::gel(Term::Name(1), 0)
        );
        // Γ = (x, n : Nm): stuck
        let k = kinds(&[Kind::Aff, Kind::Cart]);
        let t = indnm(1, Term::Var(0));
        assert_eq!(Machine::new(&sig).whnf(&k, &t).unwrap(), t);
    }

    #[test]
    fn forg_chain_trace() {
        let sig = Signature::new();
        let k = kinds(&[Kind::Aff, Kind::Aff]);
        let t = Term::forg_nm(0, Term::gel(Term::Name(1), 0));
        let mut m = Machine::new(&sig).tracing();
        let n = m.normalize(&k, &t).unwrap();
        assert_eq!(n, Term::Name(1));
        let rules: Vec<_> = m.take_trace().iter().map(|s| s.rule).collect();
        assert_eq!(rules, [Rule::ExtBeta, Rule::Beta, Rule::BridgeBeta, Rule::GelBeta]);
    }

    #[test]
    fn ext_stuck_when_capture_fails() {
        let sig = Signature::new();
        let k = kinds(&[Kind::Aff, Kind::Cart]);
        let t = Term::forg_nm(1, Term::Var(0));
        assert_eq!(Machine::new(&sig).normalize(&k, &t).unwrap(), t);
    }

    #[test]
    fn replay_reproduces_output() {
        let sig = Signature::new();
        let k = kinds(&[Kind::Aff, Kind::Aff]);
        let t = Term::app(
            Term::lam("a", Term::Nm, Term::Var(0)),
            Term::forg_nm(0, Term::gel(Term::Name(1), 0)),
        );
        for s in [Strategy::Lo, Strategy::Ri] {
            let mut m = Machine::new(&sig).with_strategy(s).tracing();
            let n = m.normalize(&k, &t).unwrap();
            let tr = m.take_trace();
            assert_eq!(Machine::new(&sig).replay(&k, &t, &tr).unwrap(), n);
        }
    }

    #[test]
    fn budget_exceeded() {
        let sig = Signature::new();
        // ω ω with ω = λ(f : U). f f  (ill-typed, but reduction does not care)
        let w = Term::lam("f", Term::Universe, Term::app(Term::Var(0), Term::Var(0)));
        let t = Term::app(w.clone(), w);
        let r = Machine::new(&sig).with_budget(50).normalize(&Kinds::default(), &t);
        assert_eq!(r, Err(EvalError::BudgetExceeded(50)));
    }

    #[test]
    fn bridge_eta() {
        let sig = Signature::new();
        let mut tele = Telescope::new();
        tele.push_cart("a'", Term::bpi("x", Term::Nm));
        let f = Term::Var(0);
        let eta = Term::blam("x", Term::bapp(Term::Var(1), 0));
        let ty = Term::bpi("x", Term::Nm);
        assert!(Machine::new(&sig).convertible(&tele, &eta, &f, &ty).unwrap());
    }
}
