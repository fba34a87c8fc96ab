//! Deterministic printer for core terms, telescopes and declarations.
//!
//! Output re-parses and re-elaborates to the same term: lambdas are always
//! annotated, constructors are printed without parameters, eliminator nodes
//! as saturated applications of `indD`, and binders that would be captured
//! or shadow a global are renamed `x0, x1, ...`.

use crate::datatypes::DataDecl;
use crate::signature::{GlobalEntry, Signature};
use crate::syntax::{mentions, Ident, Term};
use crate::telescope::{Entry, Telescope};

use super::lexer::is_valid_ident;

const LOW: u8 = 0;
const APP: u8 = 1;
const ATOM: u8 = 2;

pub struct Printer<'a> {
    sig: &'a Signature,
    names: Vec<String>,
}

impl<'a> Printer<'a> {
    pub fn new(sig: &'a Signature) -> Self {
        Printer {
            sig,
            names: Vec::new(),
        }
    }

    /// A printer whose scope holds the entries of `tele`, named as declared.
    pub fn in_telescope(sig: &'a Signature, tele: &Telescope) -> Self {
        Printer {
            sig,
            names: tele
                .entries()
                .iter()
                .map(|e| e.name().to_string())
                .collect(),
        }
    }

    fn clashes(&self, s: &str) -> bool {
        self.names.iter().any(|n| n == s) || self.sig.contains(s) || self.sig.is_ctor_name(s)
    }

    /// Display name for a binder; `used` says whether the body refers to it.
    fn binder_name(&self, hint: &Ident, used: bool) -> String {
        if !used {
            return "_".into();
        }
        let h = hint.as_str();
        if h != "_" && is_valid_ident(h) && !self.clashes(h) {
            return h.to_string();
        }
        (0..)
            .map(|i| format!("x{i}"))
            .find(|c| !self.clashes(c))
            .expect("some name is free")
    }

    fn var(&self, ix: usize) -> String {
        match self.names.len().checked_sub(ix + 1) {
            Some(l) => self.names[l].clone(),
            None => format!("#{ix}"),
        }
    }

    fn with_name<R>(&mut self, n: String, f: impl FnOnce(&mut Self) -> R) -> R {
        self.names.push(n);
        let r = f(self);
        self.names.pop();
        r
    }

    pub fn term(&mut self, t: &Term) -> String {
        self.go(t, LOW)
    }

    fn paren(s: String, wrap: bool) -> String {
        if wrap {
            format!("({s})")
        } else {
            s
        }
    }

    fn go(&mut self, t: &Term, prec: u8) -> String {
        match t {
            Term::Var(i) => self.var(*i),
            Term::Universe => "U".into(),
            Term::Nm => "Nm".into(),
            Term::Refl => "refl".into(),
            Term::Global(n) => n.to_string(),
            Term::Lam(..) | Term::BridgeLam(..) => {
                let s = self.lambda(t);
                Self::paren(s, prec > LOW)
            }
            Term::Pi(x, a, b) => {
                let s = if mentions(b, 0) {
                    let n = self.binder_name(x, true);
                    let a = self.go(a, LOW);
                    let b = self.with_name(n.clone(), |p| p.go(b, LOW));
                    format!("({n} : {a}) -> {b}")
                } else {
                    let a = self.go(a, APP);
                    let b = self.with_name("_".into(), |p| p.go(b, LOW));
                    format!("{a} -> {b}")
                };
                Self::paren(s, prec > LOW)
            }
            Term::BridgePi(x, b) => {
                let s = if mentions(b, 0) {
                    let n = self.binder_name(x, true);
                    let b = self.with_name(n.clone(), |p| p.go(b, LOW));
                    format!("({n} : @I) -o {b}")
                } else {
                    let b = self.with_name("_".into(), |p| p.go(b, LOW));
                    format!("@I -o {b}")
                };
                Self::paren(s, prec > LOW)
            }
            Term::Sigma(x, a, b) => {
                let n = self.binder_name(x, mentions(b, 0));
                let a = self.go(a, LOW);
                let b = self.with_name(n.clone(), |p| p.go(b, LOW));
                Self::paren(format!("Sig ({n} : {a}). {b}"), prec > LOW)
            }
            Term::Pair(..) => {
                let mut items = Vec::new();
                let mut cur = t;
                while let Term::Pair(a, b) = cur {
                    items.push(self.go(a, LOW));
                    cur = b;
                }
                items.push(self.go(cur, LOW));
                format!("({})", items.join(", "))
            }
            Term::App(..) | Term::BridgeApp(..) => {
                let mut args = Vec::new();
                let mut cur = t;
                loop {
                    match cur {
                        Term::App(f, a) => {
                            args.push(self.go(a, ATOM));
                            cur = f;
                        }
                        Term::BridgeApp(f, x) => {
                            args.push(self.var(*x));
                            cur = f;
                        }
                        _ => break,
                    }
                }
                args.reverse();
                let head_prec = match cur {
                    Term::Fst(_)
                    | Term::Snd(_)
                    | Term::Ung(_)
                    | Term::GelIntro(..)
                    | Term::J(..) => APP,
                    Term::Ext(e) if e.motive.is_none() => APP,
                    _ => ATOM,
                };
                let head = self.go(cur, head_prec);
                Self::paren(format!("{head} {}", args.join(" ")), prec > APP)
            }
            Term::Fst(p) => {
                let p = self.go(p, ATOM);
                self.spine("fst", &[p], prec)
            }
            Term::Snd(p) => {
                let p = self.go(p, ATOM);
                self.spine("snd", &[p], prec)
            }
            Term::Name(x) => self.spine("name", &[self.var(*x)], prec),
            Term::Gel(a, x) => {
                let a = self.go(a, ATOM);
                self.spine("Gel", &[a, self.var(*x)], prec)
            }
            Term::GelIntro(a, x) => {
                let a = self.go(a, ATOM);
                self.spine("gel", &[a, self.var(*x)], prec)
            }
            Term::Ung(g) => {
                let g = self.go(g, ATOM);
                self.spine("ung", &[g], prec)
            }
            Term::Ext(e) => {
                let m = self.go(&e.method, ATOM);
                let a = self.go(&e.arg, ATOM);
                let x = self.var(e.name);
                match &e.motive {
                    None => self.spine("ext", &[m, x, a], prec),
                    Some(mv) => {
                        let mv = self.go(mv, LOW);
                        Self::paren(format!("ext {m} {x} {a} with motive {mv}"), prec > LOW)
                    }
                }
            }
            Term::IndNm(n) => {
                let x = self.var(n.name);
                let s = self.go(&n.scrut, ATOM);
                let b = self.go(&n.base, ATOM);
                let step = Term::Lam(
                    n.step_binder.clone(),
                    Box::new(Term::gel_ty(Term::Nm, n.name)),
                    Box::new(n.step.clone()),
                );
                let step = self.go(&step, ATOM);
                let motive = Term::Lam(
                    n.motive_binder.clone(),
                    Box::new(Term::Nm),
                    Box::new(n.motive.clone()),
                );
                let m = self.go(&motive, LOW);
                Self::paren(
                    format!("indNm {x} {s} {b} {step} with motive {m}"),
                    prec > LOW,
                )
            }
            Term::Id(a, l, r) => {
                let v = [self.go(a, ATOM), self.go(l, ATOM), self.go(r, ATOM)];
                self.spine("Id", &v, prec)
            }
            Term::J(p, d, e) => {
                let v = [self.go(p, ATOM), self.go(d, ATOM), self.go(e, ATOM)];
                self.spine("J", &v, prec)
            }
            Term::Data(n, ps) => {
                let v: Vec<_> = ps.iter().map(|p| self.go(p, ATOM)).collect();
                self.spine(n, &v, prec)
            }
            Term::Ctor(c) => {
                let v: Vec<_> = c.args.iter().map(|p| self.go(p, ATOM)).collect();
                self.spine(&c.ctor, &v, prec)
            }
            Term::Elim(e) => {
                let v: Vec<_> = e
                    .params
                    .iter()
                    .chain(std::iter::once(&e.motive))
                    .chain(&e.methods)
                    .chain(std::iter::once(&e.scrut))
                    .map(|p| self.go(p, ATOM))
                    .collect();
                let head = crate::datatypes::eliminator_name(&e.data);
                self.spine(&head, &v, prec)
            }
        }
    }

    fn spine(&self, head: &str, args: &[String], prec: u8) -> String {
        if args.is_empty() {
            return head.to_string();
        }
        Self::paren(format!("{head} {}", args.join(" ")), prec > APP)
    }

    fn lambda(&mut self, t: &Term) -> String {
        let mut groups = Vec::new();
        let mut cur = t;
        let depth = self.names.len();
        loop {
            match cur {
                Term::Lam(x, a, b) => {
                    let n = self.binder_name(x, mentions(b, 0));
                    let a = self.go(a, LOW);
                    groups.push(format!("({n} : {a})"));
                    self.names.push(n);
                    cur = b;
                }
                Term::BridgeLam(x, b) => {
                    let n = self.binder_name(x, mentions(b, 0));
                    groups.push(format!("({n} : @I)"));
                    self.names.push(n);
                    cur = b;
                }
                _ => break,
            }
        }
        let body = self.go(cur, LOW);
        self.names.truncate(depth);
        format!("\\{}. {body}", groups.join(" "))
    }

    pub fn telescope(&mut self, tele: &Telescope) -> String {
        let depth = self.names.len();
        let mut parts = Vec::new();
        for e in tele.entries() {
            match e {
                Entry::Cart(x, ty) => {
                    let ty = self.go(ty, LOW);
                    parts.push(format!("({x} : {ty})"));
                }
                Entry::Aff(x) => parts.push(format!("({x} : @I)")),
            }
            self.names.push(e.name().to_string());
        }
        self.names.truncate(depth);
        parts.join(" ")
    }

    pub fn data_decl(&mut self, d: &DataDecl) -> String {
        let depth = self.names.len();
        let mut out = format!("data {}", d.name);
        for (x, ty) in &d.params {
            let n = self.binder_name(x, true);
            let ty = self.go(ty, LOW);
            out.push_str(&format!(" ({n} : {ty})"));
            self.names.push(n);
        }
        out.push_str(" : U where");
        for (i, c) in d.ctors.iter().enumerate() {
            let ty = self.go(&d.ctor_type(i), LOW);
            out.push_str(&format!("\n  | {} : {ty}", c.name));
        }
        self.names.truncate(depth);
        out
    }
}

pub fn pretty(sig: &Signature, t: &Term) -> String {
    Printer::new(sig).term(t)
}

pub fn show_in(sig: &Signature, tele: &Telescope, t: &Term) -> String {
    Printer::in_telescope(sig, tele).term(t)
}

pub fn pretty_telescope(sig: &Signature, tele: &Telescope) -> String {
    Printer::new(sig).telescope(tele)
}

/// Source text for the global `name` as recorded in `sig`; eliminators
/// generated from data declarations print as `None`.
pub fn pretty_global(sig: &Signature, name: &str) -> Option<String> {
    let mut p = Printer::new(sig);
    Some(match sig.get(name)? {
        GlobalEntry::Def { ty, body } => {
            if is_generated_eliminator(sig, name) {
                return None;
            }
            format!("def {name} : {} := {}", p.term(ty), p.term(body))
        }
        GlobalEntry::Postulate { ty } => format!("postulate {name} : {}", p.term(ty)),
        GlobalEntry::Data(d) => p.data_decl(d),
    })
}

pub fn is_generated_eliminator(sig: &Signature, name: &str) -> bool {
    name.strip_prefix("ind")
        .and_then(|d| sig.data(d))
        .is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_and_arrows() {
        let sig = Signature::new();
        let t = Term::blam("x", Term::Name(0));
        assert_eq!(pretty(&sig, &t), "\\(x : @I). name x");
        let ty = Term::bpi("x", Term::Nm);
        assert_eq!(pretty(&sig, &ty), "@I -o Nm");
        let ty = Term::pi("a", Term::Nm, Term::pi("b", Term::Nm, Term::Nm));
        assert_eq!(pretty(&sig, &ty), "Nm -> Nm -> Nm");
    }

    #[test]
    fn renames_shadowing_binders() {
        let sig = Signature::new();
        // λ(x : Nm). λ(x : Nm). x₁  must not print as `x`
        let t = Term::lam("x", Term::Nm, Term::lam("x", Term::Nm, Term::Var(1)));
        assert_eq!(pretty(&sig, &t), "\\(x : Nm) (_ : Nm). x");
        let t = Term::lam("x", Term::Nm, Term::lam("x", Term::Nm, Term::app(Term::Var(1), Term::Var(0))));
        assert_eq!(pretty(&sig, &t), "\\(x : Nm) (x0 : Nm). x x0");
    }

    #[test]
    fn forg_chain_prints() {
        let sig = Signature::new();
        let mut tele = Telescope::new();
        tele.push_aff("y");
        tele.push_aff("x");
        let t = Term::forg_nm(0, Term::gel(Term::Name(1), 0));
        assert_eq!(
            show_in(&sig, &tele, &t),
            "ext (\\(g' : (x0 : @I) -o Gel Nm x0) (_ : @I). ung g') x (gel (name y) x)"
        );
    }
}
