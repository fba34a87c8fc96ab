//! Nominal inductive types: positivity, eliminator generation and ι-reduction.
//!
//! Constructor arguments follow the grammar `Const | Rec | BridgeRec`:
//! a type not mentioning the data type, the data type at its own
//! parameters, or a bridge `𝕀 ⊸ D params`.

use std::sync::Arc;

use crate::diagnostic::{Diagnostic, ErrorCode};
use crate::syntax::{instantiate_env, shift, Elim, GName, Ident, Repl, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArgSpec {
    /// Scoped in the parameters followed by the earlier arguments.
    Const(Term),
    Rec,
    BridgeRec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorSig {
    pub name: GName,
    pub args: Vec<(Ident, ArgSpec)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataDecl {
    pub name: GName,
    /// Cartesian parameters; each type is scoped in the preceding ones.
    pub params: Vec<(Ident, Term)>,
    pub ctors: Vec<CtorSig>,
}

/// A data declaration whose constructor types are still plain Π-telescopes
/// ending in `D params`, scoped in the parameters.
#[derive(Clone, Debug)]
pub struct RawDataDecl {
    pub name: GName,
    pub params: Vec<(Ident, Term)>,
    pub ctors: Vec<(GName, Term)>,
}

pub fn eliminator_name(data: &str) -> String {
    format!("ind{data}")
}

fn mentions_global(t: &Term, name: &str) -> bool {
    match t {
        Term::Data(n, _) | Term::Global(n) if &**n == name => true,
        Term::Ctor(c) if &*c.data == name => true,
        Term::Elim(e) if &*e.data == name => true,
        _ => t.children().iter().any(|(c, _)| mentions_global(c, name)),
    }
}

fn occurs_negatively(t: &Term, name: &str, positive: bool) -> bool {
    match t {
        Term::Pi(_, a, b) => {
            occurs_negatively(a, name, !positive) || occurs_negatively(b, name, positive)
        }
        Term::Data(n, _) if &**n == name => !positive,
        _ => t
            .children()
            .iter()
            .any(|(c, _)| occurs_negatively(c, name, positive)),
    }
}

/// `D p_0 … p_{n-1}` as seen `depth` binders below the parameters.
fn self_type(name: &GName, n_params: usize, depth: usize) -> Term {
    Term::Data(
        name.clone(),
        (0..n_params)
            .map(|k| Term::Var(depth + n_params - 1 - k))
            .collect(),
    )
}

impl DataDecl {
    pub fn ctor_index(&self, name: &str) -> Option<usize> {
        self.ctors.iter().position(|c| &*c.name == name)
    }

    pub fn eliminator(&self) -> String {
        eliminator_name(&self.name)
    }

    /// Telescope type `Π(params). U`.
    pub fn type_former_type(&self) -> Term {
        self.params.iter().rev().fold(Term::Universe, |acc, (x, ty)| {
            Term::Pi(x.clone(), Box::new(ty.clone()), Box::new(acc))
        })
    }

    /// Constructor type as a Π-telescope scoped in the parameters.
    pub fn ctor_type(&self, c: usize) -> Term {
        let args = &self.ctors[c].args;
        let n = self.params.len();
        let target = self_type(&self.name, n, args.len());
        args.iter()
            .enumerate()
            .rev()
            .fold(target, |acc, (j, (x, spec))| {
                let dom = match spec {
                    ArgSpec::Const(t) => t.clone(),
                    ArgSpec::Rec => self_type(&self.name, n, j),
                    ArgSpec::BridgeRec => {
                        Term::BridgePi(Ident::anon(), Box::new(self_type(&self.name, n, j + 1)))
                    }
                };
                Term::Pi(x.clone(), Box::new(dom), Box::new(acc))
            })
    }

    /// Type of argument `j` of constructor `c`, given parameter values and
    /// the values of the earlier arguments (all in the ambient context).
    pub fn ctor_arg_type(&self, c: usize, j: usize, params: &[Term], prev: &[Term]) -> Term {
        match &self.ctors[c].args[j].1 {
            ArgSpec::Const(t) => {
                let env: Vec<Repl> = prev[..j]
                    .iter()
                    .rev()
                    .chain(params.iter().rev())
                    .map(|t| Repl::Term(t.clone()))
                    .collect();
                instantiate_env(t, &env).expect("constructor argument types are cartesian")
            }
            ArgSpec::Rec => Term::Data(self.name.clone(), params.to_vec()),
            ArgSpec::BridgeRec => Term::BridgePi(
                Ident::anon(),
                Box::new(Term::Data(
                    self.name.clone(),
                    params.iter().map(|p| shift(p, 1)).collect(),
                )),
            ),
        }
    }

    /// Type of the method for constructor `c`: one binder per argument, each
    /// recursive argument followed by its induction hypothesis (a bridge of
    /// hypotheses for `BridgeRec`), ending in `motive (c args)`.
    pub fn method_type(&self, c: usize, params: &[Term], motive: &Term) -> Term {
        let p = params.len();
        let ctor = &self.ctors[c];
        let mut binders: Vec<(Ident, Term)> = Vec::new();
        let mut arg_pos: Vec<usize> = Vec::new();
        let shifted_params = |d: usize| params.iter().map(|t| shift(t, d)).collect::<Vec<_>>();
        for (j, (x, spec)) in ctor.args.iter().enumerate() {
            let d = binders.len();
            let ty = match spec {
                ArgSpec::Const(t) => {
                    let mut env: Vec<Repl> = (0..j)
                        .map(|i| Repl::Term(Term::Var(d - 1 - arg_pos[j - 1 - i])))
                        .collect();
                    env.extend((0..p).map(|k| Repl::Term(shift(&params[p - 1 - k], d))));
                    instantiate_env(t, &env).expect("constructor argument types are cartesian")
                }
                ArgSpec::Rec => Term::Data(self.name.clone(), shifted_params(d)),
                ArgSpec::BridgeRec => Term::BridgePi(
                    Ident::anon(),
                    Box::new(Term::Data(self.name.clone(), shifted_params(d + 1))),
                ),
            };
            binders.push((x.clone(), ty));
            arg_pos.push(d);
            match spec {
                ArgSpec::Const(_) => {}
                ArgSpec::Rec => {
                    let ih = Term::app(shift(motive, d + 1), Term::Var(0));
                    binders.push((Ident::new(&format!("ih_{x}")), ih));
                }
                ArgSpec::BridgeRec => {
                    let ih = Term::BridgePi(
                        Ident::new("x"),
                        Box::new(Term::app(
                            shift(motive, d + 2),
                            Term::bapp(Term::Var(1), 0),
                        )),
                    );
                    binders.push((Ident::new(&format!("ih_{x}")), ih));
                }
            }
        }
        let d = binders.len();
        let args = arg_pos.iter().map(|&k| Term::Var(d - 1 - k)).collect();
        let target = Term::app(
            shift(motive, d),
            Term::Ctor(Box::new(crate::syntax::CtorApp {
                data: self.name.clone(),
                ctor: ctor.name.clone(),
                params: shifted_params(d),
                args,
            })),
        );
        binders.into_iter().rev().fold(target, |acc, (x, ty)| {
            Term::Pi(x, Box::new(ty), Box::new(acc))
        })
    }

    /// `Π(params). Π(P : D params → U). Π(methods). Π(s : D params). P s`
    pub fn eliminator_type(&self) -> Term {
        let (binders, _) = self.eliminator_binders();
        let n = binders.len();
        // the motive sits right after the parameters
        let motive_ix = n - 1 - self.params.len();
        let target = Term::app(Term::Var(motive_ix), Term::Var(0));
        binders.into_iter().rev().fold(target, |acc, (x, ty)| {
            Term::Pi(x, Box::new(ty), Box::new(acc))
        })
    }

    /// `λ(params) P methods s. elim`
    pub fn eliminator_body(&self) -> Term {
        let (binders, m) = self.eliminator_binders();
        let n = binders.len();
        let p = self.params.len();
        let elim = Term::Elim(Box::new(Elim {
            data: self.name.clone(),
            params: (0..p).map(|k| Term::Var(n - 1 - k)).collect(),
            motive: Term::Var(n - 1 - p),
            methods: (0..m).map(|k| Term::Var(n - 2 - p - k)).collect(),
            scrut: Term::Var(0),
        }));
        binders.into_iter().rev().fold(elim, |acc, (x, ty)| {
            Term::Lam(x, Box::new(ty), Box::new(acc))
        })
    }

    fn eliminator_binders(&self) -> (Vec<(Ident, Term)>, usize) {
        let p = self.params.len();
        let mut binders: Vec<(Ident, Term)> = self.params.clone();
        let params_at = |d: usize| -> Vec<Term> { (0..p).map(|k| Term::Var(d + p - 1 - k)).collect() };
        // motive
        let motive_ty = Term::Pi(
            Ident::new("s"),
            Box::new(Term::Data(self.name.clone(), params_at(0))),
            Box::new(Term::Universe),
        );
        binders.push((Ident::new("P"), motive_ty));
        for (c, ctor) in self.ctors.iter().enumerate() {
            let d = binders.len() - p; // binders since the parameters
            let params = params_at(d);
            let motive = Term::Var(d - 1);
            let ty = self.method_type(c, &params, &motive);
            binders.push((Ident::new(&format!("m_{}", ctor.name)), ty));
        }
        let d = binders.len() - p;
        binders.push((
            Ident::new("t"),
            Term::Data(self.name.clone(), params_at(d)),
        ));
        (binders, self.ctors.len())
    }

    /// ι-reduct of `elim` at a scrutinee built from constructor `c` with `args`.
    pub fn iota(&self, elim: &Elim, c: usize, args: &[Term]) -> Term {
        let mut t = elim.methods[c].clone();
        for ((_, spec), a) in self.ctors[c].args.iter().zip(args) {
            t = Term::app(t, a.clone());
            match spec {
                ArgSpec::Const(_) => {}
                ArgSpec::Rec => {
                    let ih = Term::Elim(Box::new(Elim {
                        scrut: a.clone(),
                        ..elim.clone()
                    }));
                    t = Term::app(t, ih);
                }
                ArgSpec::BridgeRec => {
                    let ih = Term::Elim(Box::new(Elim {
                        data: elim.data.clone(),
                        params: elim.params.iter().map(|p| shift(p, 1)).collect(),
                        motive: shift(&elim.motive, 1),
                        methods: elim.methods.iter().map(|m| shift(m, 1)).collect(),
                        scrut: Term::bapp(shift(a, 1), 0),
                    }));
                    t = Term::app(t, Term::BridgeLam(Ident::new("x"), Box::new(ih)));
                }
            }
        }
        t
    }
}

/// Classifies every constructor argument of `raw`, rejecting occurrences of
/// the data type outside the `Const | Rec | BridgeRec` grammar.
pub fn check_positivity(raw: &RawDataDecl) -> Result<DataDecl, Diagnostic> {
    let name = &raw.name;
    let p = raw.params.len();
    let mut ctors = Vec::new();
    for (i, (cname, ty)) in raw.ctors.iter().enumerate() {
        if raw.ctors[..i].iter().any(|(n, _)| n == cname) {
            return Err(Diagnostic::new(
                ErrorCode::DuplicateName,
                format!("constructor `{cname}` declared twice in `{name}`"),
            ));
        }
        let mut args = Vec::new();
        let mut t = ty;
        let mut depth = 0;
        while let Term::Pi(x, dom, cod) = t {
            let spec = if !mentions_global(dom, name) {
                ArgSpec::Const((**dom).clone())
            } else if **dom == self_type(name, p, depth) {
                ArgSpec::Rec
            } else if matches!(&**dom, Term::BridgePi(_, b) if **b == self_type(name, p, depth + 1))
            {
                ArgSpec::BridgeRec
            } else if occurs_negatively(dom, name, true) {
                return Err(Diagnostic::new(
                    ErrorCode::NegativeOccurrence,
                    format!("`{name}` occurs to the left of an arrow in constructor `{cname}`"),
                ));
            } else {
                return Err(Diagnostic::new(
                    ErrorCode::NestedOccurrence,
                    format!(
                        "`{name}` occurs nested in argument `{x}` of constructor `{cname}`; \
                         only `{name}` or `𝕀 ⊸ {name}` at the declared parameters are allowed"
                    ),
                ));
            };
            args.push((x.clone(), spec));
            t = cod;
            depth += 1;
        }
        if *t != self_type(name, p, depth) {
            if mentions_global(t, name) && occurs_negatively(t, name, true) {
                return Err(Diagnostic::new(
                    ErrorCode::NegativeOccurrence,
                    format!("`{name}` occurs negatively in constructor `{cname}`"),
                ));
            }
            return Err(Diagnostic::new(
                ErrorCode::IllFormedConstructor,
                format!("constructor `{cname}` must end in `{name}` applied to its parameters"),
            ));
        }
        ctors.push(CtorSig {
            name: cname.clone(),
            args,
        });
    }
    Ok(DataDecl {
        name: name.clone(),
        params: raw.params.clone(),
        ctors,
    })
}

pub fn arc(s: &str) -> GName {
    Arc::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat() -> DataDecl {
        check_positivity(&RawDataDecl {
            name: arc("Nat"),
            params: vec![],
            ctors: vec![
                (arc("zero"), Term::data("Nat", vec![])),
                (
                    arc("suc"),
                    Term::pi("n", Term::data("Nat", vec![]), Term::data("Nat", vec![])),
                ),
            ],
        })
        .unwrap()
    }

    #[test]
    fn nat_eliminator_is_textbook() {
        let d = nat();
        let nat = Term::data("Nat", vec![]);
        let u = Term::Universe;
        // (P : Nat → U) → P zero → ((n : Nat) → P n → P (suc n)) → (t : Nat) → P t
        let expected = Term::pi(
            "P",
            Term::pi("s", nat.clone(), u),
            Term::pi(
                "m_zero",
                Term::app(Term::Var(0), Term::ctor("Nat", "zero", vec![], vec![])),
                Term::pi(
                    "m_suc",
                    Term::pi(
                        "n",
                        nat.clone(),
                        Term::pi(
                            "ih",
                            Term::app(Term::Var(2), Term::Var(0)),
                            Term::app(
                                Term::Var(3),
                                Term::ctor("Nat", "suc", vec![], vec![Term::Var(1)]),
                            ),
                        ),
                    ),
                    Term::pi("t", nat, Term::app(Term::Var(3), Term::Var(0))),
                ),
            ),
        );
        assert_eq!(d.eliminator_type(), expected);
    }

    #[test]
    fn negative_occurrence_rejected() {
        let bad = Term::data("Bad", vec![]);
        let raw = RawDataDecl {
            name: arc("Bad"),
            params: vec![],
            ctors: vec![(
                arc("c"),
                Term::pi("f", Term::pi("_", bad.clone(), bad.clone()), bad),
            )],
        };
        assert_eq!(
            check_positivity(&raw).unwrap_err().code,
            ErrorCode::NegativeOccurrence
        );
    }

    #[test]
    fn nested_occurrence_rejected() {
        let d = Term::data("D", vec![]);
        let raw = RawDataDecl {
            name: arc("D"),
            params: vec![],
            ctors: vec![(
                arc("c"),
                Term::pi("f", Term::pi("_", Term::Nm, d.clone()), d),
            )],
        };
        assert_eq!(
            check_positivity(&raw).unwrap_err().code,
            ErrorCode::NestedOccurrence
        );
    }

    #[test]
    fn bridge_recursion_classified() {
        let proc_ = Term::data("Proc", vec![]);
        let raw = RawDataDecl {
            name: arc("Proc"),
            params: vec![],
            ctors: vec![(
                arc("inp"),
                Term::pi(
                    "n",
                    Term::Nm,
                    Term::pi("q", Term::bpi("_", proc_.clone()), proc_),
                ),
            )],
        };
        let d = check_positivity(&raw).unwrap();
        assert_eq!(
            d.ctors[0].args.iter().map(|a| a.1.clone()).collect::<Vec<_>>(),
            vec![ArgSpec::Const(Term::Nm), ArgSpec::BridgeRec]
        );
    }
}
