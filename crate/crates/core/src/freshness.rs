//! Free-variable supports, syntactic freshness and capture of affine names.

use std::collections::BTreeSet;

use crate::syntax::{traverse, visit_free, Ident, Kind, Term};
use crate::telescope::{CoreError, Level, Scope, Telescope};

/// Free occurrences of a term, split by slot kind, as de Bruijn indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarSet {
    pub cart: BTreeSet<usize>,
    pub aff: BTreeSet<usize>,
}

impl VarSet {
    pub fn is_empty(&self) -> bool {
        self.cart.is_empty() && self.aff.is_empty()
    }

    pub fn contains(&self, ix: usize) -> bool {
        self.cart.contains(&ix) || self.aff.contains(&ix)
    }
}

pub fn supports(t: &Term) -> VarSet {
    let mut vs = VarSet::default();
    visit_free(t, &mut |k, i| {
        match k {
            Kind::Cart => vs.cart.insert(i),
            Kind::Aff => vs.aff.insert(i),
        };
    });
    vs
}

/// First free occurrence that blocks capturing `x`: a cartesian entry
/// declared after `x` (index below `x`).
fn capture_culprit(scope: &impl Scope, x: usize, t: &Term) -> Option<usize> {
    let mut culprit = None;
    visit_free(t, &mut |_, i| {
        if culprit.is_none() && i < x && scope.kind_at(i) != Some(Kind::Aff) {
            culprit = Some(i);
        }
    });
    culprit
}

/// `x` is fresh in `t`: `t` mentions neither `x` nor a cartesian entry to
/// the right of `x`. `x` is a de Bruijn index.
pub fn is_fresh_ix(scope: &impl Scope, x: usize, t: &Term) -> bool {
    !crate::syntax::mentions(t, x) && capture_culprit(scope, x, t).is_none()
}

fn affine_ix(tele: &Telescope, x: Level) -> Result<usize, CoreError> {
    let ix = tele.ix_of(x).ok_or(CoreError::OutOfScope(x.0))?;
    match tele.kind_at(ix) {
        Some(Kind::Aff) => Ok(ix),
        _ => Err(CoreError::PositionNotAffine(x.0)),
    }
}

pub fn is_fresh(tele: &Telescope, x: Level, t: &Term) -> Result<bool, CoreError> {
    let ix = affine_ix(tele, x)?;
    Ok(is_fresh_ix(tele, ix, t))
}

/// Builds `λy. t[y/x]`. The result is expressed in the same context as `t`
/// and no longer mentions `x`.
pub fn capture_ix(scope: &impl Scope, x: usize, t: &Term, binder: Ident) -> Result<Term, CoreError> {
    if let Some(culprit) = capture_culprit(scope, x, t) {
        return Err(CoreError::CaptureViolation { culprit });
    }
    let mut body = t.clone();
    let _ = traverse::<()>(
        &mut body,
        0,
        &mut |i, _| Ok(Some(Term::Var(i + 1))),
        &mut |i, d| Ok(if i - d == x { d } else { i + 1 }),
    );
    Ok(Term::BridgeLam(binder, Box::new(body)))
}

pub fn capture(tele: &Telescope, x: Level, t: &Term) -> Result<Term, CoreError> {
    let ix = affine_ix(tele, x)?;
    let binder = tele.name_of(ix).cloned().unwrap_or_else(Ident::anon);
    capture_ix(tele, ix, t, binder)
}

/// Re-expresses `t` (scoped in `tele`) in `tele.restrict(x)`, or `None` when
/// it mentions a removed entry.
pub fn restrict_term(tele: &Telescope, x: Level, t: &Term) -> Result<Option<Term>, CoreError> {
    let kept = tele.restriction_map(x)?;
    let n = tele.len();
    let m = kept.len();
    // old index -> new index
    let mut map = vec![None; n];
    for (new_level, old_level) in kept.iter().enumerate() {
        map[n - 1 - old_level.0] = Some(m - 1 - new_level);
    }
    let mut out = t.clone();
    let ok = traverse::<()>(
        &mut out,
        0,
        &mut |i, d| {
            let k = map.get(i - d).copied().flatten().ok_or(())?;
            Ok(Some(Term::Var(k + d)))
        },
        &mut |i, d| map.get(i - d).copied().flatten().map(|k| k + d).ok_or(()),
    );
    Ok(ok.ok().map(|_| out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tel(spec: &[(&str, bool)]) -> Telescope {
        let mut t = Telescope::new();
        for (n, aff) in spec {
            if *aff {
                t.push_aff(n);
            } else {
                t.push_cart(n, Term::Nm);
            }
        }
        t
    }

    #[test]
    fn supports_of_gel() {
        // Γ = (y, x): gel (c y) x
        let t = Term::gel(Term::Name(1), 0);
        let s = supports(&t);
        assert!(s.cart.is_empty());
        assert_eq!(s.aff.iter().copied().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn supports_of_closed_lambda() {
        let t = Term::lam("a", Term::Nm, Term::Var(0));
        assert!(supports(&t).is_empty());
    }

    #[test]
    fn freshness_examples() {
        let g = tel(&[("a", false), ("x", true)]);
        assert_eq!(is_fresh(&g, Level(1), &Term::Var(1)), Ok(true));

        let g = tel(&[("x", true), ("b", false)]);
        assert_eq!(is_fresh(&g, Level(0), &Term::Var(0)), Ok(false));

        let g = tel(&[("y", true), ("x", true)]);
        assert_eq!(is_fresh(&g, Level(1), &Term::Name(1)), Ok(true));

        let g = tel(&[("x", true)]);
        assert_eq!(is_fresh(&g, Level(0), &Term::Name(0)), Ok(false));
        assert_eq!(
            is_fresh(&tel(&[("a", false)]), Level(0), &Term::Nm),
            Err(CoreError::PositionNotAffine(0))
        );
    }

    #[test]
    fn capture_gel() {
        let g = tel(&[("y", true), ("x", true)]);
        let t = Term::gel(Term::Name(1), 0);
        let c = capture(&g, Level(1), &t).unwrap();
        // λz. gel (c y) z, y now at index 2 under the new binder... but x still
        // occupies index 1 in the ambient context, so y is index 2.
        assert_eq!(c, Term::blam("z", Term::gel(Term::Name(2), 0)));
    }

    #[test]
    fn capture_constant() {
        let g = tel(&[("a", false), ("x", true)]);
        let c = capture(&g, Level(1), &Term::Var(1)).unwrap();
        assert_eq!(c, Term::blam("z", Term::Var(2)));
    }

    #[test]
    fn capture_violation() {
        let g = tel(&[("x", true), ("b", false)]);
        assert_eq!(
            capture(&g, Level(0), &Term::Var(0)),
            Err(CoreError::CaptureViolation { culprit: 0 })
        );
    }

    #[test]
    fn restrict_term_reindexes() {
        // (a, x, b, y): a ↦ index 1 in (a, y); y ↦ 0
        let g = tel(&[("a", false), ("x", true), ("b", false), ("y", true)]);
        let t = Term::app(Term::Var(3), Term::Name(0));
        assert_eq!(
            restrict_term(&g, Level(1), &t).unwrap(),
            Some(Term::app(Term::Var(1), Term::Name(0)))
        );
        assert_eq!(restrict_term(&g, Level(1), &Term::Var(1)).unwrap(), None);
    }
}
