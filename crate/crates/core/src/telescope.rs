//! Telescopes of cartesian and affine entries, and context restriction.

use crate::syntax::{shift, Ident, Kind, Term};

/// Left-to-right position of an entry in a telescope (0 = leftmost).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Level(pub usize);

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CoreError {
    #[error("position {0} is not an affine entry")]
    PositionNotAffine(usize),
    #[error("position {0} is out of scope")]
    OutOfScope(usize),
    #[error("term mentions cartesian variable at index {culprit}, declared after the captured name")]
    CaptureViolation { culprit: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entry {
    /// A typed variable; the type is scoped in the entries to its left.
    Cart(Ident, Term),
    /// A bridge variable `x : 𝕀`.
    Aff(Ident),
}

impl Entry {
    pub fn kind(&self) -> Kind {
        match self {
            Entry::Cart(..) => Kind::Cart,
            Entry::Aff(_) => Kind::Aff,
        }
    }

    pub fn name(&self) -> &Ident {
        match self {
            Entry::Cart(n, _) | Entry::Aff(n) => n,
        }
    }
}

/// Read-only view of the kinds of a context, addressed by de Bruijn index.
pub trait Scope {
    fn depth(&self) -> usize;
    fn kind_at(&self, ix: usize) -> Option<Kind>;
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Telescope {
    entries: Vec<Entry>,
}

impl Telescope {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<Entry>) -> Self {
        Telescope { entries }
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, e: Entry) {
        self.entries.push(e);
    }

    pub fn push_cart(&mut self, name: &str, ty: Term) {
        self.entries.push(Entry::Cart(Ident::new(name), ty));
    }

    pub fn push_aff(&mut self, name: &str) {
        self.entries.push(Entry::Aff(Ident::new(name)));
    }

    pub fn pop(&mut self) -> Option<Entry> {
        self.entries.pop()
    }

    pub fn truncate(&mut self, len: usize) {
        self.entries.truncate(len);
    }

    pub fn ix_of(&self, level: Level) -> Option<usize> {
        (level.0 < self.len()).then(|| self.len() - 1 - level.0)
    }

    pub fn level_of(&self, ix: usize) -> Option<Level> {
        (ix < self.len()).then(|| Level(self.len() - 1 - ix))
    }

    pub fn get(&self, ix: usize) -> Option<&Entry> {
        let l = self.level_of(ix)?;
        self.entries.get(l.0)
    }

    /// Type of the cartesian entry at `ix`, weakened to the full telescope.
    pub fn type_of(&self, ix: usize) -> Option<Term> {
        match self.get(ix)? {
            Entry::Cart(_, ty) => Some(shift(ty, ix + 1)),
            Entry::Aff(_) => None,
        }
    }

    pub fn name_of(&self, ix: usize) -> Option<&Ident> {
        self.get(ix).map(Entry::name)
    }

    /// Affine level of `x`, or `PositionNotAffine`.
    fn expect_affine(&self, x: Level) -> Result<(), CoreError> {
        match self.entries.get(x.0) {
            Some(Entry::Aff(_)) => Ok(()),
            Some(Entry::Cart(..)) => Err(CoreError::PositionNotAffine(x.0)),
            None => Err(CoreError::OutOfScope(x.0)),
        }
    }

    /// `Γ|x`: drops `x` and every cartesian entry to its right; affine
    /// entries to the right survive.
    pub fn restrict(&self, x: Level) -> Result<Telescope, CoreError> {
        self.expect_affine(x)?;
        let entries = self
            .entries
            .iter()
            .enumerate()
            .filter(|(l, e)| *l < x.0 || (*l > x.0 && e.kind() == Kind::Aff))
            .map(|(_, e)| e.clone())
            .collect();
        Ok(Telescope { entries })
    }

    /// Levels of `self` kept by `restrict(x)`, in order.
    pub fn restriction_map(&self, x: Level) -> Result<Vec<Level>, CoreError> {
        self.expect_affine(x)?;
        Ok(self
            .entries
            .iter()
            .enumerate()
            .filter(|(l, e)| *l < x.0 || (*l > x.0 && e.kind() == Kind::Aff))
            .map(|(l, _)| Level(l))
            .collect())
    }
}

impl Scope for Telescope {
    fn depth(&self) -> usize {
        self.len()
    }

    fn kind_at(&self, ix: usize) -> Option<Kind> {
        self.get(ix).map(Entry::kind)
    }
}

/// Kinds-only context used by evaluation.
#[derive(Clone, Debug, Default)]
pub struct Kinds(Vec<Kind>);

impl Kinds {
    pub fn of(scope: &impl Scope) -> Self {
        let n = scope.depth();
        Kinds(
            (0..n)
                .rev()
                .map(|ix| scope.kind_at(ix).expect("index within depth"))
                .collect(),
        )
    }

    pub fn push(&mut self, k: Kind) {
        self.0.push(k);
    }

    pub fn pop(&mut self) {
        self.0.pop();
    }
}

impl Scope for Kinds {
    fn depth(&self) -> usize {
        self.0.len()
    }

    fn kind_at(&self, ix: usize) -> Option<Kind> {
        (ix < self.0.len()).then(|| self.0[self.0.len() - 1 - ix])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tel(spec: &str) -> Telescope {
        // "a:x:b" style: lowercase letters x,y,z,w,v are affine, others cartesian at Nm
        let mut t = Telescope::new();
        for n in spec.split(',') {
            if ["x", "y", "z", "w", "v"].contains(&n) {
                t.push_aff(n);
            } else {
                t.push_cart(n, Term::Nm);
            }
        }
        t
    }

    fn names(t: &Telescope) -> Vec<String> {
        t.entries().iter().map(|e| e.name().to_string()).collect()
    }

    #[test]
    fn restrict_removes_x_and_later_cartesian_entries() {
        let g = tel("a,x,b,y,c");
        let r = g.restrict(Level(1)).unwrap();
        assert_eq!(names(&r), ["a", "y"]);
    }

    #[test]
    fn restrict_last_entry() {
        let g = tel("a,x");
        assert_eq!(names(&g.restrict(Level(1)).unwrap()), ["a"]);
    }

    #[test]
    fn restrict_rejects_cartesian_position() {
        let g = tel("a,x");
        assert_eq!(g.restrict(Level(0)), Err(CoreError::PositionNotAffine(0)));
        assert_eq!(g.restrict(Level(7)), Err(CoreError::OutOfScope(7)));
    }

    #[test]
    fn restricted_entry_is_gone() {
        let g = tel("x,y");
        let r = g.restrict(Level(0)).unwrap();
        assert_eq!(names(&r), ["y"]);
        // the old position 1 no longer exists
        assert!(r.restrict(Level(1)).is_err());
    }

    #[test]
    fn type_of_weakens() {
        let mut g = Telescope::new();
        g.push_cart("A", Term::Universe);
        g.push_cart("a", Term::Var(0));
        g.push_aff("x");
        assert_eq!(g.type_of(1), Some(Term::Var(2)));
        assert_eq!(g.type_of(0), None);
    }
}
