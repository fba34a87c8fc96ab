//! The global environment of checked declarations.

use std::collections::HashMap;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::datatypes::DataDecl;
use crate::syntax::{GName, Term};

#[derive(Clone, Debug)]
pub enum GlobalEntry {
    Def { ty: Term, body: Term },
    Postulate { ty: Term },
    Data(Arc<DataDecl>),
}

/// Append-only map from global names to checked declarations.
///
/// Constructor names live in a separate namespace and may be shared between
/// data types; they are resolved against the expected type.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    globals: IndexMap<GName, GlobalEntry>,
    ctors: HashMap<GName, Vec<GName>>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&GlobalEntry> {
        self.globals.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.globals.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.globals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.globals.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GName, &GlobalEntry)> {
        self.globals.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &GName> {
        self.globals.keys()
    }

    pub fn data(&self, name: &str) -> Option<&Arc<DataDecl>> {
        match self.globals.get(name)? {
            GlobalEntry::Data(d) => Some(d),
            _ => None,
        }
    }

    /// Data types declaring a constructor called `name`.
    pub fn ctor_owners(&self, name: &str) -> &[GName] {
        self.ctors.get(name).map_or(&[], Vec::as_slice)
    }

    pub fn is_ctor_name(&self, name: &str) -> bool {
        self.ctors.contains_key(name)
    }

    /// Type of a definition or postulate.
    pub fn type_of(&self, name: &str) -> Option<&Term> {
        match self.globals.get(name)? {
            GlobalEntry::Def { ty, .. } | GlobalEntry::Postulate { ty } => Some(ty),
            GlobalEntry::Data(_) => None,
        }
    }

    pub fn definition(&self, name: &str) -> Option<&Term> {
        match self.globals.get(name)? {
            GlobalEntry::Def { body, .. } => Some(body),
            _ => None,
        }
    }

    /// Inserts an already-checked entry. Callers guarantee freshness of the name.
    pub(crate) fn insert(&mut self, name: GName, entry: GlobalEntry) {
        if let GlobalEntry::Data(d) = &entry {
            for c in &d.ctors {
                self.ctors.entry(c.name.clone()).or_default().push(name.clone());
            }
        }
        let prev = self.globals.insert(name, entry);
        debug_assert!(prev.is_none());
    }

    /// Removes the most recently inserted entry (used to retract provisional data types).
    pub(crate) fn pop(&mut self) {
        if let Some((name, GlobalEntry::Data(d))) = self.globals.pop() {
            for c in &d.ctors {
                if let Some(v) = self.ctors.get_mut(&c.name) {
                    v.retain(|n| n != &name);
                    if v.is_empty() {
                        self.ctors.remove(&c.name);
                    }
                }
            }
        }
    }
}
