//! Finite-domain integer variables and total valuations over them.
//!
//! A [`VariableTable`] declares every variable a model may read or assign:
//! the per-cell brick counts plus the position coordinates of one robot. A
//! [`Valuation`] is a total assignment, the shared store that guards read
//! and actions update.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Index of a variable in its [`VariableTable`].
pub type VarId = usize;

#[derive(Debug, Clone)]
pub struct VarDef {
    pub name: String,
    /// Inclusive domain bounds.
    pub lo: i32,
    pub hi: i32,
    pub initial: i32,
}

/// Ordered declarations of all model variables. The declaration order is the
/// canonical order used for state encoding, so it must be fixed per model.
#[derive(Debug, Default, Clone)]
pub struct VariableTable {
    defs: Vec<VarDef>,
    by_name: HashMap<String, VarId>,
}

impl VariableTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, lo: i32, hi: i32, initial: i32) -> Result<VarId> {
        if self.by_name.contains_key(name) {
            return Err(Error::DuplicateVariable(name.to_string()));
        }
        if initial < lo || initial > hi {
            return Err(Error::InitialOutOfDomain {
                name: name.to_string(),
                value: initial,
                lo,
                hi,
            });
        }
        let id = self.defs.len();
        self.defs.push(VarDef {
            name: name.to_string(),
            lo,
            hi,
            initial,
        });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn id(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn def(&self, id: VarId) -> &VarDef {
        &self.defs[id]
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &VarDef)> {
        self.defs.iter().enumerate()
    }

    pub fn in_domain(&self, id: VarId, value: i32) -> bool {
        let def = &self.defs[id];
        value >= def.lo && value <= def.hi
    }

    pub fn initial_valuation(&self) -> Valuation {
        Valuation(self.defs.iter().map(|d| d.initial).collect())
    }
}

/// A total assignment of every declared variable, indexed by [`VarId`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Valuation(Box<[i32]>);

impl Valuation {
    pub fn get(&self, id: VarId) -> i32 {
        self.0[id]
    }

    pub fn set(&mut self, id: VarId, value: i32) {
        self.0[id] = value;
    }

    pub fn values(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Projection onto a subset of variables, in the order given.
    pub fn project(&self, ids: &[VarId]) -> Box<[i32]> {
        ids.iter().map(|&id| self.0[id]).collect()
    }
}
