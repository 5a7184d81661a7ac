use std::collections::{BTreeMap, HashSet};

use crate::syntax::Constraint;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredConstraint {
    pub id: u64,
    pub constraint: Constraint,
}

/// Live constraints keyed by insertion id. Ids start at 1 and are never
/// reused within a run.
#[derive(Debug, Clone)]
pub struct Store {
    live: BTreeMap<u64, Constraint>,
    next_id: u64,
}

impl Default for Store {
    fn default() -> Self {
        Store { live: BTreeMap::new(), next_id: 1 }
    }
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub fn insert(&mut self, constraint: Constraint) -> u64 {
        let id = self.fresh_id();
        self.live.insert(id, constraint);
        id
    }

    pub fn remove(&mut self, id: u64) -> Option<Constraint> {
        self.live.remove(&id)
    }

    pub fn get(&self, id: u64) -> Option<&Constraint> {
        self.live.get(&id)
    }

    pub fn contains(&self, id: u64) -> bool {
        self.live.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    /// Most recently added first.
    pub fn newest_first(&self) -> impl Iterator<Item = (u64, &Constraint)> {
        self.live.iter().rev().map(|(id, c)| (*id, c))
    }

    pub fn snapshot(&self) -> Vec<StoredConstraint> {
        self.live
            .iter()
            .map(|(id, c)| StoredConstraint { id: *id, constraint: c.clone() })
            .collect()
    }
}

/// Firings of propagation rules, keyed by rule name and matched ids in head
/// order.
#[derive(Debug, Clone, Default)]
pub struct PropagationHistory {
    fired: HashSet<(String, Vec<u64>)>,
}

impl PropagationHistory {
    pub fn contains(&self, rule: &str, ids: &[u64]) -> bool {
        self.fired.contains(&(rule.to_string(), ids.to_vec()))
    }

    /// Returns false if the tuple was already recorded.
    pub fn insert(&mut self, rule: &str, ids: &[u64]) -> bool {
        self.fired.insert((rule.to_string(), ids.to_vec()))
    }

    pub fn len(&self) -> usize {
        self.fired.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fired.is_empty()
    }
}
