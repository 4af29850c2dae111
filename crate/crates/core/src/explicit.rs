//! Explicit-state automata: flattening an extended automaton into its
//! reachable state graph, trimming, and the nonblocking check.
//!
//! States are numbered in canonical breadth-first order (events explored in
//! alphabet order), so identical inputs always produce identical numbering.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use crate::efa::{ExtendedAutomaton, DEFAULT_STATE_CAP};
use crate::error::{Error, Result};
use crate::event::Event;
use crate::guard::{apply_actions, eval_guard};
use crate::vars::{Valuation, VariableTable};

pub type StateId = u32;

/// Origin of an explicit state: the location vector it came from, plus the
/// valuation for flattened automata (products of explicit automata carry
/// component state ids in `locations` and no valuation).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateMeta {
    pub locations: Box<[u32]>,
    pub valuation: Option<Valuation>,
}

#[derive(Debug, Clone)]
pub struct ExplicitAutomaton {
    pub alphabet: BTreeSet<Event>,
    pub meta: Vec<StateMeta>,
    pub marked: Vec<bool>,
    /// Outgoing `(event, target)` per state, sorted by event; determinism
    /// means at most one entry per event.
    pub transitions: Vec<Vec<(Event, StateId)>>,
    pub variables: Option<Arc<VariableTable>>,
}

impl ExplicitAutomaton {
    pub fn empty() -> Self {
        ExplicitAutomaton {
            alphabet: BTreeSet::new(),
            meta: Vec::new(),
            marked: Vec::new(),
            transitions: Vec::new(),
            variables: None,
        }
    }

    pub fn n_states(&self) -> usize {
        self.meta.len()
    }

    pub fn n_transitions(&self) -> usize {
        self.transitions.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.meta.is_empty()
    }

    /// The initial state is always state 0 of a non-empty automaton.
    pub fn initial(&self) -> Option<StateId> {
        if self.is_empty() {
            None
        } else {
            Some(0)
        }
    }

    pub fn successor(&self, state: StateId, event: Event) -> Option<StateId> {
        let row = &self.transitions[state as usize];
        row.binary_search_by_key(&event, |&(e, _)| e)
            .ok()
            .map(|i| row[i].1)
    }

    pub fn enabled_events(&self, state: StateId) -> impl Iterator<Item = Event> + '_ {
        self.transitions[state as usize].iter().map(|&(e, _)| e)
    }

    /// Runs an event sequence from the initial state.
    pub fn run(&self, events: &[Event]) -> Option<StateId> {
        let mut s = self.initial()?;
        for &e in events {
            s = self.successor(s, e)?;
        }
        Some(s)
    }

    /// States that can reach a marked state.
    pub fn coaccessible_set(&self) -> Vec<bool> {
        let n = self.n_states();
        let mut reverse: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for (s, row) in self.transitions.iter().enumerate() {
            for &(_, t) in row {
                reverse[t as usize].push(s as StateId);
            }
        }
        let mut coacc = vec![false; n];
        let mut queue: VecDeque<StateId> = VecDeque::new();
        for s in 0..n {
            if self.marked[s] {
                coacc[s] = true;
                queue.push_back(s as StateId);
            }
        }
        while let Some(s) = queue.pop_front() {
            for &p in &reverse[s as usize] {
                if !coacc[p as usize] {
                    coacc[p as usize] = true;
                    queue.push_back(p);
                }
            }
        }
        coacc
    }

    /// States reachable from the initial state.
    pub fn accessible_set(&self) -> Vec<bool> {
        let n = self.n_states();
        let mut seen = vec![false; n];
        if n == 0 {
            return seen;
        }
        let mut queue: VecDeque<StateId> = VecDeque::new();
        seen[0] = true;
        queue.push_back(0);
        while let Some(s) = queue.pop_front() {
            for &(_, t) in &self.transitions[s as usize] {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// Restriction to the given states, renumbered in their current order.
    /// Returns the empty automaton if the initial state is dropped.
    pub fn restrict_states(&self, keep: &[bool]) -> ExplicitAutomaton {
        if self.is_empty() || !keep[0] {
            let mut empty = ExplicitAutomaton::empty();
            empty.alphabet = self.alphabet.clone();
            empty.variables = self.variables.clone();
            return empty;
        }
        let mut remap: Vec<Option<StateId>> = vec![None; self.n_states()];
        let mut next: StateId = 0;
        for (s, &k) in keep.iter().enumerate() {
            if k {
                remap[s] = Some(next);
                next += 1;
            }
        }
        let mut out = ExplicitAutomaton {
            alphabet: self.alphabet.clone(),
            meta: Vec::with_capacity(next as usize),
            marked: Vec::with_capacity(next as usize),
            transitions: Vec::with_capacity(next as usize),
            variables: self.variables.clone(),
        };
        for s in 0..self.n_states() {
            if remap[s].is_none() {
                continue;
            }
            out.meta.push(self.meta[s].clone());
            out.marked.push(self.marked[s]);
            let row = self.transitions[s]
                .iter()
                .filter_map(|&(e, t)| remap[t as usize].map(|nt| (e, nt)))
                .collect();
            out.transitions.push(row);
        }
        out
    }

    /// Drops transitions for which the predicate returns false; states stay.
    pub fn filter_transitions(
        &self,
        mut keep: impl FnMut(StateId, Event, StateId) -> bool,
    ) -> ExplicitAutomaton {
        let mut out = self.clone();
        for (s, row) in out.transitions.iter_mut().enumerate() {
            row.retain(|&(e, t)| keep(s as StateId, e, t));
        }
        out
    }

    /// Exactly the states both reachable from the initial state and able to
    /// reach a marked state; empty if the initial state is removed.
    pub fn trim(&self) -> ExplicitAutomaton {
        if self.is_empty() {
            return self.clone();
        }
        let acc = self.accessible_set();
        let coacc = self.coaccessible_set();
        let keep: Vec<bool> = acc.iter().zip(&coacc).map(|(a, c)| *a && *c).collect();
        self.restrict_states(&keep)
    }

    /// True iff every state survives `trim` and the automaton is non-empty.
    pub fn is_nonblocking(&self) -> bool {
        if self.is_empty() {
            return false;
        }
        let acc = self.accessible_set();
        let coacc = self.coaccessible_set();
        acc.iter().zip(&coacc).all(|(a, c)| *a && *c)
    }
}

/// Breadth-first expansion of an extended automaton from its initial
/// location and valuation. Only reachable states are emitted; a transition
/// exists iff its guard holds and its actions stay in-domain.
pub fn flatten(efa: &ExtendedAutomaton) -> Result<ExplicitAutomaton> {
    flatten_with_cap(efa, DEFAULT_STATE_CAP)
}

pub fn flatten_with_cap(efa: &ExtendedAutomaton, cap: usize) -> Result<ExplicitAutomaton> {
    // index transitions by (location, event) once
    let mut by_loc: Vec<Vec<usize>> = vec![Vec::new(); efa.n_locations()];
    for (i, t) in efa.transitions.iter().enumerate() {
        by_loc[t.from].push(i);
    }

    let table = &efa.variables;
    let events: Vec<Event> = efa.alphabet.iter().copied().collect();

    type Key = (u32, Valuation);
    let initial: Key = (efa.initial as u32, table.initial_valuation());

    let mut index: HashMap<Key, StateId> = HashMap::new();
    let mut keys: Vec<Key> = Vec::new();
    let mut queue: VecDeque<StateId> = VecDeque::new();

    index.insert(initial.clone(), 0);
    keys.push(initial);
    queue.push_back(0);

    let mut out_edges: Vec<Vec<(Event, StateId)>> = vec![Vec::new()];

    while let Some(s) = queue.pop_front() {
        let (loc, valuation) = keys[s as usize].clone();
        let mut row: Vec<(Event, StateId)> = Vec::new();
        for &event in &events {
            // all candidate transitions on this (location, event)
            let mut successor: Option<Key> = None;
            for &ti in &by_loc[loc as usize] {
                let t = &efa.transitions[ti];
                if t.event != event || !eval_guard(&t.guard, &valuation) {
                    continue;
                }
                let Some(next_val) = apply_actions(&t.actions, &valuation, table) else {
                    continue;
                };
                let key = (t.to as u32, next_val);
                match &successor {
                    None => successor = Some(key),
                    Some(prev) if *prev == key => {}
                    Some(_) => {
                        return Err(Error::Nondeterministic {
                            event: event.to_string(),
                        })
                    }
                }
            }
            if let Some(key) = successor {
                let next_id = match index.get(&key) {
                    Some(&id) => id,
                    None => {
                        let id = keys.len() as StateId;
                        if keys.len() >= cap {
                            return Err(Error::StateCap { cap });
                        }
                        index.insert(key.clone(), id);
                        keys.push(key);
                        out_edges.push(Vec::new());
                        queue.push_back(id);
                        id
                    }
                };
                row.push((event, next_id));
            }
        }
        out_edges[s as usize] = row;
    }

    let meta: Vec<StateMeta> = keys
        .iter()
        .map(|(loc, v)| StateMeta {
            locations: vec![*loc].into_boxed_slice(),
            valuation: Some(v.clone()),
        })
        .collect();
    let marked = keys
        .iter()
        .map(|(loc, _)| efa.marked[*loc as usize])
        .collect();

    Ok(ExplicitAutomaton {
        alphabet: efa.alphabet.clone(),
        meta,
        marked,
        transitions: out_edges,
        variables: Some(Arc::clone(&efa.variables)),
    })
}
