//! Extended finite automata: locations with guarded, variable-updating
//! transitions, and their symbolic synchronous product.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::event::Event;
use crate::guard::{ActionList, GuardExpr};
use crate::vars::VariableTable;

pub type LocId = usize;

/// Default bound on explicit locations/states built by any one operation.
pub const DEFAULT_STATE_CAP: usize = 5_000_000;

#[derive(Debug, Clone)]
pub struct EfaTransition {
    pub from: LocId,
    pub event: Event,
    pub guard: GuardExpr,
    pub actions: ActionList,
    pub to: LocId,
}

/// An automaton over a shared [`VariableTable`]. Transitions are enabled
/// when their guard holds and their actions stay within every domain; per
/// (location, event, valuation) at most one transition may be enabled.
#[derive(Debug, Clone)]
pub struct ExtendedAutomaton {
    pub name: String,
    pub locations: Vec<String>,
    pub initial: LocId,
    pub marked: Vec<bool>,
    pub alphabet: BTreeSet<Event>,
    pub transitions: Vec<EfaTransition>,
    pub variables: Arc<VariableTable>,
}

impl ExtendedAutomaton {
    pub fn new(name: &str, variables: Arc<VariableTable>) -> Self {
        ExtendedAutomaton {
            name: name.to_string(),
            locations: Vec::new(),
            initial: 0,
            marked: Vec::new(),
            alphabet: BTreeSet::new(),
            transitions: Vec::new(),
            variables,
        }
    }

    pub fn add_location(&mut self, name: &str, marked: bool) -> LocId {
        self.locations.push(name.to_string());
        self.marked.push(marked);
        self.locations.len() - 1
    }

    /// Adds a transition and registers its event. Undeclared variable reads
    /// or writes are a model-construction error, never an evaluation one.
    pub fn add_transition(
        &mut self,
        from: LocId,
        event: Event,
        guard: GuardExpr,
        actions: ActionList,
        to: LocId,
    ) -> Result<()> {
        let n = self.variables.len();
        for id in guard.max_var().into_iter().chain(actions.max_var()) {
            if id >= n {
                return Err(Error::UndeclaredVariable(id));
            }
        }
        self.alphabet.insert(event);
        self.transitions.push(EfaTransition {
            from,
            event,
            guard,
            actions,
            to,
        });
        Ok(())
    }

    pub fn n_locations(&self) -> usize {
        self.locations.len()
    }

    fn transitions_from(&self, loc: LocId, event: Event) -> Vec<&EfaTransition> {
        self.transitions
            .iter()
            .filter(|t| t.from == loc && t.event == event)
            .collect()
    }
}

/// Symbolic synchronous product. Shared events fire in lock-step with guards
/// conjoined and actions concatenated in component order; non-shared events
/// interleave. A location vector is marked iff every component is marked.
pub fn compose(components: &[&ExtendedAutomaton]) -> Result<ExtendedAutomaton> {
    compose_with_cap(components, DEFAULT_STATE_CAP)
}

pub fn compose_with_cap(
    components: &[&ExtendedAutomaton],
    cap: usize,
) -> Result<ExtendedAutomaton> {
    assert!(
        !components.is_empty(),
        "compose needs at least one automaton"
    );
    let table = Arc::clone(&components[0].variables);
    for c in components {
        if !Arc::ptr_eq(&c.variables, &table) {
            return Err(Error::MixedVariableTables);
        }
    }

    let mut total: usize = 1;
    for c in components {
        total = total
            .checked_mul(c.n_locations().max(1))
            .ok_or(Error::StateCap { cap })?;
        if total > cap {
            return Err(Error::StateCap { cap });
        }
    }

    let name = components
        .iter()
        .map(|c| c.name.as_str())
        .collect::<Vec<_>>()
        .join("|");
    let mut out = ExtendedAutomaton::new(&name, table);

    // Mixed-radix encoding of location vectors; the last component varies fastest.
    let k = components.len();
    let mut strides = vec![1usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * components[i + 1].n_locations();
    }
    let decode = |mut idx: usize| -> Vec<LocId> {
        let mut locs = Vec::with_capacity(k);
        for s in &strides {
            locs.push(idx / s);
            idx %= s;
        }
        locs
    };
    let encode = |locs: &[LocId]| -> usize { locs.iter().zip(&strides).map(|(l, s)| l * s).sum() };

    for idx in 0..total {
        let locs = decode(idx);
        let name: Vec<String> = locs.iter().map(|l| l.to_string()).collect();
        let marked = components.iter().zip(&locs).all(|(c, &l)| c.marked[l]);
        out.add_location(&name.join("."), marked);
    }
    out.initial = encode(&components.iter().map(|c| c.initial).collect::<Vec<_>>());

    let alphabet: BTreeSet<Event> = components
        .iter()
        .flat_map(|c| c.alphabet.iter().copied())
        .collect();

    for &event in &alphabet {
        let owners: Vec<usize> = (0..k)
            .filter(|&i| components[i].alphabet.contains(&event))
            .collect();
        for idx in 0..total {
            let locs = decode(idx);
            // One synchronized transition per combination of owner transitions.
            let per_owner: Vec<Vec<&EfaTransition>> = owners
                .iter()
                .map(|&i| components[i].transitions_from(locs[i], event))
                .collect();
            if per_owner.iter().any(|v| v.is_empty()) {
                continue;
            }
            let n_combos: usize = per_owner.iter().map(|v| v.len()).product();
            for combo in 0..n_combos {
                let mut c = combo;
                let picks: Vec<&EfaTransition> = per_owner
                    .iter()
                    .map(|v| {
                        let pick = c % v.len();
                        c /= v.len();
                        v[pick]
                    })
                    .collect();

                let mut assigned: Vec<usize> = Vec::new();
                for t in &picks {
                    for var in t.actions.assigned_vars() {
                        if assigned.contains(&var) {
                            return Err(Error::WriteConflict {
                                event: event.to_string(),
                                variable: out.variables.def(var).name.clone(),
                            });
                        }
                        assigned.push(var);
                    }
                }

                let guard = GuardExpr::all(picks.iter().map(|t| t.guard.clone()).collect());
                let actions = ActionList::new(
                    picks
                        .iter()
                        .flat_map(|t| t.actions.0.iter().copied())
                        .collect(),
                );
                let mut target = locs.clone();
                for (&owner, t) in owners.iter().zip(&picks) {
                    target[owner] = t.to;
                }
                out.alphabet.insert(event);
                out.transitions.push(EfaTransition {
                    from: idx,
                    event,
                    guard,
                    actions,
                    to: encode(&target),
                });
            }
        }
    }
    out.alphabet = alphabet;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::LocalKind;
    use crate::guard::Assign;

    fn shared_table() -> Arc<VariableTable> {
        let mut t = VariableTable::new();
        t.add("v", 0, 3, 0).unwrap();
        Arc::new(t)
    }

    fn ev(robot: u8, kind: LocalKind) -> Event {
        Event::local(robot, kind)
    }

    #[test]
    fn disjoint_alphabets_shuffle_product() {
        let table = shared_table();
        let mut a = ExtendedAutomaton::new("a", Arc::clone(&table));
        let a0 = a.add_location("0", true);
        let a1 = a.add_location("1", false);
        a.add_transition(
            a0,
            ev(1, LocalKind::East),
            GuardExpr::True,
            ActionList::empty(),
            a1,
        )
        .unwrap();

        let mut b = ExtendedAutomaton::new("b", Arc::clone(&table));
        let b0 = b.add_location("0", true);
        let b1 = b.add_location("1", false);
        let b2 = b.add_location("2", true);
        b.add_transition(
            b0,
            ev(2, LocalKind::West),
            GuardExpr::True,
            ActionList::empty(),
            b1,
        )
        .unwrap();
        b.add_transition(
            b1,
            ev(2, LocalKind::West),
            GuardExpr::True,
            ActionList::empty(),
            b2,
        )
        .unwrap();

        let p = compose(&[&a, &b]).unwrap();
        assert_eq!(p.n_locations(), 6);
        // interleaving keeps every private transition at every other location
        assert_eq!(p.transitions.len(), 1 * 3 + 2 * 2);
        let marked: Vec<_> = p.marked.iter().filter(|m| **m).collect();
        assert_eq!(marked.len(), 2); // (a0,b0), (a0,b2)
    }

    #[test]
    fn shared_event_synchronizes_and_conjoins() {
        let table = shared_table();
        let v = table.id("v").unwrap();
        let e = ev(1, LocalKind::Pick);

        let mut a = ExtendedAutomaton::new("a", Arc::clone(&table));
        let a0 = a.add_location("0", true);
        a.add_transition(
            a0,
            e,
            GuardExpr::cmp(
                crate::guard::Operand::var(v),
                crate::guard::Cmp::Lt,
                crate::guard::Operand::constant(2),
            ),
            ActionList::new(vec![Assign::increment(v, 1)]),
            a0,
        )
        .unwrap();

        let mut b = ExtendedAutomaton::new("b", Arc::clone(&table));
        let b0 = b.add_location("0", true);
        b.add_transition(
            b0,
            e,
            GuardExpr::cmp(
                crate::guard::Operand::var(v),
                crate::guard::Cmp::Gt,
                crate::guard::Operand::constant(0),
            ),
            ActionList::empty(),
            b0,
        )
        .unwrap();

        let p = compose(&[&a, &b]).unwrap();
        assert_eq!(p.transitions.len(), 1);
        let g = &p.transitions[0].guard;
        // conjoined guard: v < 2 && v > 0, i.e. only v == 1
        let mut val = table.initial_valuation();
        for x in 0..=3 {
            val.set(v, x);
            assert_eq!(crate::guard::eval_guard(g, &val), x == 1, "v={x}");
        }
        assert_eq!(p.transitions[0].actions.0.len(), 1);
    }

    #[test]
    fn write_conflict_rejected() {
        let table = shared_table();
        let v = table.id("v").unwrap();
        let e = ev(1, LocalKind::Pick);
        let mut a = ExtendedAutomaton::new("a", Arc::clone(&table));
        let a0 = a.add_location("0", true);
        a.add_transition(
            a0,
            e,
            GuardExpr::True,
            ActionList::new(vec![Assign::increment(v, 1)]),
            a0,
        )
        .unwrap();
        let mut b = a.clone();
        b.name = "b".into();
        let err = compose(&[&a, &b]).unwrap_err();
        assert!(matches!(err, Error::WriteConflict { .. }), "{err}");
    }

    #[test]
    fn mixed_tables_rejected() {
        let a = ExtendedAutomaton::new("a", shared_table());
        let b = ExtendedAutomaton::new("b", shared_table());
        assert!(matches!(
            compose(&[&a, &b]),
            Err(Error::MixedVariableTables)
        ));
    }

    #[test]
    fn undeclared_variable_rejected_at_build() {
        let table = shared_table();
        let mut a = ExtendedAutomaton::new("a", Arc::clone(&table));
        let a0 = a.add_location("0", true);
        let err = a
            .add_transition(
                a0,
                ev(1, LocalKind::Pick),
                GuardExpr::eq(
                    crate::guard::Operand::var(7),
                    crate::guard::Operand::constant(0),
                ),
                ActionList::empty(),
                a0,
            )
            .unwrap_err();
        assert!(matches!(err, Error::UndeclaredVariable(7)));
    }

    #[test]
    fn location_cap_enforced() {
        let table = shared_table();
        let mut a = ExtendedAutomaton::new("a", Arc::clone(&table));
        for i in 0..10 {
            a.add_location(&i.to_string(), false);
        }
        let b = a.clone();
        assert!(matches!(
            compose_with_cap(&[&a, &b], 50),
            Err(Error::StateCap { cap: 50 })
        ));
    }
}
