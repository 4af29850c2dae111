//! Supervisor replication and refinement. Replication renames every indexed
//! event from one robot to another; refinement expands each anonymous
//! other-robot unload into one indexed transition per peer, which makes the
//! joint product expressible.

use std::collections::BTreeSet;

use crate::event::{Event, Owner};
use crate::explicit::ExplicitAutomaton;
use crate::synthesis::{Macrostate, Supervisor};

/// The robot fleet `1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RobotSet {
    pub n: u8,
}

impl RobotSet {
    pub fn new(n: u8) -> Self {
        assert!(n >= 1, "at least one robot");
        RobotSet { n }
    }

    pub fn indices(&self) -> impl Iterator<Item = u8> {
        1..=self.n
    }
}

fn relabel(event: Event, from: u8, to: u8) -> Event {
    match event {
        Event::Local { robot, kind } if robot == from => Event::local(to, kind),
        Event::Unload {
            owner: Owner::Robot(r),
            cell,
        } if r == from => Event::unload_own(to, cell),
        Event::Unload {
            owner: Owner::Indexed(_),
            ..
        } => panic!("replicate applies before refinement"),
        other => other,
    }
}

fn relabel_automaton(a: &ExplicitAutomaton, from: u8, to: u8) -> ExplicitAutomaton {
    let mut out = a.clone();
    out.alphabet = a
        .alphabet
        .iter()
        .map(|&e| relabel(e, from, to))
        .collect::<BTreeSet<_>>();
    for row in &mut out.transitions {
        for entry in row.iter_mut() {
            entry.0 = relabel(entry.0, from, to);
        }
        row.sort_by_key(|&(e, _)| e);
    }
    out
}

/// An isomorphic copy of the supervisor for robot `j`: every local and own
/// unload event swaps its index; other-robot unloads stay anonymous.
pub fn replicate(s: &Supervisor, j: u8) -> Supervisor {
    if j == s.robot {
        return s.clone();
    }
    Supervisor {
        automaton: relabel_automaton(&s.automaton, s.robot, j),
        robot: j,
        height_vars: s.height_vars.clone(),
        height_cells: s.height_cells.clone(),
        pos_x: s.pos_x,
        pos_y: s.pos_y,
        macrostates: s
            .macrostates
            .iter()
            .map(|m| Macrostate {
                key: m.key.clone(),
                members: m.members.clone(),
            })
            .collect(),
        certificate: s.certificate,
        passes: s.passes,
    }
}

/// Replaces every `tau[o](x,y)` transition by one `tau[j=K](x,y)` transition
/// per peer robot K. With a single robot the anonymous transitions simply
/// vanish. All other structure is preserved.
pub fn refine(s: &Supervisor, robots: RobotSet) -> ExplicitAutomaton {
    let mut out = s.automaton.clone();
    let peers: Vec<u8> = robots.indices().filter(|&j| j != s.robot).collect();
    out.alphabet = s
        .automaton
        .alphabet
        .iter()
        .flat_map(|&e| match e {
            Event::Unload {
                owner: Owner::Other,
                cell,
            } => peers
                .iter()
                .map(|&j| Event::unload_indexed(j, cell))
                .collect::<Vec<_>>(),
            other => vec![other],
        })
        .collect();
    for row in &mut out.transitions {
        let mut expanded = Vec::with_capacity(row.len());
        for &(e, t) in row.iter() {
            match e {
                Event::Unload {
                    owner: Owner::Other,
                    cell,
                } => {
                    for &j in &peers {
                        expanded.push((Event::unload_indexed(j, cell), t));
                    }
                }
                other => expanded.push((other, t)),
            }
        }
        expanded.sort_by_key(|&(e, _)| e);
        *row = expanded;
    }
    out
}
