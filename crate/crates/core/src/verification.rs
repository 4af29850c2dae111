//! Joint-behavior verification: the explicit product of the refined
//! replicated supervisors, its nonblocking check with witness extraction,
//! and the joint invariants (marked states complete and evacuated, the
//! trench rule on every placement, monotone brick counts).

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::event::{Cell, Event, Owner};
use crate::explicit::{ExplicitAutomaton, StateId, StateMeta};
use crate::replication::{refine, replicate, RobotSet};
use crate::structure::StructureSpec;
use crate::synthesis::{synthesize_with_options, Supervisor, SynthesisOptions, Synthesized};
use crate::vars::VarId;

/// One refined supervisor, with the metadata needed to audit joint states.
#[derive(Debug, Clone)]
pub struct RefinedComponent {
    pub automaton: ExplicitAutomaton,
    pub robot: u8,
    pub height_vars: Vec<VarId>,
    pub height_cells: Vec<Cell>,
    pub pos_x: VarId,
    pub pos_y: VarId,
}

impl RefinedComponent {
    pub fn from_supervisor(s: &Supervisor, robots: RobotSet) -> Self {
        RefinedComponent {
            automaton: refine(s, robots),
            robot: s.robot,
            height_vars: s.height_vars.clone(),
            height_cells: s.height_cells.clone(),
            pos_x: s.pos_x,
            pos_y: s.pos_y,
        }
    }
}

/// The synchronous product of refined supervisors. Joint states store the
/// component state ids in `meta.locations`; transitions are labeled with
/// the owner's own-unload spelling.
#[derive(Debug, Clone)]
pub struct JointAutomaton {
    pub automaton: ExplicitAutomaton,
    pub components: Vec<RefinedComponent>,
}

/// Builds the explicit joint product. Components share exactly the task
/// events (an owner's `tau[j]` synchronizes with every peer's `tau[j=K]`);
/// local events interleave.
pub fn joint(components: Vec<RefinedComponent>, cap: usize) -> Result<JointAutomaton> {
    assert!(
        !components.is_empty(),
        "joint needs at least one supervisor"
    );
    for c in &components {
        debug_assert!(
            !c.automaton.alphabet.iter().any(|e| matches!(
                e,
                Event::Unload {
                    owner: Owner::Other,
                    ..
                }
            )),
            "joint takes refined supervisors; anonymous unloads must be expanded first"
        );
    }
    let k = components.len();

    // canonical alphabet and, per component, the local spelling of each event
    let mut canonical: BTreeSet<Event> = BTreeSet::new();
    for c in &components {
        for e in &c.automaton.alphabet {
            canonical.insert(e.sync_key());
        }
    }
    let spelling = |c: &RefinedComponent, e: Event| -> Option<Event> {
        match e {
            Event::Unload {
                owner: Owner::Robot(r),
                cell,
            } => {
                let spelled = if r == c.robot {
                    e
                } else {
                    Event::unload_indexed(r, cell)
                };
                c.automaton.alphabet.contains(&spelled).then_some(spelled)
            }
            other => c.automaton.alphabet.contains(&other).then_some(other),
        }
    };

    let mut out = ExplicitAutomaton::empty();
    out.alphabet = canonical.clone();
    if components.iter().any(|c| c.automaton.is_empty()) {
        return Ok(JointAutomaton {
            automaton: out,
            components,
        });
    }

    let initial: Box<[u32]> = vec![0u32; k].into_boxed_slice();
    let mut index: HashMap<Box<[u32]>, StateId> = HashMap::new();
    index.insert(initial.clone(), 0);
    let mut tuples: Vec<Box<[u32]>> = vec![initial];
    let mut queue: VecDeque<StateId> = VecDeque::new();
    queue.push_back(0);
    let mut transitions: Vec<Vec<(Event, StateId)>> = vec![Vec::new()];

    while let Some(s) = queue.pop_front() {
        let tuple = tuples[s as usize].clone();
        let mut row = Vec::new();
        'events: for &event in &canonical {
            let mut target = tuple.clone();
            let mut involved = false;
            for (i, c) in components.iter().enumerate() {
                if let Some(spelled) = spelling(c, event) {
                    involved = true;
                    match c.automaton.successor(tuple[i], spelled) {
                        Some(t) => target[i] = t,
                        None => continue 'events,
                    }
                }
            }
            if !involved {
                continue;
            }
            let next = match index.get(&target) {
                Some(&id) => id,
                None => {
                    let id = tuples.len() as StateId;
                    if tuples.len() >= cap {
                        return Err(Error::StateCap { cap });
                    }
                    index.insert(target.clone(), id);
                    tuples.push(target.clone());
                    transitions.push(Vec::new());
                    queue.push_back(id);
                    id
                }
            };
            row.push((event, next));
        }
        transitions[s as usize] = row;
    }

    let marked = tuples
        .iter()
        .map(|tuple| {
            components
                .iter()
                .enumerate()
                .all(|(i, c)| c.automaton.marked[tuple[i] as usize])
        })
        .collect();
    out.meta = tuples
        .into_iter()
        .map(|locations| StateMeta {
            locations,
            valuation: None,
        })
        .collect();
    out.marked = marked;
    out.transitions = transitions;
    Ok(JointAutomaton {
        automaton: out,
        components,
    })
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub nonblocking: bool,
    pub states: usize,
    pub transitions: usize,
    /// Shortest event path to a non-coaccessible joint state.
    pub witness: Option<Vec<Event>>,
}

#[derive(Debug, Clone)]
pub enum VerifyOutcome {
    /// Synthesis produced the empty supervisor.
    NoSupervisor,
    Report(VerifyReport),
}

/// Shortest trace (by transition count) from the initial state to any state
/// that cannot reach marking; `None` when the automaton is nonblocking.
pub fn blocking_witness(a: &ExplicitAutomaton) -> Option<Vec<Event>> {
    if a.is_empty() {
        return Some(Vec::new());
    }
    let coacc = a.coaccessible_set();
    if !coacc[0] {
        return Some(Vec::new());
    }
    let mut parent: Vec<Option<(StateId, Event)>> = vec![None; a.n_states()];
    let mut seen = vec![false; a.n_states()];
    seen[0] = true;
    let mut queue = VecDeque::from([0 as StateId]);
    while let Some(s) = queue.pop_front() {
        for &(e, t) in &a.transitions[s as usize] {
            if seen[t as usize] {
                continue;
            }
            seen[t as usize] = true;
            parent[t as usize] = Some((s, e));
            if !coacc[t as usize] {
                let mut path = Vec::new();
                let mut cur = t;
                while let Some((p, ev)) = parent[cur as usize] {
                    path.push(ev);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(t);
        }
    }
    None
}

pub fn verify_fleet(spec: &StructureSpec, n: u8) -> Result<VerifyOutcome> {
    verify_fleet_with_options(spec, n, &SynthesisOptions::default())
}

/// Synthesizes the robot-1 supervisor, replicates it across the fleet,
/// refines all copies, and checks that the explicit joint product is
/// nonblocking.
pub fn verify_fleet_with_options(
    spec: &StructureSpec,
    n: u8,
    opts: &SynthesisOptions,
) -> Result<VerifyOutcome> {
    if n < 1 {
        return Err(Error::InvalidArgument(
            "fleet size must be at least 1".into(),
        ));
    }
    let sup = match synthesize_with_options(spec, 1, opts)? {
        Synthesized::Empty => return Ok(VerifyOutcome::NoSupervisor),
        Synthesized::Supervisor(s) => *s,
    };
    let robots = RobotSet::new(n);
    let components: Vec<RefinedComponent> = robots
        .indices()
        .map(|j| RefinedComponent::from_supervisor(&replicate(&sup, j), robots))
        .collect();
    let j = joint(components, opts.state_cap)?;
    Ok(VerifyOutcome::Report(report_for(&j.automaton)))
}

pub fn report_for(a: &ExplicitAutomaton) -> VerifyReport {
    let witness = blocking_witness(a);
    VerifyReport {
        nonblocking: witness.is_none(),
        states: a.n_states(),
        transitions: a.n_transitions(),
        witness,
    }
}

impl VerifyReport {
    /// `RESULT nonblocking=<bool> states=<N> trans=<M>` plus optional
    /// witness lines in the simulator's trace syntax.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "RESULT nonblocking={} states={} trans={}\n",
            self.nonblocking, self.states, self.transitions
        );
        if let Some(witness) = &self.witness {
            out.push_str("WITNESS\n");
            for (i, e) in witness.iter().enumerate() {
                let robot = e.robot().unwrap_or(0);
                writeln!(out, "step={i} robot={robot} event={e} cause=executed").unwrap();
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
pub struct JointInvariantReport {
    /// Marked joint states have target heights and every robot outside.
    pub marked_ok: bool,
    /// Every unload transition satisfies the no-trench placement rule.
    pub placement_ok: bool,
    /// Unloads add exactly one brick; local events preserve heights.
    pub monotone_ok: bool,
    /// True when the joint automaton is empty and the checks are vacuous.
    pub vacuous: bool,
    pub violations: Vec<String>,
}

impl JointInvariantReport {
    pub fn all_ok(&self) -> bool {
        self.marked_ok && self.placement_ok && self.monotone_ok
    }
}

fn heights_at(c: &RefinedComponent, state: StateId) -> Vec<i32> {
    let v = c.automaton.meta[state as usize]
        .valuation
        .as_ref()
        .expect("refined supervisors keep their valuations");
    c.height_vars.iter().map(|&id| v.get(id)).collect()
}

/// Re-checks the joint behavior against the problem statement: marked
/// states are exactly "structure complete, all robots outside", placements
/// never fill a trench, and brick counts grow monotonically.
pub fn check_joint_invariants(j: &JointAutomaton, spec: &StructureSpec) -> JointInvariantReport {
    let mut report = JointInvariantReport {
        marked_ok: true,
        placement_ok: true,
        monotone_ok: true,
        vacuous: j.automaton.is_empty(),
        violations: Vec::new(),
    };
    if report.vacuous {
        return report;
    }
    let lead = &j.components[0];
    let targets: Vec<i32> = lead
        .height_cells
        .iter()
        .map(|&c| spec.target(c) as i32)
        .collect();

    for s in 0..j.automaton.n_states() {
        if !j.automaton.marked[s] {
            continue;
        }
        let tuple = &j.automaton.meta[s].locations;
        if heights_at(lead, tuple[0]) != targets {
            report.marked_ok = false;
            report
                .violations
                .push(format!("marked state {s} below target"));
        }
        for (i, c) in j.components.iter().enumerate() {
            let v = c.automaton.meta[tuple[i] as usize]
                .valuation
                .as_ref()
                .unwrap();
            if v.get(c.pos_x) != 0 || v.get(c.pos_y) != 0 {
                report.marked_ok = false;
                report.violations.push(format!(
                    "marked state {s}: robot {} inside the grid",
                    c.robot
                ));
            }
        }
    }

    // placement rule, evaluated on the pre-state heights of component 0
    let height_of = |heights: &[i32], x: i16, y: i16| -> i32 {
        lead.height_cells
            .iter()
            .position(|&c| c.x as i16 == x && c.y as i16 == y)
            .map_or(0, |i| heights[i])
    };
    for s in 0..j.automaton.n_states() {
        let tuple = &j.automaton.meta[s].locations;
        let pre = heights_at(lead, tuple[0]);
        for &(e, t) in &j.automaton.transitions[s] {
            let post_tuple = &j.automaton.meta[t as usize].locations;
            let post = heights_at(lead, post_tuple[0]);
            match e.cell() {
                Some(cell) => {
                    let (x, y) = (cell.x as i16, cell.y as i16);
                    let h = height_of(&pre, x, y);
                    let trench = (h < height_of(&pre, x - 1, y) && h < height_of(&pre, x + 1, y))
                        || (h < height_of(&pre, x, y - 1) && h < height_of(&pre, x, y + 1));
                    if trench {
                        report.placement_ok = false;
                        report
                            .violations
                            .push(format!("state {s}: `{e}` fills a trench"));
                    }
                    let pre_total: i32 = pre.iter().sum();
                    let post_total: i32 = post.iter().sum();
                    let bumped = lead
                        .height_cells
                        .iter()
                        .position(|&c| c == cell)
                        .map(|i| post[i] == pre[i] + 1)
                        .unwrap_or(false);
                    if post_total != pre_total + 1 || !bumped {
                        report.monotone_ok = false;
                        report
                            .violations
                            .push(format!("state {s}: `{e}` is not a single added brick"));
                    }
                }
                None => {
                    if post != pre {
                        report.monotone_ok = false;
                        report
                            .violations
                            .push(format!("state {s}: `{e}` changed the structure"));
                    }
                }
            }
        }
    }
    report
}
