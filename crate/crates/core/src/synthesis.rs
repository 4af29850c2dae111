//! Supervisor synthesis: iterative pruning of the plant (structure composed
//! with one robot) until it is trim, task-observer, and totally reciprocal,
//! or empty.
//!
//! Macrostates partition the plant by its height valuation; local events
//! never leave a macrostate and unload events always do. Task-observer asks
//! that every unload enabled somewhere in a macrostate be locally reachable
//! from every member state; totally reciprocal asks that a macrostate enable
//! an own unload at a cell exactly when it enables the other-robot unload
//! at that cell.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::efa::{compose_with_cap, DEFAULT_STATE_CAP};
use crate::error::{Error, Result};
use crate::event::{Cell, Event};
use crate::explicit::{flatten_with_cap, ExplicitAutomaton, StateId};
use crate::robot::{
    build_capacity, build_climbing_limits, build_navigation, build_placement_level,
};
use crate::structure::{build_height_updates, build_target_marking, ModelVars, StructureSpec};
use crate::vars::VarId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairMode {
    /// Remove every state that cannot locally reach an enabled unload.
    RemoveStates,
    /// Remove the unreachable unload's transitions from the macrostate
    /// instead; possibly more permissive, not claimed equivalent.
    RemoveTransitions,
}

#[derive(Debug, Clone, Copy)]
pub struct SynthesisOptions {
    pub state_cap: usize,
    pub iteration_cap: u64,
    pub repair_mode: RepairMode,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            state_cap: DEFAULT_STATE_CAP,
            iteration_cap: 10_000,
            repair_mode: RepairMode::RemoveStates,
        }
    }
}

/// The uncontrolled plant for one robot: structure and robot automata
/// flattened together. Reachable states only; blocking states stay in.
#[derive(Debug, Clone)]
pub struct PlantAutomaton {
    pub automaton: ExplicitAutomaton,
    pub robot: u8,
    /// Height variable ids in canonical row-major cell order.
    pub height_vars: Vec<VarId>,
    pub height_cells: Vec<Cell>,
    pub pos_x: VarId,
    pub pos_y: VarId,
}

pub fn build_plant(spec: &StructureSpec, robot: u8) -> Result<PlantAutomaton> {
    build_plant_with_options(spec, robot, &SynthesisOptions::default())
}

pub fn build_plant_with_options(
    spec: &StructureSpec,
    robot: u8,
    opts: &SynthesisOptions,
) -> Result<PlantAutomaton> {
    let cap = opts.state_cap;
    let vars = ModelVars::new(spec, robot);
    let heights = build_height_updates(spec, &vars, robot);
    let targets = build_target_marking(spec, &vars, robot, cap)?;
    let navigation = build_navigation(spec, &vars, robot);
    let capacity = build_capacity(spec, &vars, robot);
    let climbing = build_climbing_limits(spec, &vars, robot);
    let placement = build_placement_level(spec, &vars, robot);
    let composed = compose_with_cap(
        &[
            &heights,
            &targets,
            &navigation,
            &capacity,
            &climbing,
            &placement,
        ],
        cap,
    )?;
    let automaton = flatten_with_cap(&composed, cap)?;
    Ok(PlantAutomaton {
        automaton,
        robot,
        height_vars: vars.height_ids(),
        height_cells: vars.height_cells(),
        pos_x: vars.robot_x,
        pos_y: vars.robot_y,
    })
}

/// All states sharing one height valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Macrostate {
    pub key: Box<[i32]>,
    pub members: Vec<StateId>,
}

/// Partitions the states by height valuation, ordered by structure key.
pub fn compute_macrostates(a: &ExplicitAutomaton, height_vars: &[VarId]) -> Vec<Macrostate> {
    let mut groups: std::collections::BTreeMap<Box<[i32]>, Vec<StateId>> = Default::default();
    for s in 0..a.n_states() {
        let v = a.meta[s]
            .valuation
            .as_ref()
            .expect("macrostates need state valuations");
        groups
            .entry(v.project(height_vars))
            .or_default()
            .push(s as StateId);
    }
    groups
        .into_iter()
        .map(|(key, members)| Macrostate { key, members })
        .collect()
}

/// Unload events labeling any outgoing transition of a macrostate member.
pub fn enabled_task_events(m: &Macrostate, a: &ExplicitAutomaton) -> BTreeSet<Event> {
    let mut out = BTreeSet::new();
    for &s in &m.members {
        for e in a.enabled_events(s) {
            if e.is_task() {
                out.insert(e);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskObserverViolation {
    pub macrostate: usize,
    pub event: Event,
    /// Members with no local path (length >= 0) to a state enabling `event`.
    pub states: Vec<StateId>,
}

/// For each macrostate and enabled unload event, reports the member states
/// from which no sequence of local transitions reaches a state where the
/// event is defined. A state enabling the event satisfies its own
/// requirement via the empty sequence.
pub fn check_task_observer(
    a: &ExplicitAutomaton,
    macrostates: &[Macrostate],
) -> Vec<TaskObserverViolation> {
    let mut violations = Vec::new();
    for (mi, m) in macrostates.iter().enumerate() {
        let index: HashMap<StateId, usize> =
            m.members.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        // local predecessor edges inside the macrostate
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); m.members.len()];
        for (i, &s) in m.members.iter().enumerate() {
            for &(e, t) in &a.transitions[s as usize] {
                if e.is_local() {
                    let j = *index
                        .get(&t)
                        .expect("local transitions stay inside the macrostate");
                    preds[j].push(i);
                }
            }
        }
        for event in enabled_task_events(m, a) {
            let mut reached = vec![false; m.members.len()];
            let mut queue: VecDeque<usize> = VecDeque::new();
            for (i, &s) in m.members.iter().enumerate() {
                if a.successor(s, event).is_some() {
                    reached[i] = true;
                    queue.push_back(i);
                }
            }
            while let Some(i) = queue.pop_front() {
                for &p in &preds[i] {
                    if !reached[p] {
                        reached[p] = true;
                        queue.push_back(p);
                    }
                }
            }
            let offending: Vec<StateId> = m
                .members
                .iter()
                .enumerate()
                .filter(|(i, _)| !reached[*i])
                .map(|(_, &s)| s)
                .collect();
            if !offending.is_empty() {
                violations.push(TaskObserverViolation {
                    macrostate: mi,
                    event,
                    states: offending,
                });
            }
        }
    }
    violations
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReciprocalViolation {
    pub macrostate: usize,
    pub cell: Cell,
    /// True when the own unload is the enabled side, false when the
    /// other-robot unload is.
    pub own_enabled: bool,
}

/// A macrostate must enable the robot's own unload at a cell exactly when
/// it enables the other-robot unload at that cell.
pub fn check_totally_reciprocal(
    a: &ExplicitAutomaton,
    macrostates: &[Macrostate],
    robot: u8,
) -> Vec<ReciprocalViolation> {
    let mut violations = Vec::new();
    for (mi, m) in macrostates.iter().enumerate() {
        let enabled = enabled_task_events(m, a);
        let mut cells: BTreeSet<Cell> = BTreeSet::new();
        for e in &enabled {
            cells.insert(e.cell().expect("task events carry a cell"));
        }
        for cell in cells {
            let own = enabled.contains(&Event::unload_own(robot, cell));
            let other = enabled.contains(&Event::unload_other(cell));
            if own != other {
                violations.push(ReciprocalViolation {
                    macrostate: mi,
                    cell,
                    own_enabled: own,
                });
            }
        }
    }
    violations
}

/// Removes the offending states (and their incident transitions), or in
/// transition mode removes the unreachable event's transitions from the
/// whole macrostate.
pub fn repair_task_observer(
    a: &ExplicitAutomaton,
    macrostates: &[Macrostate],
    violations: &[TaskObserverViolation],
    mode: RepairMode,
) -> ExplicitAutomaton {
    if violations.is_empty() {
        return a.clone();
    }
    match mode {
        RepairMode::RemoveStates => {
            let mut keep = vec![true; a.n_states()];
            for v in violations {
                for &s in &v.states {
                    keep[s as usize] = false;
                }
            }
            a.restrict_states(&keep)
        }
        RepairMode::RemoveTransitions => {
            let mut drop: BTreeSet<(StateId, Event)> = BTreeSet::new();
            for v in violations {
                for &s in &macrostates[v.macrostate].members {
                    drop.insert((s, v.event));
                }
            }
            a.filter_transitions(|s, e, _| !drop.contains(&(s, e)))
        }
    }
}

/// Removes every transition of the enabled side of each one-sided pair.
pub fn repair_totally_reciprocal(
    a: &ExplicitAutomaton,
    macrostates: &[Macrostate],
    violations: &[ReciprocalViolation],
    robot: u8,
) -> ExplicitAutomaton {
    if violations.is_empty() {
        return a.clone();
    }
    let mut drop: BTreeSet<(StateId, Event)> = BTreeSet::new();
    for v in violations {
        let event = if v.own_enabled {
            Event::unload_own(robot, v.cell)
        } else {
            Event::unload_other(v.cell)
        };
        for &s in &macrostates[v.macrostate].members {
            drop.insert((s, event));
        }
    }
    a.filter_transitions(|s, e, _| !drop.contains(&(s, e)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Certificate {
    pub trim: bool,
    pub task_observer: bool,
    pub totally_reciprocal: bool,
}

impl Certificate {
    pub fn all_true(&self) -> bool {
        self.trim && self.task_observer && self.totally_reciprocal
    }
}

/// A synthesized supervisor: a trim, task-observer, totally reciprocal
/// subautomaton of the plant, with its macrostate index.
#[derive(Debug, Clone)]
pub struct Supervisor {
    pub automaton: ExplicitAutomaton,
    pub robot: u8,
    pub height_vars: Vec<VarId>,
    pub height_cells: Vec<Cell>,
    pub pos_x: VarId,
    pub pos_y: VarId,
    pub macrostates: Vec<Macrostate>,
    pub certificate: Certificate,
    /// Pruning passes the synthesis loop took to reach the fixpoint.
    pub passes: u64,
}

#[derive(Debug, Clone)]
pub enum Synthesized {
    Supervisor(Box<Supervisor>),
    /// The pruning emptied the automaton: no supervisor exists.
    Empty,
}

impl Synthesized {
    pub fn supervisor(self) -> Option<Supervisor> {
        match self {
            Synthesized::Supervisor(s) => Some(*s),
            Synthesized::Empty => None,
        }
    }
}

pub fn synthesize(spec: &StructureSpec, robot: u8) -> Result<Synthesized> {
    synthesize_with_options(spec, robot, &SynthesisOptions::default())
}

/// Iterates trim, task-observer repair, and totally-reciprocal repair until
/// a full pass changes nothing. Every pass shrinks the automaton, so the
/// loop terminates; the iteration cap is a divergence tripwire only.
pub fn synthesize_with_options(
    spec: &StructureSpec,
    robot: u8,
    opts: &SynthesisOptions,
) -> Result<Synthesized> {
    let plant = build_plant_with_options(spec, robot, opts)?;
    synthesize_from_plant(&plant, opts)
}

pub fn synthesize_from_plant(
    plant: &PlantAutomaton,
    opts: &SynthesisOptions,
) -> Result<Synthesized> {
    let robot = plant.robot;
    let mut a = plant.automaton.clone();
    let mut passes: u64 = 0;
    loop {
        passes += 1;
        if passes > opts.iteration_cap {
            return Err(Error::SynthesisDiverged(opts.iteration_cap));
        }
        let before = (a.n_states(), a.n_transitions());

        a = a.trim();
        if a.is_empty() {
            return Ok(Synthesized::Empty);
        }

        let macrostates = compute_macrostates(&a, &plant.height_vars);
        let violations = check_task_observer(&a, &macrostates);
        if !violations.is_empty() {
            a = repair_task_observer(&a, &macrostates, &violations, opts.repair_mode);
            if a.is_empty() {
                return Ok(Synthesized::Empty);
            }
        }

        let macrostates = compute_macrostates(&a, &plant.height_vars);
        let violations = check_totally_reciprocal(&a, &macrostates, robot);
        if !violations.is_empty() {
            a = repair_totally_reciprocal(&a, &macrostates, &violations, robot);
        }

        if (a.n_states(), a.n_transitions()) == before {
            break;
        }
    }

    let macrostates = compute_macrostates(&a, &plant.height_vars);
    let certificate = Certificate {
        trim: a.is_nonblocking(),
        task_observer: check_task_observer(&a, &macrostates).is_empty(),
        totally_reciprocal: check_totally_reciprocal(&a, &macrostates, robot).is_empty(),
    };
    debug_assert!(certificate.all_true(), "fixpoint must satisfy all three");
    Ok(Synthesized::Supervisor(Box::new(Supervisor {
        automaton: a,
        robot,
        height_vars: plant.height_vars.clone(),
        height_cells: plant.height_cells.clone(),
        pos_x: plant.pos_x,
        pos_y: plant.pos_y,
        macrostates,
        certificate,
        passes,
    })))
}
