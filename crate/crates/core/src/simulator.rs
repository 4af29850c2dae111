//! Closed-loop simulation: each robot runs a replicated copy of the
//! synthesized supervisor and the fleet coordinates unloads through the
//! broadcast permission protocol. Scheduling is deterministic round-robin;
//! the only randomness is the seeded action choice, so identical
//! configurations produce byte-identical traces.
//!
//! Collision avoidance is an execution-time filter beneath the supervised
//! model: it narrows a robot's choice set for the turn but never advances
//! or blocks supervisor states.

use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::event::{Cell, Event, LocalKind, Owner};
use crate::explicit::StateId;
use crate::replication::replicate;
use crate::structure::StructureSpec;
use crate::synthesis::{synthesize_with_options, Supervisor, SynthesisOptions, Synthesized};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Policy {
    /// Uniform choice among the enabled actions, from the run seed.
    Random,
    /// Fixed event list: on its turn a robot executes its next scripted
    /// event, or passes when the next line belongs to another robot.
    Scripted(Script),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Script {
    pub lines: Vec<(u8, Event)>,
}

impl Script {
    /// One event per line, prefixed with the acting robot:
    /// `2 tau[2](1,1)`. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Script> {
        let mut lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (robot, event) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::parse(lineno, "expected `<robot> <event>`"))?;
            let robot: u8 = robot
                .parse()
                .map_err(|_| Error::parse(lineno, "bad robot index"))?;
            let event: Event = event
                .trim()
                .parse()
                .map_err(|m: String| Error::parse(lineno, m))?;
            if event.robot() != Some(robot) {
                return Err(Error::parse(
                    lineno,
                    format!("event `{event}` does not belong to robot {robot}"),
                ));
            }
            lines.push((robot, event));
        }
        Ok(Script { lines })
    }
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub robots: u8,
    pub seed: u64,
    pub policy: Policy,
    pub max_steps: u64,
    pub synthesis: SynthesisOptions,
}

impl SimulationConfig {
    pub fn new(robots: u8, seed: u64) -> Self {
        SimulationConfig {
            robots,
            seed,
            policy: Policy::Random,
            max_steps: 10_000,
            synthesis: SynthesisOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cause {
    Executed,
    Denied,
    CollisionBlocked,
}

impl fmt::Display for Cause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cause::Executed => write!(f, "executed"),
            Cause::Denied => write!(f, "denied"),
            Cause::CollisionBlocked => write!(f, "collision_blocked"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub step: u64,
    pub robot: u8,
    pub event: Event,
    pub cause: Cause,
    pub denied_by: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Completed,
    StepLimit,
    Stuck,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Completed => write!(f, "completed"),
            Outcome::StepLimit => write!(f, "step_limit"),
            Outcome::Stuck => write!(f, "stuck"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub outcome: Outcome,
    pub steps: u64,
}

impl Trace {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&format!(
                "step={} robot={} event={} cause={}",
                e.step, e.robot, e.event, e.cause
            ));
            if !e.denied_by.is_empty() {
                let ids: Vec<String> = e.denied_by.iter().map(u8::to_string).collect();
                out.push_str(&format!(" denied_by={}", ids.join(",")));
            }
            out.push('\n');
        }
        out.push_str(&format!("outcome={} steps={}\n", self.outcome, self.steps));
        out
    }

    pub fn parse(text: &str) -> Result<Trace> {
        let mut events = Vec::new();
        let mut outcome = None;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = std::collections::HashMap::new();
            for tok in line.split_whitespace() {
                let (k, v) = tok
                    .split_once('=')
                    .ok_or_else(|| Error::parse(lineno, format!("bad field `{tok}`")))?;
                fields.insert(k, v);
            }
            if let Some(outcome_text) = fields.get("outcome") {
                let steps: u64 = fields
                    .get("steps")
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::parse(lineno, "bad steps field"))?;
                let parsed = match *outcome_text {
                    "completed" => Outcome::Completed,
                    "step_limit" => Outcome::StepLimit,
                    "stuck" => Outcome::Stuck,
                    other => return Err(Error::parse(lineno, format!("bad outcome `{other}`"))),
                };
                outcome = Some((parsed, steps));
                continue;
            }
            let step: u64 = fields
                .get("step")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(lineno, "bad step field"))?;
            let robot: u8 = fields
                .get("robot")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(lineno, "bad robot field"))?;
            let event: Event = fields
                .get("event")
                .ok_or_else(|| Error::parse(lineno, "missing event field"))?
                .parse()
                .map_err(|m: String| Error::parse(lineno, m))?;
            let cause = match fields.get("cause").copied() {
                Some("executed") => Cause::Executed,
                Some("denied") => Cause::Denied,
                Some("collision_blocked") => Cause::CollisionBlocked,
                other => {
                    return Err(Error::parse(
                        lineno,
                        format!("bad cause `{}`", other.unwrap_or("")),
                    ))
                }
            };
            let denied_by = match fields.get("denied_by") {
                Some(list) => list
                    .split(',')
                    .map(|t| {
                        t.parse()
                            .map_err(|_| Error::parse(lineno, "bad denied_by field"))
                    })
                    .collect::<Result<Vec<u8>>>()?,
                None => Vec::new(),
            };
            events.push(TraceEvent {
                step,
                robot,
                event,
                cause,
                denied_by,
            });
        }
        let (outcome, steps) = outcome.ok_or_else(|| Error::parse(0, "missing outcome line"))?;
        Ok(Trace {
            events,
            outcome,
            steps,
        })
    }
}

#[derive(Debug, Clone)]
struct RobotState {
    pos: Cell,
    loaded: bool,
    sup_state: StateId,
}

#[derive(Debug)]
pub struct Simulation {
    pub spec: StructureSpec,
    supervisors: Vec<Supervisor>,
    robots: Vec<RobotState>,
    heights: Vec<u32>,
    turn: u64,
    rng: ChaCha8Rng,
    policy: Policy,
    script_cursor: usize,
    /// Consecutive turns in which the scheduled robot had no enabled action.
    silent_streak: u8,
    pub trace: Vec<TraceEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnloadDecision {
    Granted,
    Denied(Vec<u8>),
}

impl Simulation {
    pub fn new(spec: &StructureSpec, config: &SimulationConfig) -> Result<Simulation> {
        if config.robots < 1 || config.robots > 26 {
            return Err(Error::InvalidArgument(
                "robot count must be between 1 and 26".into(),
            ));
        }
        let template = match synthesize_with_options(spec, 1, &config.synthesis)? {
            Synthesized::Empty => return Err(Error::NoSupervisor),
            Synthesized::Supervisor(s) => *s,
        };
        Ok(Self::with_supervisor(spec, &template, config))
    }

    pub fn with_supervisor(
        spec: &StructureSpec,
        template: &Supervisor,
        config: &SimulationConfig,
    ) -> Simulation {
        let supervisors: Vec<Supervisor> = (1..=config.robots)
            .map(|j| replicate(template, j))
            .collect();
        let robots = vec![
            RobotState {
                pos: Cell::OUTSIDE,
                loaded: false,
                sup_state: 0,
            };
            config.robots as usize
        ];
        Simulation {
            spec: spec.clone(),
            supervisors,
            robots,
            heights: vec![0; spec.width as usize * spec.height as usize],
            turn: 0,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            policy: config.policy.clone(),
            script_cursor: 0,
            silent_streak: 0,
            trace: Vec::new(),
        }
    }

    pub fn n_robots(&self) -> u8 {
        self.robots.len() as u8
    }

    pub fn height(&self, cell: Cell) -> u32 {
        self.heights[(cell.y as usize - 1) * self.spec.width as usize + (cell.x as usize - 1)]
    }

    fn bump_height(&mut self, cell: Cell) {
        self.heights[(cell.y as usize - 1) * self.spec.width as usize + (cell.x as usize - 1)] += 1;
    }

    pub fn heights(&self) -> &[u32] {
        &self.heights
    }

    pub fn robot_position(&self, robot: u8) -> Cell {
        self.robots[robot as usize - 1].pos
    }

    pub fn robot_loaded(&self, robot: u8) -> bool {
        self.robots[robot as usize - 1].loaded
    }

    pub fn supervisor_state(&self, robot: u8) -> StateId {
        self.robots[robot as usize - 1].sup_state
    }

    pub fn completed(&self) -> bool {
        self.robots
            .iter()
            .zip(&self.supervisors)
            .all(|(r, s)| s.automaton.marked[r.sup_state as usize])
    }

    fn occupied(&self, cell: Cell, except: u8) -> bool {
        !cell.is_outside()
            && self
                .robots
                .iter()
                .enumerate()
                .any(|(i, r)| i as u8 + 1 != except && r.pos == cell)
    }

    fn destination(&self, robot: u8, kind: LocalKind) -> Option<Cell> {
        let pos = self.robot_position(robot);
        match kind {
            LocalKind::East => Some(Cell::new(pos.x + 1, pos.y)),
            LocalKind::West => Some(Cell::new(pos.x - 1, pos.y)),
            LocalKind::South => Some(Cell::new(pos.x, pos.y + 1)),
            LocalKind::North => Some(Cell::new(pos.x, pos.y - 1)),
            LocalKind::In(cell) => Some(cell),
            LocalKind::Pick | LocalKind::Out => None,
        }
    }

    /// The robot's own events enabled by its supervisor state, before the
    /// collision filter. Other robots' unloads are inputs, not choices.
    pub fn supervisor_choices(&self, robot: u8) -> Vec<Event> {
        let sup = &self.supervisors[robot as usize - 1];
        sup.automaton
            .enabled_events(self.supervisor_state(robot))
            .filter(|e| e.robot() == Some(robot))
            .collect()
    }

    /// Supervisor choices with the collision layer applied: no moving into
    /// an occupied cell, no unloading onto an occupied cell.
    pub fn enabled_actions(&self, robot: u8) -> Vec<Event> {
        self.supervisor_choices(robot)
            .into_iter()
            .filter(|e| match e {
                Event::Local { kind, .. } => match self.destination(robot, *kind) {
                    Some(dest) => !self.occupied(dest, robot),
                    None => true,
                },
                Event::Unload { cell, .. } => !self.occupied(*cell, robot),
            })
            .collect()
    }

    /// The broadcast permission protocol: the unload happens iff every other
    /// robot's supervisor currently enables the matching other-robot unload.
    /// On a grant all supervisors advance and the brick lands; on a denial
    /// nothing changes.
    pub fn attempt_unload(&mut self, robot: u8, cell: Cell) -> UnloadDecision {
        let mut refusers = Vec::new();
        for j in 1..=self.n_robots() {
            if j == robot {
                continue;
            }
            let sup = &self.supervisors[j as usize - 1];
            if sup
                .automaton
                .successor(self.supervisor_state(j), Event::unload_other(cell))
                .is_none()
            {
                refusers.push(j);
            }
        }
        if !refusers.is_empty() {
            return UnloadDecision::Denied(refusers);
        }
        for j in 1..=self.n_robots() {
            let event = if j == robot {
                Event::unload_own(robot, cell)
            } else {
                Event::unload_other(cell)
            };
            let sup = &self.supervisors[j as usize - 1];
            let next = sup
                .automaton
                .successor(self.supervisor_state(j), event)
                .expect("checked before executing");
            self.robots[j as usize - 1].sup_state = next;
        }
        self.bump_height(cell);
        self.robots[robot as usize - 1].loaded = false;
        UnloadDecision::Granted
    }

    fn apply_local(&mut self, robot: u8, kind: LocalKind) {
        let state = &mut self.robots[robot as usize - 1];
        match kind {
            LocalKind::East => state.pos.x += 1,
            LocalKind::West => state.pos.x -= 1,
            LocalKind::South => state.pos.y += 1,
            LocalKind::North => state.pos.y -= 1,
            LocalKind::In(cell) => state.pos = cell,
            LocalKind::Out => state.pos = Cell::OUTSIDE,
            LocalKind::Pick => state.loaded = true,
        }
        let sup = &self.supervisors[robot as usize - 1];
        let next = sup
            .automaton
            .successor(state.sup_state, Event::local(robot, kind))
            .expect("enabled local event");
        self.robots[robot as usize - 1].sup_state = next;
    }

    /// Runs one scheduled turn. Returns false when a scripted run has
    /// consumed its whole script.
    fn step(&mut self) -> Result<bool> {
        let robot = (self.turn % self.n_robots() as u64) as u8 + 1;
        let step = self.turn;
        self.turn += 1;
        let enabled = self.enabled_actions(robot);

        let chosen: Option<Event> = match &self.policy {
            Policy::Random => {
                if enabled.is_empty() {
                    None
                } else {
                    Some(enabled[self.rng.random_range(0..enabled.len())])
                }
            }
            Policy::Scripted(script) => {
                let Some(&(script_robot, event)) = script.lines.get(self.script_cursor) else {
                    return Ok(false);
                };
                if script_robot != robot {
                    // not this robot's line: wait
                    self.silent_streak = 0;
                    return Ok(true);
                }
                if !enabled.contains(&event) {
                    return Err(Error::Script {
                        step,
                        event: event.to_string(),
                    });
                }
                self.script_cursor += 1;
                Some(event)
            }
        };

        match chosen {
            None => {
                // nothing to do this turn; attribute it when the supervisor
                // itself had offered something and only occupancy blocked it
                let unfiltered = self.supervisor_choices(robot);
                if let Some(&blocked) = unfiltered.first() {
                    self.trace.push(TraceEvent {
                        step,
                        robot,
                        event: blocked,
                        cause: Cause::CollisionBlocked,
                        denied_by: Vec::new(),
                    });
                }
                self.silent_streak += 1;
            }
            Some(event) => {
                self.silent_streak = 0;
                match event {
                    Event::Local { kind, .. } => {
                        self.apply_local(robot, kind);
                        self.trace.push(TraceEvent {
                            step,
                            robot,
                            event,
                            cause: Cause::Executed,
                            denied_by: Vec::new(),
                        });
                    }
                    Event::Unload { cell, owner } => {
                        debug_assert_eq!(owner, Owner::Robot(robot));
                        match self.attempt_unload(robot, cell) {
                            UnloadDecision::Granted => self.trace.push(TraceEvent {
                                step,
                                robot,
                                event,
                                cause: Cause::Executed,
                                denied_by: Vec::new(),
                            }),
                            UnloadDecision::Denied(refusers) => self.trace.push(TraceEvent {
                                step,
                                robot,
                                event,
                                cause: Cause::Denied,
                                denied_by: refusers,
                            }),
                        }
                    }
                }
            }
        }
        Ok(true)
    }

    /// Drives the round-robin loop to completion, the step limit, or a full
    /// silent round.
    pub fn run(&mut self, max_steps: u64) -> Result<Trace> {
        let outcome = loop {
            if self.completed() {
                break Outcome::Completed;
            }
            if self.turn >= max_steps {
                break Outcome::StepLimit;
            }
            if self.silent_streak >= self.n_robots() {
                break Outcome::Stuck;
            }
            if !self.step()? {
                // script exhausted
                break if self.completed() {
                    Outcome::Completed
                } else {
                    Outcome::StepLimit
                };
            }
        };
        Ok(Trace {
            events: self.trace.clone(),
            outcome,
            steps: self.turn,
        })
    }
}

/// Runs a full simulation from a structure and configuration.
pub fn run(spec: &StructureSpec, config: &SimulationConfig) -> Result<Trace> {
    let mut sim = Simulation::new(spec, config)?;
    sim.run(config.max_steps)
}

/// Renders the heights grid with robot markers `A..Z` overlaid; robots
/// outside the grid are listed below it.
pub fn render_grid(spec: &StructureSpec, heights: &[u32], positions: &[Cell]) -> String {
    let mut out = String::new();
    for y in 1..=spec.height {
        for x in 1..=spec.width {
            let cell = Cell::new(x, y);
            let robot = positions.iter().position(|&p| p == cell);
            match robot {
                Some(i) => out.push((b'A' + i as u8) as char),
                None => {
                    let h = heights[(y as usize - 1) * spec.width as usize + (x as usize - 1)];
                    out.push(if h <= 9 {
                        (b'0' + h as u8) as char
                    } else {
                        '+'
                    });
                }
            }
        }
        out.push('\n');
    }
    let outside: Vec<String> = positions
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_outside())
        .map(|(i, _)| ((b'A' + i as u8) as char).to_string())
        .collect();
    if !outside.is_empty() {
        out.push_str(&format!("outside: {}\n", outside.join(" ")));
    }
    out
}

/// Replays a trace over a fresh structure, yielding the final heights and
/// positions. The snapshot callback fires for every trace line, after the
/// line's effect (executed events move state; denied and blocked ones do
/// not). Works on positions and heights only; supervisor acceptance is
/// audited separately.
pub fn replay_positions(
    spec: &StructureSpec,
    n: u8,
    trace: &Trace,
    mut snapshot: impl FnMut(&TraceEvent, &[u32], &[Cell]),
) -> Result<(Vec<u32>, Vec<Cell>)> {
    let mut heights = vec![0u32; spec.width as usize * spec.height as usize];
    let mut positions = vec![Cell::OUTSIDE; n as usize];
    for event in &trace.events {
        if event.cause == Cause::Executed {
            let robot = event.robot as usize - 1;
            match event.event {
                Event::Local { kind, .. } => match kind {
                    LocalKind::East => positions[robot].x += 1,
                    LocalKind::West => positions[robot].x -= 1,
                    LocalKind::South => positions[robot].y += 1,
                    LocalKind::North => positions[robot].y -= 1,
                    LocalKind::In(cell) => positions[robot] = cell,
                    LocalKind::Out => positions[robot] = Cell::OUTSIDE,
                    LocalKind::Pick => {}
                },
                Event::Unload { cell, .. } => {
                    heights[(cell.y as usize - 1) * spec.width as usize + (cell.x as usize - 1)] +=
                        1;
                }
            }
        }
        snapshot(event, &heights, &positions);
    }
    Ok((heights, positions))
}
