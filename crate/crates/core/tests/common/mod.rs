//! Shared test support: independent oracle implementations of the domain
//! rules (placement conditions, robot moves, synchronous composition) that
//! deliberately avoid the guard/automaton machinery they are used to check,
//! plus the named regression structures.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fs;
use std::path::PathBuf;

use bricklayer::efa::ExtendedAutomaton;
use bricklayer::event::{Cell, Event, LocalKind, Owner};
use bricklayer::explicit::{ExplicitAutomaton, StateId};
use bricklayer::guard::{ActionList, Cmp, GuardExpr, Operand};
use bricklayer::simulator::{Cause, Trace};
use bricklayer::structure::StructureSpec;
use bricklayer::synthesis::Supervisor;
use bricklayer::vars::Valuation;
use bricklayer::Outcome;

pub fn structures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../structures")
}

pub fn load_structure(name: &str) -> StructureSpec {
    let path = structures_dir().join(format!("{name}.txt"));
    let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path:?}: {e}"));
    bricklayer::parse_structure(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// The named regression structures and whether synthesis yields a supervisor.
pub fn suite() -> Vec<(&'static str, StructureSpec, bool)> {
    let buildable = [
        "unit_1x1",
        "pair_1x2",
        "row_1x3",
        "square_2x2",
        "staircase_1x2",
        "pit_2x2",
        "well_1x4",
        "ring_3x3",
        "tower_3x3",
        "corners_5x5",
    ];
    let empty = ["isolated_center_3x3", "solo_2high_1x1"];
    buildable
        .iter()
        .map(|&n| (n, load_structure(n), true))
        .chain(empty.iter().map(|&n| (n, load_structure(n), false)))
        .collect()
}

// ---------------------------------------------------------------------------
// independent placement rules
// ---------------------------------------------------------------------------

/// Heights lookup keyed by cell, zero elsewhere (outside, beyond the grid,
/// and zero-target cells never hold bricks).
pub type Heights = BTreeMap<Cell, i32>;

pub fn height_at(heights: &Heights, x: i16, y: i16) -> i32 {
    if x < 0 || y < 0 || x > u8::MAX as i16 || y > u8::MAX as i16 {
        return 0;
    }
    heights
        .get(&Cell::new(x as u8, y as u8))
        .copied()
        .unwrap_or(0)
}

/// Neighbor enumeration straight from the definitions: Manhattan distance
/// one inside the grid, the outside region adjacent to io cells only.
pub fn neighbors_of(spec: &StructureSpec, cell: Cell) -> Vec<Cell> {
    if cell.is_outside() {
        return spec.io.iter().copied().collect();
    }
    let mut out = Vec::new();
    let (x, y) = (cell.x as i16, cell.y as i16);
    for (nx, ny) in [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)] {
        if nx >= 1 && nx <= spec.width as i16 && ny >= 1 && ny <= spec.height as i16 {
            out.push(Cell::new(nx as u8, ny as u8));
        }
    }
    if spec.io.contains(&cell) {
        out.push(Cell::OUTSIDE);
    }
    out
}

/// The trench rule alone: the cell must not be strictly below both east and
/// west, nor both north and south (coordinates beyond the grid are zero).
pub fn trench_free(heights: &Heights, cell: Cell) -> bool {
    let (x, y) = (cell.x as i16, cell.y as i16);
    let h = height_at(heights, x, y);
    let horizontal = h < height_at(heights, x - 1, y) && h < height_at(heights, x + 1, y);
    let vertical = h < height_at(heights, x, y - 1) && h < height_at(heights, x, y + 1);
    !(horizontal || vertical)
}

/// Full brick-addition predicate: (a) some neighbor at equal height,
/// (b) trench-free, (c) target not yet reached.
pub fn placement_allowed(spec: &StructureSpec, heights: &Heights, cell: Cell) -> bool {
    let h = height_at(heights, cell.x as i16, cell.y as i16);
    let level_neighbor = neighbors_of(spec, cell)
        .iter()
        .any(|n| height_at(heights, n.x as i16, n.y as i16) == h);
    level_neighbor && trench_free(heights, cell) && (h as u32) < spec.target(cell)
}

// ---------------------------------------------------------------------------
// domain-rule oracle for the single-robot plant
// ---------------------------------------------------------------------------

/// A plant configuration in domain terms: where the robot stands, whether
/// it carries a brick, and the current heights.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DomainState {
    pub pos: Cell,
    pub loaded: bool,
    pub heights: Vec<i32>,
}

pub struct DomainOracle {
    pub spec: StructureSpec,
    pub robot: u8,
    pub task_cells: Vec<Cell>,
}

impl DomainOracle {
    pub fn new(spec: &StructureSpec, robot: u8) -> Self {
        DomainOracle {
            spec: spec.clone(),
            robot,
            task_cells: spec.task_cells(),
        }
    }

    pub fn initial(&self) -> DomainState {
        DomainState {
            pos: Cell::OUTSIDE,
            loaded: false,
            heights: vec![0; self.task_cells.len()],
        }
    }

    fn heights_map(&self, state: &DomainState) -> Heights {
        self.task_cells
            .iter()
            .copied()
            .zip(state.heights.iter().copied())
            .collect()
    }

    pub fn marked(&self, state: &DomainState) -> bool {
        let complete = self
            .task_cells
            .iter()
            .zip(&state.heights)
            .all(|(&c, &h)| h as u32 == self.spec.target(c));
        complete && state.pos.is_outside()
    }

    /// Successors in canonical event order, straight from the robot's
    /// capabilities and the placement rules.
    pub fn successors(&self, state: &DomainState) -> Vec<(Event, DomainState)> {
        let spec = &self.spec;
        let heights = self.heights_map(state);
        let h = |c: Cell| height_at(&heights, c.x as i16, c.y as i16);
        let mut out = Vec::new();

        // movement: one cell, step of at most one brick
        if !state.pos.is_outside() {
            let moves = [
                (LocalKind::East, 1i16, 0i16),
                (LocalKind::West, -1, 0),
                (LocalKind::North, 0, -1),
                (LocalKind::South, 0, 1),
            ];
            for (kind, dx, dy) in moves {
                let (nx, ny) = (state.pos.x as i16 + dx, state.pos.y as i16 + dy);
                if nx < 1 || nx > spec.width as i16 || ny < 1 || ny > spec.height as i16 {
                    continue;
                }
                let dest = Cell::new(nx as u8, ny as u8);
                if (h(state.pos) - h(dest)).abs() <= 1 {
                    out.push((
                        Event::local(self.robot, kind),
                        DomainState {
                            pos: dest,
                            ..state.clone()
                        },
                    ));
                }
            }
        }
        // pick up outside
        if state.pos.is_outside() && !state.loaded {
            out.push((
                Event::local(self.robot, LocalKind::Pick),
                DomainState {
                    loaded: true,
                    ..state.clone()
                },
            ));
        }
        // enter through io cells of height at most one
        if state.pos.is_outside() {
            for &io in &spec.io {
                if h(io) <= 1 {
                    out.push((
                        Event::local(self.robot, LocalKind::In(io)),
                        DomainState {
                            pos: io,
                            ..state.clone()
                        },
                    ));
                }
            }
        }
        // leave from io cells of height at most one
        if !state.pos.is_outside() && spec.io.contains(&state.pos) && h(state.pos) <= 1 {
            out.push((
                Event::local(self.robot, LocalKind::Out),
                DomainState {
                    pos: Cell::OUTSIDE,
                    ..state.clone()
                },
            ));
        }
        // own unload: loaded, adjacent at equal height, placement allowed
        for (i, &cell) in self.task_cells.iter().enumerate() {
            if state.loaded
                && neighbors_of(spec, cell).contains(&state.pos)
                && h(state.pos) == h(cell)
                && placement_allowed(spec, &heights, cell)
            {
                let mut next = state.clone();
                next.heights[i] += 1;
                next.loaded = false;
                out.push((Event::unload_own(self.robot, cell), next));
            }
        }
        // other robots' unloads: placement rules only
        for (i, &cell) in self.task_cells.iter().enumerate() {
            if placement_allowed(spec, &heights, cell) {
                let mut next = state.clone();
                next.heights[i] += 1;
                out.push((Event::unload_other(cell), next));
            }
        }
        out.sort_by_key(|&(e, _)| e);
        out
    }

    pub fn reachable_count(&self) -> usize {
        let mut seen: BTreeSet<DomainState> = BTreeSet::new();
        let mut queue = VecDeque::from([self.initial()]);
        seen.insert(self.initial());
        while let Some(s) = queue.pop_front() {
            for (_, t) in self.successors(&s) {
                if seen.insert(t.clone()) {
                    queue.push_back(t);
                }
            }
        }
        seen.len()
    }
}

/// Checks that an explicit automaton is bisimilar to the domain oracle from
/// their initial states: same enabled events, same marking, everywhere.
/// Returns the number of paired states.
pub fn assert_matches_domain(a: &ExplicitAutomaton, oracle: &DomainOracle) -> usize {
    assert!(!a.is_empty());
    let mut pairs: HashMap<StateId, DomainState> = HashMap::new();
    let mut queue: VecDeque<StateId> = VecDeque::new();
    pairs.insert(0, oracle.initial());
    queue.push_back(0);
    let mut visited = 0usize;
    while let Some(s) = queue.pop_front() {
        visited += 1;
        let d = pairs[&s].clone();
        assert_eq!(
            a.marked[s as usize],
            oracle.marked(&d),
            "marking mismatch at {d:?}"
        );
        let expected = oracle.successors(&d);
        let actual: Vec<Event> = a.enabled_events(s).collect();
        let expected_events: Vec<Event> = expected.iter().map(|&(e, _)| e).collect();
        assert_eq!(actual, expected_events, "enabled sets differ at {d:?}");
        for (e, next_d) in expected {
            let next_s = a.successor(s, e).unwrap();
            match pairs.get(&next_s) {
                Some(prev) => assert_eq!(*prev, next_d, "state aliasing on {e}"),
                None => {
                    pairs.insert(next_s, next_d);
                    queue.push_back(next_s);
                }
            }
        }
    }
    assert_eq!(visited, a.n_states(), "automaton has unreachable states");
    visited
}

// ---------------------------------------------------------------------------
// independent synchronous-interleaving oracle over extended automata
// ---------------------------------------------------------------------------

fn oracle_operand(op: &Operand, vals: &[i32]) -> i32 {
    op.offset + op.var.map_or(0, |id| vals[id])
}

fn oracle_guard(g: &GuardExpr, vals: &[i32]) -> bool {
    match g {
        GuardExpr::True => true,
        GuardExpr::Cmp(a, op, b) => {
            let (x, y) = (oracle_operand(a, vals), oracle_operand(b, vals));
            match op {
                Cmp::Eq => x == y,
                Cmp::Ne => x != y,
                Cmp::Lt => x < y,
                Cmp::Le => x <= y,
                Cmp::Gt => x > y,
                Cmp::Ge => x >= y,
            }
        }
        GuardExpr::Not(g) => !oracle_guard(g, vals),
        GuardExpr::And(gs) => gs.iter().all(|g| oracle_guard(g, vals)),
        GuardExpr::Or(gs) => gs.iter().any(|g| oracle_guard(g, vals)),
        GuardExpr::Xor(a, b) => oracle_guard(a, vals) ^ oracle_guard(b, vals),
    }
}

fn oracle_actions(actions: &ActionList, vals: &[i32], domains: &[(i32, i32)]) -> Option<Vec<i32>> {
    let mut out = vals.to_vec();
    for a in &actions.0 {
        let v = oracle_operand(&a.value, &out);
        let (lo, hi) = domains[a.var];
        if v < lo || v > hi {
            return None;
        }
        out[a.var] = v;
    }
    Some(out)
}

/// A configuration of the two-automata interleaving semantics.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SyncConfig {
    pub locs: (usize, usize),
    pub vals: Vec<i32>,
}

/// Steps the pair on one event: lock-step when both know the event,
/// interleaved otherwise; guards read the pre-state and the two action
/// lists apply in component order. Returns `None` when disabled.
pub fn oracle_sync_step(
    a: &ExtendedAutomaton,
    b: &ExtendedAutomaton,
    cfg: &SyncConfig,
    event: Event,
) -> Option<SyncConfig> {
    let domains: Vec<(i32, i32)> = a.variables.iter().map(|(_, d)| (d.lo, d.hi)).collect();
    let pick = |efa: &ExtendedAutomaton, loc: usize| -> Vec<(usize, ActionList)> {
        efa.transitions
            .iter()
            .filter(|t| t.from == loc && t.event == event && oracle_guard(&t.guard, &cfg.vals))
            .map(|t| (t.to, t.actions.clone()))
            .collect()
    };
    let in_a = a.alphabet.contains(&event);
    let in_b = b.alphabet.contains(&event);
    let (mut to_a, mut acts_a) = (cfg.locs.0, ActionList::empty());
    let (mut to_b, mut acts_b) = (cfg.locs.1, ActionList::empty());
    if in_a {
        let mut cands = pick(a, cfg.locs.0);
        if cands.is_empty() {
            return None;
        }
        assert_eq!(cands.len(), 1, "oracle expects per-valuation determinism");
        (to_a, acts_a) = cands.pop().unwrap();
    }
    if in_b {
        let mut cands = pick(b, cfg.locs.1);
        if cands.is_empty() {
            return None;
        }
        assert_eq!(cands.len(), 1);
        (to_b, acts_b) = cands.pop().unwrap();
    }
    if !in_a && !in_b {
        return None;
    }
    let vals = oracle_actions(&acts_a, &cfg.vals, &domains)
        .and_then(|v| oracle_actions(&acts_b, &v, &domains))?;
    Some(SyncConfig {
        locs: (to_a, to_b),
        vals,
    })
}

/// Depth-bounded language of the interleaving oracle, as event strings.
pub fn oracle_language(
    a: &ExtendedAutomaton,
    b: &ExtendedAutomaton,
    depth: usize,
) -> BTreeSet<Vec<Event>> {
    let initial = SyncConfig {
        locs: (a.initial, b.initial),
        vals: a.variables.iter().map(|(_, d)| d.initial).collect(),
    };
    let alphabet: BTreeSet<Event> = a
        .alphabet
        .iter()
        .chain(b.alphabet.iter())
        .copied()
        .collect();
    let mut language = BTreeSet::new();
    let mut frontier = vec![(Vec::new(), initial)];
    language.insert(Vec::new());
    for _ in 0..depth {
        let mut next = Vec::new();
        for (word, cfg) in frontier {
            for &e in &alphabet {
                if let Some(cfg2) = oracle_sync_step(a, b, &cfg, e) {
                    let mut w = word.clone();
                    w.push(e);
                    language.insert(w.clone());
                    next.push((w, cfg2));
                }
            }
        }
        frontier = next;
    }
    language
}

/// Depth-bounded language of an explicit automaton.
pub fn explicit_language(a: &ExplicitAutomaton, depth: usize) -> BTreeSet<Vec<Event>> {
    let mut language = BTreeSet::new();
    let Some(initial) = a.initial() else {
        return language;
    };
    language.insert(Vec::new());
    let mut frontier = vec![(Vec::new(), initial)];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (word, s) in frontier {
            for &(e, t) in &a.transitions[s as usize] {
                let mut w = word.clone();
                w.push(e);
                language.insert(w.clone());
                next.push((w, t));
            }
        }
        frontier = next;
    }
    language
}

// ---------------------------------------------------------------------------
// explicit product and isomorphism (for the flatten/compose commutation)
// ---------------------------------------------------------------------------

/// Synchronous product of two explicit automata over their shared events.
pub fn explicit_product(a: &ExplicitAutomaton, b: &ExplicitAutomaton) -> ExplicitAutomaton {
    use bricklayer::explicit::StateMeta;
    let alphabet: BTreeSet<Event> = a.alphabet.union(&b.alphabet).copied().collect();
    let mut out = ExplicitAutomaton::empty();
    out.alphabet = alphabet.clone();
    if a.is_empty() || b.is_empty() {
        return out;
    }
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut keys = vec![(0u32, 0u32)];
    index.insert((0, 0), 0);
    let mut queue = VecDeque::from([0u32]);
    let mut transitions: Vec<Vec<(Event, StateId)>> = vec![Vec::new()];
    while let Some(s) = queue.pop_front() {
        let (sa, sb) = keys[s as usize];
        let mut row = Vec::new();
        for &e in &alphabet {
            let (in_a, in_b) = (a.alphabet.contains(&e), b.alphabet.contains(&e));
            let ta = if in_a { a.successor(sa, e) } else { Some(sa) };
            let tb = if in_b { b.successor(sb, e) } else { Some(sb) };
            if let (Some(ta), Some(tb)) = (ta, tb) {
                let key = (ta, tb);
                let id = *index.entry(key).or_insert_with(|| {
                    keys.push(key);
                    transitions.push(Vec::new());
                    queue.push_back(keys.len() as u32 - 1);
                    keys.len() as u32 - 1
                });
                row.push((e, id));
            }
        }
        transitions[s as usize] = row;
    }
    out.meta = keys
        .iter()
        .map(|&(x, y)| StateMeta {
            locations: vec![x, y].into_boxed_slice(),
            valuation: None,
        })
        .collect();
    out.marked = keys
        .iter()
        .map(|&(x, y)| a.marked[x as usize] && b.marked[y as usize])
        .collect();
    out.transitions = transitions;
    out
}

/// Reachable-part isomorphism of two deterministic automata.
pub fn isomorphic(a: &ExplicitAutomaton, b: &ExplicitAutomaton) -> bool {
    if a.is_empty() != b.is_empty() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    let mut paired: HashMap<StateId, StateId> = HashMap::new();
    let mut queue = VecDeque::from([(0u32, 0u32)]);
    paired.insert(0, 0);
    while let Some((sa, sb)) = queue.pop_front() {
        if a.marked[sa as usize] != b.marked[sb as usize] {
            return false;
        }
        let ea: Vec<Event> = a.enabled_events(sa).collect();
        let eb: Vec<Event> = b.enabled_events(sb).collect();
        if ea != eb {
            return false;
        }
        for e in ea {
            let (ta, tb) = (a.successor(sa, e).unwrap(), b.successor(sb, e).unwrap());
            match paired.get(&ta) {
                Some(&prev) if prev != tb => return false,
                Some(_) => {}
                None => {
                    paired.insert(ta, tb);
                    queue.push_back((ta, tb));
                }
            }
        }
    }
    paired.len() == a.n_states() && paired.len() == b.n_states()
}

// ---------------------------------------------------------------------------
// trace audits
// ---------------------------------------------------------------------------

pub struct Audit {
    pub final_heights: Heights,
    pub final_positions: Vec<Cell>,
    /// Supervisor state per robot after replaying its observed events.
    pub final_states: Vec<StateId>,
}

/// Replays a trace against replicated supervisors and the independent
/// placement rules: every executed event must be accepted, every grant must
/// have had unanimous permission, every placement must be legal, and a
/// completed run must end on target with everyone outside.
pub fn audit_trace(spec: &StructureSpec, template: &Supervisor, n: u8, trace: &Trace) -> Audit {
    let sups: Vec<Supervisor> = (1..=n)
        .map(|j| bricklayer::replicate(template, j))
        .collect();
    let mut states: Vec<StateId> = vec![0; n as usize];
    let mut positions = vec![Cell::OUTSIDE; n as usize];
    let mut loaded = vec![false; n as usize];
    let mut heights: Heights = Heights::new();
    let mut total = 0i64;

    for line in &trace.events {
        let robot = line.robot as usize - 1;
        match line.cause {
            Cause::Executed => match line.event {
                Event::Local { kind, .. } => {
                    let next = sups[robot]
                        .automaton
                        .successor(states[robot], line.event)
                        .unwrap_or_else(|| panic!("rejected local event {}", line.event));
                    states[robot] = next;
                    match kind {
                        LocalKind::East => positions[robot].x += 1,
                        LocalKind::West => positions[robot].x -= 1,
                        LocalKind::South => positions[robot].y += 1,
                        LocalKind::North => positions[robot].y -= 1,
                        LocalKind::In(c) => positions[robot] = c,
                        LocalKind::Out => positions[robot] = Cell::OUTSIDE,
                        LocalKind::Pick => {
                            // picks and own unloads strictly alternate
                            assert!(!loaded[robot], "double pick by robot {}", robot + 1);
                            loaded[robot] = true;
                        }
                    }
                }
                Event::Unload { cell, owner } => {
                    assert_eq!(owner, Owner::Robot(line.robot));
                    assert!(loaded[robot], "unload while empty by robot {}", robot + 1);
                    loaded[robot] = false;
                    assert!(
                        placement_allowed(spec, &heights, cell),
                        "illegal placement {} onto {heights:?}",
                        line.event
                    );
                    // permission soundness: everyone else enabled tau[o]
                    for (j, sup) in sups.iter().enumerate() {
                        let event = if j == robot {
                            line.event
                        } else {
                            Event::unload_other(cell)
                        };
                        let next = sup
                            .automaton
                            .successor(states[j], event)
                            .unwrap_or_else(|| panic!("robot {} rejected {}", j + 1, line.event));
                        states[j] = next;
                    }
                    *heights.entry(cell).or_insert(0) += 1;
                    total += 1;
                    let new_total: i64 = heights.values().map(|&h| h as i64).sum();
                    assert_eq!(new_total, total, "monotone brick count");
                }
            },
            Cause::Denied => {
                // every refuser's supervisor must indeed lack the permission
                let cell = line.event.cell().expect("denied events are unloads");
                assert!(!line.denied_by.is_empty());
                for &j in &line.denied_by {
                    assert!(
                        sups[j as usize - 1]
                            .automaton
                            .successor(states[j as usize - 1], Event::unload_other(cell))
                            .is_none(),
                        "robot {j} reported as refusing but permits {}",
                        line.event
                    );
                }
            }
            Cause::CollisionBlocked => {}
        }
    }

    if trace.outcome == Outcome::Completed {
        for (j, sup) in sups.iter().enumerate() {
            assert!(
                sup.automaton.marked[states[j] as usize],
                "robot {} not marked at completion",
                j + 1
            );
            assert!(positions[j].is_outside(), "robot {} still inside", j + 1);
        }
        for cell in spec.task_cells() {
            assert_eq!(
                height_at(&heights, cell.x as i16, cell.y as i16) as u32,
                spec.target(cell),
                "final height at {cell}"
            );
        }
    }
    Audit {
        final_heights: heights,
        final_positions: positions,
        final_states: states,
    }
}

// ---------------------------------------------------------------------------
// seeded random model generators (no proptest shrinkage needed)
// ---------------------------------------------------------------------------

pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u64(&mut self) -> u64 {
        // Numerical Recipes LCG; fine for test-case generation
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0 >> 11
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n.max(1) as u64) as usize
    }

    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.next_u64() % den < num
    }
}

/// A random deterministic extended automaton: at most one transition per
/// (location, event), random comparison guards, random single assignments.
pub fn random_efa(
    rng: &mut Lcg,
    name: &str,
    table: &std::sync::Arc<bricklayer::VariableTable>,
    var_choices: &[usize],
    n_locs: usize,
    events: &[Event],
) -> ExtendedAutomaton {
    use bricklayer::guard::Assign;
    let mut efa = ExtendedAutomaton::new(name, std::sync::Arc::clone(table));
    for i in 0..n_locs {
        let marked = rng.chance(1, 2);
        efa.add_location(&i.to_string(), marked);
    }
    efa.initial = 0;
    let n_vars = var_choices.len();
    for loc in 0..n_locs {
        for &event in events {
            if !rng.chance(3, 5) {
                continue;
            }
            let guard = if n_vars == 0 || rng.chance(1, 3) {
                GuardExpr::True
            } else {
                let var = var_choices[rng.below(n_vars)];
                let def = table.def(var);
                let c = def.lo + rng.below((def.hi - def.lo + 1) as usize) as i32;
                let op = [Cmp::Eq, Cmp::Ne, Cmp::Lt, Cmp::Le, Cmp::Gt, Cmp::Ge][rng.below(6)];
                GuardExpr::cmp(Operand::var(var), op, Operand::constant(c))
            };
            let actions = if n_vars == 0 || rng.chance(1, 2) {
                ActionList::empty()
            } else {
                let var = var_choices[rng.below(n_vars)];
                if rng.chance(1, 2) {
                    let delta = if rng.chance(1, 2) { 1 } else { -1 };
                    ActionList::new(vec![Assign::increment(var, delta)])
                } else {
                    let def = table.def(var);
                    let c = def.lo + rng.below((def.hi - def.lo + 1) as usize) as i32;
                    ActionList::new(vec![Assign::set_const(var, c)])
                }
            };
            let to = rng.below(n_locs);
            efa.add_transition(loc, event, guard, actions, to).unwrap();
        }
    }
    efa
}

pub fn event_pool(n: usize) -> Vec<Event> {
    let kinds = [
        Event::local(1, LocalKind::East),
        Event::local(1, LocalKind::West),
        Event::local(1, LocalKind::North),
        Event::local(1, LocalKind::South),
        Event::local(1, LocalKind::Pick),
        Event::local(2, LocalKind::East),
        Event::local(2, LocalKind::Pick),
        Event::unload_own(1, Cell::new(1, 1)),
        Event::unload_other(Cell::new(1, 1)),
        Event::unload_own(1, Cell::new(2, 1)),
    ];
    kinds[..n.min(kinds.len())].to_vec()
}

/// Valuation helper for assertions on flattened states.
pub fn heights_of(valuation: &Valuation, ids: &[usize]) -> Vec<i32> {
    ids.iter().map(|&id| valuation.get(id)).collect()
}
