//! Target structures: the grid, target heights, entry/exit cells, and the
//! structure automaton whose states are the feasible intermediate structures.
//!
//! A brick can be added on a cell only when (a) some neighboring cell is at
//! the same height, (b) the cell is not strictly below both neighbors on
//! either axis (no one-brick-wide trenches, with everything beyond the grid
//! at height zero), and (c) the cell has not reached its target height.
//! Conditions (a) and (b) live in the height-update automaton as expanded
//! guards; condition (c) comes from the per-cell marking automata.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::efa::{compose_with_cap, ExtendedAutomaton, DEFAULT_STATE_CAP};
use crate::error::{Error, Result};
use crate::event::{Cell, Event};
use crate::explicit::{flatten_with_cap, ExplicitAutomaton};
use crate::guard::{ActionList, Assign, Cmp, GuardExpr, Operand};
use crate::vars::{VarId, VariableTable};

const MAX_GRID: u8 = 50;
const MAX_TARGET: u32 = 9;

/// A target structure: grid dimensions, per-cell target heights, and the
/// entry/exit cells. Cells are addressed `(x, y)` with `x` the column and
/// `y` the row; both increase from 1, and `(0,0)` is the outside region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureSpec {
    pub width: u8,
    pub height: u8,
    /// Row-major targets, row `y = 1` first.
    pub targets: Vec<u32>,
    pub io: BTreeSet<Cell>,
}

impl StructureSpec {
    pub fn new(width: u8, height: u8, targets: Vec<u32>, io: BTreeSet<Cell>) -> Result<Self> {
        let spec = StructureSpec {
            width,
            height,
            targets,
            io,
        };
        spec.validate(0)?;
        Ok(spec)
    }

    fn validate(&self, line: usize) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.width > MAX_GRID || self.height > MAX_GRID {
            return Err(Error::parse(
                line,
                format!("grid dimensions must be in 1..={MAX_GRID}"),
            ));
        }
        if self.targets.len() != self.width as usize * self.height as usize {
            return Err(Error::parse(line, "height grid does not match dimensions"));
        }
        if let Some(t) = self.targets.iter().find(|&&t| t > MAX_TARGET) {
            return Err(Error::parse(
                line,
                format!("target height {t} above the supported maximum {MAX_TARGET}"),
            ));
        }
        if self.io.is_empty() {
            return Err(Error::parse(line, "io set must not be empty"));
        }
        for c in &self.io {
            if !self.in_domain(*c) {
                return Err(Error::parse(line, format!("io cell {c} outside domain")));
            }
        }
        Ok(())
    }

    pub fn in_domain(&self, cell: Cell) -> bool {
        cell.x >= 1 && cell.x <= self.width && cell.y >= 1 && cell.y <= self.height
    }

    /// Target height of an in-domain cell.
    pub fn target(&self, cell: Cell) -> u32 {
        debug_assert!(self.in_domain(cell));
        self.targets[(cell.y as usize - 1) * self.width as usize + (cell.x as usize - 1)]
    }

    /// All grid cells in row-major order (row y = 1 first).
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let (w, h) = (self.width, self.height);
        (1..=h).flat_map(move |y| (1..=w).map(move |x| Cell::new(x, y)))
    }

    /// Cells with a target of at least one brick: the only cells that carry
    /// unload events. Ordered row-major, the canonical structure-key order.
    pub fn task_cells(&self) -> Vec<Cell> {
        self.cells().filter(|&c| self.target(c) > 0).collect()
    }

    /// True when no cell needs a brick; the task is trivially complete.
    pub fn is_trivial(&self) -> bool {
        self.targets.iter().all(|&t| t == 0)
    }

    pub fn total_bricks(&self) -> u32 {
        self.targets.iter().sum()
    }
}

/// Per-cell neighbor lists. In-domain cells at Manhattan distance one are
/// neighbors; the outside region `(0,0)` neighbors exactly the io cells.
#[derive(Debug, Clone)]
pub struct NeighborTable {
    width: u8,
    height: u8,
    io: BTreeSet<Cell>,
}

impl NeighborTable {
    pub fn new(spec: &StructureSpec) -> Self {
        NeighborTable {
            width: spec.width,
            height: spec.height,
            io: spec.io.clone(),
        }
    }

    pub fn neighbors(&self, cell: Cell) -> Vec<Cell> {
        if cell.is_outside() {
            return self.io.iter().copied().collect();
        }
        let mut out = Vec::with_capacity(5);
        let (x, y) = (cell.x as i16, cell.y as i16);
        for (nx, ny) in [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)] {
            if nx >= 1 && nx <= self.width as i16 && ny >= 1 && ny <= self.height as i16 {
                out.push(Cell::new(nx as u8, ny as u8));
            }
        }
        if self.io.contains(&cell) {
            out.push(Cell::OUTSIDE);
        }
        out
    }
}

/// Parses the structure file format:
///
/// ```text
/// grid <n_x> <n_y>
/// io <x>,<y> <x>,<y> ...
/// heights
/// <n_y rows of n_x targets, row y = 1 first>
/// ```
///
/// `#` starts a comment.
pub fn parse_structure(text: &str) -> Result<StructureSpec> {
    let mut grid: Option<(u8, u8)> = None;
    let mut io: Option<BTreeSet<Cell>> = None;
    let mut rows: Vec<Vec<u32>> = Vec::new();
    let mut in_heights = false;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if !in_heights {
            if let Some(rest) = line.strip_prefix("grid ") {
                let mut it = rest.split_whitespace();
                let w: u8 = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::parse(lineno, "bad grid width"))?;
                let h: u8 = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::parse(lineno, "bad grid height"))?;
                if it.next().is_some() {
                    return Err(Error::parse(lineno, "trailing tokens after grid line"));
                }
                grid = Some((w, h));
            } else if let Some(rest) = line.strip_prefix("io ") {
                let mut set = BTreeSet::new();
                for tok in rest.split_whitespace() {
                    let (x, y) = tok
                        .split_once(',')
                        .ok_or_else(|| Error::parse(lineno, format!("bad io cell `{tok}`")))?;
                    let cell = Cell::new(
                        x.parse()
                            .map_err(|_| Error::parse(lineno, format!("bad io cell `{tok}`")))?,
                        y.parse()
                            .map_err(|_| Error::parse(lineno, format!("bad io cell `{tok}`")))?,
                    );
                    set.insert(cell);
                }
                io = Some(set);
            } else if line == "heights" {
                in_heights = true;
            } else {
                return Err(Error::parse(lineno, format!("unexpected line `{line}`")));
            }
        } else {
            let row: Vec<u32> = line
                .split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|_| Error::parse(lineno, format!("bad height `{t}`")))
                })
                .collect::<Result<_>>()?;
            if let Some((w, _)) = grid {
                if row.len() != w as usize {
                    return Err(Error::parse(
                        lineno,
                        format!("expected {w} heights per row, found {}", row.len()),
                    ));
                }
            }
            rows.push(row);
        }
    }

    let (w, h) = grid.ok_or_else(|| Error::parse(last_line, "missing grid line"))?;
    let io = io.ok_or_else(|| Error::parse(last_line, "missing io line"))?;
    if rows.len() != h as usize {
        return Err(Error::parse(
            last_line,
            format!("expected {h} height rows, found {}", rows.len()),
        ));
    }
    let targets: Vec<u32> = rows.into_iter().flatten().collect();
    let spec = StructureSpec {
        width: w,
        height: h,
        targets,
        io,
    };
    spec.validate(last_line)?;
    Ok(spec)
}

/// Variable layout shared by the structure and robot automata of one
/// synthesis instance: one height counter per task cell (row-major, the
/// canonical structure-key order), then the robot's position coordinates.
#[derive(Debug, Clone)]
pub struct ModelVars {
    pub table: Arc<VariableTable>,
    heights: Vec<(Cell, VarId)>,
    pub robot_x: VarId,
    pub robot_y: VarId,
}

impl ModelVars {
    pub fn new(spec: &StructureSpec, robot: u8) -> Self {
        let mut table = VariableTable::new();
        let mut heights = Vec::new();
        for cell in spec.task_cells() {
            let id = table
                .add(
                    &format!("h({},{})", cell.x, cell.y),
                    0,
                    spec.target(cell) as i32,
                    0,
                )
                .expect("unique height variable");
            heights.push((cell, id));
        }
        let robot_x = table
            .add(&format!("x^{robot}"), 0, spec.width as i32, 0)
            .expect("unique position variable");
        let robot_y = table
            .add(&format!("y^{robot}"), 0, spec.height as i32, 0)
            .expect("unique position variable");
        ModelVars {
            table: Arc::new(table),
            heights,
            robot_x,
            robot_y,
        }
    }

    pub fn height_var(&self, cell: Cell) -> Option<VarId> {
        self.heights
            .iter()
            .find(|(c, _)| *c == cell)
            .map(|(_, id)| *id)
    }

    /// Height of arbitrary coordinates as a guard operand: a variable for
    /// task cells, the constant 0 for zero-target cells, the outside region,
    /// and anything beyond the grid.
    pub fn height_operand(&self, x: i16, y: i16) -> Operand {
        if x >= 1 && y >= 1 && x <= u8::MAX as i16 && y <= u8::MAX as i16 {
            if let Some(id) = self.height_var(Cell::new(x as u8, y as u8)) {
                return Operand::var(id);
            }
        }
        Operand::constant(0)
    }

    /// Height variable ids in canonical (row-major cell) order.
    pub fn height_ids(&self) -> Vec<VarId> {
        self.heights.iter().map(|(_, id)| *id).collect()
    }

    pub fn height_cells(&self) -> Vec<Cell> {
        self.heights.iter().map(|(c, _)| *c).collect()
    }
}

/// Guard (a): some neighboring cell is at the same height as `cell`.
pub fn guard_level_neighbor(spec: &StructureSpec, vars: &ModelVars, cell: Cell) -> GuardExpr {
    let neighbors = NeighborTable::new(spec).neighbors(cell);
    let own = vars.height_operand(cell.x as i16, cell.y as i16);
    GuardExpr::any(
        neighbors
            .iter()
            .map(|n| GuardExpr::eq(own, vars.height_operand(n.x as i16, n.y as i16)))
            .collect(),
    )
}

/// Guard (b): `cell` is not strictly below both of its east/west neighbors,
/// nor both of its north/south neighbors. Coordinates beyond the grid count
/// as height zero, so a trench can never form across the boundary.
pub fn guard_no_trench(vars: &ModelVars, cell: Cell) -> GuardExpr {
    let (x, y) = (cell.x as i16, cell.y as i16);
    let own = vars.height_operand(x, y);
    let below = |nx, ny| GuardExpr::cmp(own, Cmp::Lt, vars.height_operand(nx, ny));
    GuardExpr::all(vec![
        GuardExpr::not(GuardExpr::all(vec![below(x - 1, y), below(x + 1, y)])),
        GuardExpr::not(GuardExpr::all(vec![below(x, y - 1), below(x, y + 1)])),
    ])
}

/// The height-update automaton: a single marked location with, per task
/// cell, one own-unload and one other-unload self-loop guarded by the
/// placement conditions (a) and (b), incrementing the cell's height.
pub fn build_height_updates(
    spec: &StructureSpec,
    vars: &ModelVars,
    robot: u8,
) -> ExtendedAutomaton {
    let mut efa = ExtendedAutomaton::new("heights", Arc::clone(&vars.table));
    let loc = efa.add_location("0", true);
    for cell in spec.task_cells() {
        let guard = GuardExpr::all(vec![
            guard_level_neighbor(spec, vars, cell),
            guard_no_trench(vars, cell),
        ]);
        let h = vars.height_var(cell).expect("task cell has a variable");
        let actions = ActionList::new(vec![Assign::increment(h, 1)]);
        for event in [Event::unload_own(robot, cell), Event::unload_other(cell)] {
            efa.add_transition(loc, event, guard.clone(), actions.clone(), loc)
                .expect("validated variables");
        }
    }
    efa
}

/// The target-marking automaton: the synchronous product over task cells of
/// two-location templates. A cell's template self-loops while the height is
/// below target minus one, steps to its marked location on the brick that
/// reaches the target, and then blocks further unloads at that cell.
pub fn build_target_marking(
    spec: &StructureSpec,
    vars: &ModelVars,
    robot: u8,
    cap: usize,
) -> Result<ExtendedAutomaton> {
    let cells = spec.task_cells();
    if cells.is_empty() {
        let mut efa = ExtendedAutomaton::new("targets", Arc::clone(&vars.table));
        efa.add_location("0", true);
        return Ok(efa);
    }
    let mut templates = Vec::with_capacity(cells.len());
    for cell in cells {
        let mut efa = ExtendedAutomaton::new(
            &format!("target({},{})", cell.x, cell.y),
            Arc::clone(&vars.table),
        );
        let filling = efa.add_location("filling", false);
        let full = efa.add_location("full", true);
        let h = Operand::var(vars.height_var(cell).expect("task cell"));
        let target = spec.target(cell) as i32;
        let below = GuardExpr::cmp(h, Cmp::Lt, Operand::constant(target - 1));
        let last = GuardExpr::cmp(h, Cmp::Eq, Operand::constant(target - 1));
        for event in [Event::unload_own(robot, cell), Event::unload_other(cell)] {
            efa.add_transition(filling, event, below.clone(), ActionList::empty(), filling)?;
            efa.add_transition(filling, event, last.clone(), ActionList::empty(), full)?;
        }
        templates.push(efa);
    }
    let refs: Vec<&ExtendedAutomaton> = templates.iter().collect();
    let mut composed = compose_with_cap(&refs, cap)?;
    composed.name = "targets".into();
    Ok(composed)
}

/// The trimmed structure automaton: every state is a feasible intermediate
/// structure, the unique marked state is the completed target, and each
/// placement edge carries both the own and the other unload event.
pub fn build_structure_automaton(spec: &StructureSpec, robot: u8) -> Result<ExplicitAutomaton> {
    build_structure_automaton_with_cap(spec, robot, DEFAULT_STATE_CAP)
}

pub fn build_structure_automaton_with_cap(
    spec: &StructureSpec,
    robot: u8,
    cap: usize,
) -> Result<ExplicitAutomaton> {
    let vars = ModelVars::new(spec, robot);
    let g1 = build_height_updates(spec, &vars, robot);
    let g2 = build_target_marking(spec, &vars, robot, cap)?;
    let composed = compose_with_cap(&[&g1, &g2], cap)?;
    let flat = flatten_with_cap(&composed, cap)?;
    let trimmed = flat.trim();
    if trimmed.is_empty() {
        return Err(Error::UnreachableTarget);
    }
    Ok(trimmed)
}
