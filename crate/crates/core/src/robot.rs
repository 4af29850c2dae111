//! The generic construction robot: navigation and loading, carrying
//! capacity, climbing limits, and equal-height placement, composed into one
//! extended automaton over the shared height and position variables.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::efa::{compose_with_cap, ExtendedAutomaton, DEFAULT_STATE_CAP};
use crate::error::Result;
use crate::event::{Event, LocalKind};
use crate::guard::{ActionList, Assign, Cmp, GuardExpr, Operand};
use crate::structure::{ModelVars, NeighborTable, StructureSpec};

/// Event sets of one robot: its local actions, its own unloads, and the
/// anonymous other-robot unloads it observes.
#[derive(Debug, Clone)]
pub struct RobotAlphabet {
    pub robot: u8,
    pub locals: BTreeSet<Event>,
    pub own_unloads: BTreeSet<Event>,
    pub other_unloads: BTreeSet<Event>,
}

impl RobotAlphabet {
    pub fn new(spec: &StructureSpec, robot: u8) -> Self {
        let mut locals: BTreeSet<Event> = [
            LocalKind::East,
            LocalKind::West,
            LocalKind::North,
            LocalKind::South,
            LocalKind::Pick,
            LocalKind::Out,
        ]
        .into_iter()
        .map(|k| Event::local(robot, k))
        .collect();
        for &io in &spec.io {
            locals.insert(Event::local(robot, LocalKind::In(io)));
        }
        let own_unloads = spec
            .task_cells()
            .into_iter()
            .map(|c| Event::unload_own(robot, c))
            .collect();
        let other_unloads = spec
            .task_cells()
            .into_iter()
            .map(Event::unload_other)
            .collect();
        RobotAlphabet {
            robot,
            locals,
            own_unloads,
            other_unloads,
        }
    }
}

/// Navigation and loading: outside (marked) and inside locations. Picking
/// happens outside; entering sets the position to the chosen io cell;
/// leaving resets it to the outside region; movement steps one cell with
/// the grid-border guards.
pub fn build_navigation(spec: &StructureSpec, vars: &ModelVars, robot: u8) -> ExtendedAutomaton {
    let mut efa = ExtendedAutomaton::new("navigation", Arc::clone(&vars.table));
    let outside = efa.add_location("outside", true);
    let inside = efa.add_location("inside", false);
    let (x, y) = (vars.robot_x, vars.robot_y);

    efa.add_transition(
        outside,
        Event::local(robot, LocalKind::Pick),
        GuardExpr::True,
        ActionList::empty(),
        outside,
    )
    .unwrap();
    for &io in &spec.io {
        efa.add_transition(
            outside,
            Event::local(robot, LocalKind::In(io)),
            GuardExpr::True,
            ActionList::new(vec![
                Assign::set_const(x, io.x as i32),
                Assign::set_const(y, io.y as i32),
            ]),
            inside,
        )
        .unwrap();
    }
    efa.add_transition(
        inside,
        Event::local(robot, LocalKind::Out),
        GuardExpr::True,
        ActionList::new(vec![Assign::set_const(x, 0), Assign::set_const(y, 0)]),
        outside,
    )
    .unwrap();

    let moves = [
        (LocalKind::East, x, Cmp::Lt, spec.width as i32, 1),
        (LocalKind::West, x, Cmp::Gt, 1, -1),
        (LocalKind::South, y, Cmp::Lt, spec.height as i32, 1),
        (LocalKind::North, y, Cmp::Gt, 1, -1),
    ];
    for (kind, var, cmp, bound, delta) in moves {
        efa.add_transition(
            inside,
            Event::local(robot, kind),
            GuardExpr::cmp(Operand::var(var), cmp, Operand::constant(bound)),
            ActionList::new(vec![Assign::increment(var, delta)]),
            inside,
        )
        .unwrap();
    }
    efa
}

/// Carrying capacity of one brick: unloads alternate with pick-ups,
/// starting with a pick-up. Both locations are marked; the structure and
/// navigation automata decide the final marking.
pub fn build_capacity(spec: &StructureSpec, vars: &ModelVars, robot: u8) -> ExtendedAutomaton {
    let mut efa = ExtendedAutomaton::new("capacity", Arc::clone(&vars.table));
    let unloaded = efa.add_location("unloaded", true);
    let loaded = efa.add_location("loaded", true);
    efa.add_transition(
        unloaded,
        Event::local(robot, LocalKind::Pick),
        GuardExpr::True,
        ActionList::empty(),
        loaded,
    )
    .unwrap();
    for cell in spec.task_cells() {
        efa.add_transition(
            loaded,
            Event::unload_own(robot, cell),
            GuardExpr::True,
            ActionList::empty(),
            unloaded,
        )
        .unwrap();
    }
    efa
}

/// Climbing limits: a single marked location whose self-loops restrict
/// movement to steps of at most one brick, entering to io cells at height
/// at most one, and leaving to io positions at height at most one.
pub fn build_climbing_limits(
    spec: &StructureSpec,
    vars: &ModelVars,
    robot: u8,
) -> ExtendedAutomaton {
    let mut efa = ExtendedAutomaton::new("climbing", Arc::clone(&vars.table));
    let loc = efa.add_location("0", true);
    let (rx, ry) = (vars.robot_x, vars.robot_y);
    let at = |x: i16, y: i16| {
        GuardExpr::all(vec![
            GuardExpr::eq(Operand::var(rx), Operand::constant(x as i32)),
            GuardExpr::eq(Operand::var(ry), Operand::constant(y as i32)),
        ])
    };

    let moves = [
        (LocalKind::East, 1i16, 0i16),
        (LocalKind::West, -1, 0),
        (LocalKind::South, 0, 1),
        (LocalKind::North, 0, -1),
    ];
    for (kind, dx, dy) in moves {
        let mut cases = Vec::new();
        for cell in spec.cells() {
            let (x, y) = (cell.x as i16, cell.y as i16);
            let (tx, ty) = (x + dx, y + dy);
            if tx < 1 || tx > spec.width as i16 || ty < 1 || ty > spec.height as i16 {
                continue;
            }
            cases.push(GuardExpr::all(vec![
                at(x, y),
                GuardExpr::abs_diff_le(vars.height_operand(x, y), vars.height_operand(tx, ty), 1),
            ]));
        }
        efa.add_transition(
            loc,
            Event::local(robot, kind),
            GuardExpr::any(cases),
            ActionList::empty(),
            loc,
        )
        .unwrap();
    }

    for &io in &spec.io {
        let guard = GuardExpr::all(vec![
            at(0, 0),
            GuardExpr::cmp(
                vars.height_operand(io.x as i16, io.y as i16),
                Cmp::Le,
                Operand::constant(1),
            ),
        ]);
        efa.add_transition(
            loc,
            Event::local(robot, LocalKind::In(io)),
            guard,
            ActionList::empty(),
            loc,
        )
        .unwrap();
    }

    let out_cases = spec
        .io
        .iter()
        .map(|io| {
            GuardExpr::all(vec![
                at(io.x as i16, io.y as i16),
                GuardExpr::cmp(
                    vars.height_operand(io.x as i16, io.y as i16),
                    Cmp::Le,
                    Operand::constant(1),
                ),
            ])
        })
        .collect();
    efa.add_transition(
        loc,
        Event::local(robot, LocalKind::Out),
        GuardExpr::any(out_cases),
        ActionList::empty(),
        loc,
    )
    .unwrap();
    efa
}

/// Equal-height placement: the robot can unload on a cell only from a
/// neighboring position at the same height (standing outside counts as
/// height zero for io cells).
pub fn build_placement_level(
    spec: &StructureSpec,
    vars: &ModelVars,
    robot: u8,
) -> ExtendedAutomaton {
    let mut efa = ExtendedAutomaton::new("placement", Arc::clone(&vars.table));
    let loc = efa.add_location("0", true);
    let (rx, ry) = (vars.robot_x, vars.robot_y);
    let neighbors = NeighborTable::new(spec);
    for cell in spec.task_cells() {
        let own = vars.height_operand(cell.x as i16, cell.y as i16);
        let cases = neighbors
            .neighbors(cell)
            .into_iter()
            .map(|pos| {
                GuardExpr::all(vec![
                    GuardExpr::eq(Operand::var(rx), Operand::constant(pos.x as i32)),
                    GuardExpr::eq(Operand::var(ry), Operand::constant(pos.y as i32)),
                    GuardExpr::eq(vars.height_operand(pos.x as i16, pos.y as i16), own),
                ])
            })
            .collect();
        efa.add_transition(
            loc,
            Event::unload_own(robot, cell),
            GuardExpr::any(cases),
            ActionList::empty(),
            loc,
        )
        .unwrap();
    }
    efa
}

/// The full robot: navigation, capacity, climbing and placement composed.
/// Other-robot unloads are deliberately absent; they reach the plant
/// through the structure automaton and never constrain the robot.
pub fn build_robot(spec: &StructureSpec, vars: &ModelVars, robot: u8) -> Result<ExtendedAutomaton> {
    build_robot_with_cap(spec, vars, robot, DEFAULT_STATE_CAP)
}

pub fn build_robot_with_cap(
    spec: &StructureSpec,
    vars: &ModelVars,
    robot: u8,
    cap: usize,
) -> Result<ExtendedAutomaton> {
    let navigation = build_navigation(spec, vars, robot);
    let capacity = build_capacity(spec, vars, robot);
    let climbing = build_climbing_limits(spec, vars, robot);
    let placement = build_placement_level(spec, vars, robot);
    let mut composed = compose_with_cap(&[&navigation, &capacity, &climbing, &placement], cap)?;
    composed.name = format!("robot{robot}");
    Ok(composed)
}
