//! The event alphabet: per-robot local actions and brick-unload events.
//!
//! Unload events come in three spellings. `tau[i](x,y)` is robot i's own
//! unload at cell (x,y). `tau[o](x,y)` stands for "some other robot unloads
//! here" and appears only before refinement. `tau[j=K](x,y)` is the refined
//! form naming the other robot explicitly; in a joint product it denotes the
//! same occurrence as robot K's own `tau[K](x,y)`.

use std::fmt;
use std::str::FromStr;

/// A grid cell. `(0,0)` is the region surrounding the construction site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub x: u8,
    pub y: u8,
}

impl Cell {
    pub const OUTSIDE: Cell = Cell { x: 0, y: 0 };

    pub fn new(x: u8, y: u8) -> Self {
        Cell { x, y }
    }

    pub fn is_outside(&self) -> bool {
        *self == Cell::OUTSIDE
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Movement and loading actions of a single robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LocalKind {
    East,
    West,
    North,
    South,
    Pick,
    Out,
    In(Cell),
}

/// Who performs an unload event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Owner {
    /// The robot's own unload: `tau[i](x,y)`.
    Robot(u8),
    /// Any other robot, before refinement: `tau[o](x,y)`.
    Other,
    /// A named other robot, after refinement: `tau[j=K](x,y)`.
    Indexed(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Event {
    Local { robot: u8, kind: LocalKind },
    Unload { owner: Owner, cell: Cell },
}

impl Event {
    pub fn local(robot: u8, kind: LocalKind) -> Self {
        Event::Local { robot, kind }
    }

    pub fn unload_own(robot: u8, cell: Cell) -> Self {
        Event::Unload {
            owner: Owner::Robot(robot),
            cell,
        }
    }

    pub fn unload_other(cell: Cell) -> Self {
        Event::Unload {
            owner: Owner::Other,
            cell,
        }
    }

    pub fn unload_indexed(robot: u8, cell: Cell) -> Self {
        Event::Unload {
            owner: Owner::Indexed(robot),
            cell,
        }
    }

    pub fn is_task(&self) -> bool {
        matches!(self, Event::Unload { .. })
    }

    pub fn is_local(&self) -> bool {
        matches!(self, Event::Local { .. })
    }

    /// The robot performing this event; `None` for the anonymous `tau[o]`.
    pub fn robot(&self) -> Option<u8> {
        match self {
            Event::Local { robot, .. } => Some(*robot),
            Event::Unload { owner, .. } => match owner {
                Owner::Robot(r) | Owner::Indexed(r) => Some(*r),
                Owner::Other => None,
            },
        }
    }

    pub fn cell(&self) -> Option<Cell> {
        match self {
            Event::Unload { cell, .. } => Some(*cell),
            Event::Local { .. } => None,
        }
    }

    /// Identity used when synchronizing refined supervisors: `tau[K]` and
    /// `tau[j=K]` denote the same occurrence.
    pub fn sync_key(&self) -> Event {
        match self {
            Event::Unload {
                owner: Owner::Indexed(r),
                cell,
            } => Event::unload_own(*r, *cell),
            other => *other,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Local { robot, kind } => {
                write!(f, "loc[{robot}]:")?;
                match kind {
                    LocalKind::East => write!(f, "e"),
                    LocalKind::West => write!(f, "w"),
                    LocalKind::North => write!(f, "n"),
                    LocalKind::South => write!(f, "s"),
                    LocalKind::Pick => write!(f, "p"),
                    LocalKind::Out => write!(f, "out"),
                    LocalKind::In(c) => write!(f, "in({},{})", c.x, c.y),
                }
            }
            Event::Unload { owner, cell } => match owner {
                Owner::Robot(r) => write!(f, "tau[{r}]{cell}"),
                Owner::Other => write!(f, "tau[o]{cell}"),
                Owner::Indexed(r) => write!(f, "tau[j={r}]{cell}"),
            },
        }
    }
}

fn parse_cell(s: &str) -> Option<Cell> {
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    let (x, y) = inner.split_once(',')?;
    Some(Cell::new(x.parse().ok()?, y.parse().ok()?))
}

impl FromStr for Event {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let fail = || format!("malformed event `{s}`");
        if let Some(rest) = s.strip_prefix("loc[") {
            let (robot, kind) = rest.split_once("]:").ok_or_else(fail)?;
            let robot: u8 = robot.parse().map_err(|_| fail())?;
            let kind = match kind {
                "e" => LocalKind::East,
                "w" => LocalKind::West,
                "n" => LocalKind::North,
                "s" => LocalKind::South,
                "p" => LocalKind::Pick,
                "out" => LocalKind::Out,
                _ => {
                    let cell = kind
                        .strip_prefix("in")
                        .and_then(parse_cell)
                        .ok_or_else(fail)?;
                    LocalKind::In(cell)
                }
            };
            Ok(Event::local(robot, kind))
        } else if let Some(rest) = s.strip_prefix("tau[") {
            let (owner, cell) = rest.split_once(']').ok_or_else(fail)?;
            let cell = parse_cell(cell).ok_or_else(fail)?;
            let owner = if owner == "o" {
                Owner::Other
            } else if let Some(idx) = owner.strip_prefix("j=") {
                Owner::Indexed(idx.parse().map_err(|_| fail())?)
            } else {
                Owner::Robot(owner.parse().map_err(|_| fail())?)
            };
            Ok(Event::Unload { owner, cell })
        } else {
            Err(fail())
        }
    }
}
