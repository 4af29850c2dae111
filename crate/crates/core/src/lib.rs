//! Supervisory-control synthesis and simulation for decentralized
//! multi-robot brick construction.
//!
//! From a target structure and a generic robot model, the crate builds
//! extended automata for the structure and one robot, synthesizes a
//! reactive supervisor that is trim, task-observer and totally reciprocal,
//! replicates it across a fleet, verifies the joint behavior is nonblocking
//! at desk scale, and simulates the decentralized construction under the
//! broadcast permission protocol.

pub mod efa;
pub mod error;
pub mod event;
pub mod explicit;
pub mod guard;
pub mod replication;
pub mod robot;
pub mod simulator;
pub mod structure;
pub mod synthesis;
pub mod textfmt;
pub mod vars;
pub mod verification;

pub use efa::{compose, compose_with_cap, ExtendedAutomaton, DEFAULT_STATE_CAP};
pub use error::{Error, Result};
pub use event::{Cell, Event, LocalKind, Owner};
pub use explicit::{flatten, flatten_with_cap, ExplicitAutomaton, StateId};
pub use guard::{apply_actions, eval_guard, ActionList, Assign, Cmp, GuardExpr, Operand};
pub use replication::{refine, replicate, RobotSet};
pub use simulator::{Outcome, Policy, Script, Simulation, SimulationConfig, Trace};
pub use structure::{
    build_structure_automaton, parse_structure, ModelVars, NeighborTable, StructureSpec,
};
pub use synthesis::{
    build_plant, check_task_observer, check_totally_reciprocal, compute_macrostates,
    enabled_task_events, synthesize, Certificate, Macrostate, PlantAutomaton, RepairMode,
    Supervisor, SynthesisOptions, Synthesized,
};
pub use vars::{Valuation, VarId, VariableTable};
pub use verification::{
    check_joint_invariants, joint, verify_fleet, JointAutomaton, RefinedComponent, VerifyOutcome,
    VerifyReport,
};
