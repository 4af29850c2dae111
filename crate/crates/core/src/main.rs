//! Command line for the construction toolchain: build structure automata,
//! synthesize supervisors, verify the joint behavior, and simulate runs.
//!
//! Exit codes: 0 success (nonblocking / completed), 2 input error, 3 no
//! supervisor exists, 4 state cap exceeded, 5 blocking joint behavior,
//! 6 step limit, 7 stuck, 8 script error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bricklayer::error::Error;
use bricklayer::simulator::{self, Policy, Script, Simulation, SimulationConfig, Trace};
use bricklayer::structure::{parse_structure, StructureSpec};
use bricklayer::synthesis::{RepairMode, SynthesisOptions, Synthesized};
use bricklayer::textfmt;
use bricklayer::verification::{verify_fleet_with_options, VerifyOutcome};
use bricklayer::{Cell, Outcome};

#[derive(Parser)]
#[command(
    name = "bricklayer",
    version,
    about = "Supervisor synthesis and simulation for multi-robot brick construction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Structure-automaton operations
    Structure {
        #[command(subcommand)]
        action: StructureAction,
    },
    /// Synthesize the reactive supervisor for one robot
    Synth {
        /// Structure file
        file: PathBuf,
        /// Write the supervisor to this file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Robot index the supervisor is synthesized for
        #[arg(long, default_value_t = 1)]
        robot: u8,
        /// Repair grain for the task-observer property
        #[arg(long, value_parser = parse_repair_mode, default_value = "states")]
        repair_mode: RepairMode,
        /// Explicit-state cap
        #[arg(long, default_value_t = bricklayer::DEFAULT_STATE_CAP)]
        state_cap: usize,
    },
    /// Check that the joint behavior of n replicated supervisors is nonblocking
    Verify {
        /// Structure file
        file: PathBuf,
        /// Fleet size
        #[arg(long)]
        robots: u8,
        #[arg(long, default_value_t = bricklayer::DEFAULT_STATE_CAP)]
        state_cap: usize,
    },
    /// Simulate the decentralized construction
    Simulate {
        /// Structure file
        file: PathBuf,
        #[arg(long)]
        robots: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `random` or `script:<file>`
        #[arg(long, default_value = "random")]
        policy: String,
        #[arg(long, default_value_t = 10_000)]
        max_steps: u64,
        /// Also write the trace to this file
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Interleave an ASCII snapshot after each executed event
        #[arg(long)]
        render: bool,
        #[arg(long, default_value_t = bricklayer::DEFAULT_STATE_CAP)]
        state_cap: usize,
    },
    /// Replay a trace file as ASCII snapshots
    Render {
        /// Structure file
        file: PathBuf,
        /// Trace file produced by `simulate`
        #[arg(long)]
        trace: PathBuf,
        /// Fleet size; inferred from the trace when omitted
        #[arg(long)]
        robots: Option<u8>,
    },
}

#[derive(Subcommand)]
enum StructureAction {
    /// Parse a structure file and build its trimmed structure automaton
    Build {
        /// Structure file
        file: PathBuf,
        /// Write the automaton to this file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print state/transition counts only
        #[arg(long)]
        stats: bool,
        #[arg(long, default_value_t = 1)]
        robot: u8,
        #[arg(long, default_value_t = bricklayer::DEFAULT_STATE_CAP)]
        state_cap: usize,
    },
}

fn parse_repair_mode(s: &str) -> Result<RepairMode, String> {
    match s {
        "states" => Ok(RepairMode::RemoveStates),
        "transitions" => Ok(RepairMode::RemoveTransitions),
        other => Err(format!(
            "unknown repair mode `{other}` (states|transitions)"
        )),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::InvalidArgument(_) | Error::Io(_) => 2,
        Error::NoSupervisor | Error::UnreachableTarget => 3,
        Error::StateCap { .. } => 4,
        Error::Script { .. } => 8,
        _ => 1,
    }
}

fn load_structure(path: &Path) -> Result<StructureSpec, Error> {
    let text = fs::read_to_string(path)?;
    parse_structure(&text)
}

fn parse_policy(policy: &str) -> Result<Policy, Error> {
    if policy == "random" {
        Ok(Policy::Random)
    } else if let Some(path) = policy.strip_prefix("script:") {
        let text = fs::read_to_string(path)?;
        Ok(Policy::Scripted(Script::parse(&text)?))
    } else {
        Err(Error::InvalidArgument(format!(
            "unknown policy `{policy}` (random|script:<file>)"
        )))
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Structure {
            action:
                StructureAction::Build {
                    file,
                    out,
                    stats,
                    robot,
                    state_cap,
                },
        } => {
            let spec = load_structure(&file)?;
            let automaton =
                bricklayer::structure::build_structure_automaton_with_cap(&spec, robot, state_cap)?;
            let text = textfmt::serialize_automaton(&automaton);
            if let Some(out) = &out {
                fs::write(out, &text)?;
            }
            if stats {
                println!(
                    "states {} transitions {}",
                    automaton.n_states(),
                    automaton.n_transitions()
                );
            } else if out.is_none() {
                print!("{text}");
            }
            Ok(0)
        }
        Command::Synth {
            file,
            out,
            robot,
            repair_mode,
            state_cap,
        } => {
            let spec = load_structure(&file)?;
            let opts = SynthesisOptions {
                state_cap,
                repair_mode,
                ..Default::default()
            };
            match bricklayer::synthesis::synthesize_with_options(&spec, robot, &opts)? {
                Synthesized::Empty => {
                    eprintln!("no supervisor exists");
                    Ok(3)
                }
                Synthesized::Supervisor(sup) => {
                    let text = textfmt::serialize_supervisor(&sup);
                    match &out {
                        Some(path) => {
                            fs::write(path, &text)?;
                            println!(
                                "supervisor robot={} states={} transitions={}",
                                sup.robot,
                                sup.automaton.n_states(),
                                sup.automaton.n_transitions()
                            );
                        }
                        None => print!("{text}"),
                    }
                    Ok(0)
                }
            }
        }
        Command::Verify {
            file,
            robots,
            state_cap,
        } => {
            let spec = load_structure(&file)?;
            let opts = SynthesisOptions {
                state_cap,
                ..Default::default()
            };
            match verify_fleet_with_options(&spec, robots, &opts)? {
                VerifyOutcome::NoSupervisor => {
                    eprintln!("no supervisor exists");
                    Ok(3)
                }
                VerifyOutcome::Report(report) => {
                    print!("{}", report.to_text());
                    Ok(if report.nonblocking { 0 } else { 5 })
                }
            }
        }
        Command::Simulate {
            file,
            robots,
            seed,
            policy,
            max_steps,
            trace,
            render,
            state_cap,
        } => {
            let spec = load_structure(&file)?;
            let config = SimulationConfig {
                robots,
                seed,
                policy: parse_policy(&policy)?,
                max_steps,
                synthesis: SynthesisOptions {
                    state_cap,
                    ..Default::default()
                },
            };
            let mut sim = Simulation::new(&spec, &config)?;
            let result = sim.run(config.max_steps)?;
            if render {
                print_rendered(&spec, robots, &result)?;
            } else {
                print!("{}", result.to_text());
            }
            if let Some(path) = trace {
                fs::write(path, result.to_text())?;
            }
            Ok(match result.outcome {
                Outcome::Completed => 0,
                Outcome::StepLimit => 6,
                Outcome::Stuck => 7,
            })
        }
        Command::Render {
            file,
            trace,
            robots,
        } => {
            let spec = load_structure(&file)?;
            let text = fs::read_to_string(&trace)?;
            let parsed = Trace::parse(&text)?;
            let n =
                robots.unwrap_or_else(|| parsed.events.iter().map(|e| e.robot).max().unwrap_or(1));
            print_rendered(&spec, n, &parsed)?;
            Ok(0)
        }
    }
}

fn print_rendered(spec: &StructureSpec, n: u8, trace: &Trace) -> Result<(), Error> {
    let initial: Vec<Cell> = vec![Cell::OUTSIDE; n as usize];
    print!(
        "{}",
        simulator::render_grid(
            spec,
            &vec![0; spec.width as usize * spec.height as usize],
            &initial
        )
    );
    simulator::replay_positions(spec, n, trace, |event, heights, positions| {
        print!(
            "step={} robot={} event={} cause={}",
            event.step, event.robot, event.event, event.cause
        );
        if !event.denied_by.is_empty() {
            let ids: Vec<String> = event.denied_by.iter().map(u8::to_string).collect();
            print!(" denied_by={}", ids.join(","));
        }
        println!();
        if event.cause == simulator::Cause::Executed {
            print!("{}", simulator::render_grid(spec, heights, positions));
        }
    })?;
    println!("outcome={} steps={}", trace.outcome, trace.steps);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
