//! Python bindings: parse structures, synthesize and inspect supervisors,
//! verify the joint behavior, and run simulations in-process.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use bricklayer::replication::{replicate, RobotSet};
use bricklayer::simulator::{run, Policy, Script, SimulationConfig};
use bricklayer::synthesis::{synthesize, Synthesized};
use bricklayer::textfmt;
use bricklayer::verification::{verify_fleet, VerifyOutcome};
use bricklayer::{Cell, Outcome};

fn to_py_err(e: bricklayer::Error) -> PyErr {
    match e {
        bricklayer::Error::Parse { .. } | bricklayer::Error::InvalidArgument(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// A target structure: grid size, per-cell target heights, entry/exit cells.
#[pyclass(frozen)]
struct Structure {
    inner: bricklayer::StructureSpec,
}

#[pymethods]
impl Structure {
    /// Parses the `grid/io/heights` text format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Structure {
            inner: bricklayer::parse_structure(text).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PyValueError::new_err(format!("{path}: {e}")))?;
        Self::parse(&text)
    }

    #[getter]
    fn width(&self) -> u8 {
        self.inner.width
    }

    #[getter]
    fn height(&self) -> u8 {
        self.inner.height
    }

    #[getter]
    fn io(&self) -> Vec<(u8, u8)> {
        self.inner.io.iter().map(|c| (c.x, c.y)).collect()
    }

    fn target(&self, x: u8, y: u8) -> PyResult<u32> {
        let cell = Cell::new(x, y);
        if !self.inner.in_domain(cell) {
            return Err(PyValueError::new_err(format!("({x},{y}) outside domain")));
        }
        Ok(self.inner.target(cell))
    }

    /// Cells that receive at least one brick, row-major.
    fn task_cells(&self) -> Vec<(u8, u8)> {
        self.inner.task_cells().iter().map(|c| (c.x, c.y)).collect()
    }

    /// The trimmed structure automaton in the line-oriented text format.
    fn structure_automaton(&self) -> PyResult<String> {
        let automaton = bricklayer::build_structure_automaton(&self.inner, 1).map_err(to_py_err)?;
        Ok(textfmt::serialize_automaton(&automaton))
    }

    fn __repr__(&self) -> String {
        format!(
            "Structure({}x{}, {} bricks, {} io cells)",
            self.inner.width,
            self.inner.height,
            self.inner.total_bricks(),
            self.inner.io.len()
        )
    }
}

/// A synthesized supervisor for one robot.
#[pyclass(frozen, name = "Supervisor")]
struct PySupervisor {
    inner: bricklayer::Supervisor,
}

#[pymethods]
impl PySupervisor {
    #[getter]
    fn robot(&self) -> u8 {
        self.inner.robot
    }

    #[getter]
    fn states(&self) -> usize {
        self.inner.automaton.n_states()
    }

    #[getter]
    fn transitions(&self) -> usize {
        self.inner.automaton.n_transitions()
    }

    #[getter]
    fn certificate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        d.set_item("trim", self.inner.certificate.trim)?;
        d.set_item("task_observer", self.inner.certificate.task_observer)?;
        d.set_item(
            "totally_reciprocal",
            self.inner.certificate.totally_reciprocal,
        )?;
        Ok(d)
    }

    /// Events enabled at a supervisor state, as their text spellings.
    fn enabled_events(&self, state: u32) -> PyResult<Vec<String>> {
        if state as usize >= self.inner.automaton.n_states() {
            return Err(PyValueError::new_err("state out of range"));
        }
        Ok(self
            .inner
            .automaton
            .enabled_events(state)
            .map(|e| e.to_string())
            .collect())
    }

    /// An isomorphic copy for another robot index.
    fn replicate(&self, robot: u8) -> PySupervisor {
        PySupervisor {
            inner: replicate(&self.inner, robot),
        }
    }

    /// The supervisor file format, with the certificate footer.
    fn serialize(&self) -> String {
        textfmt::serialize_supervisor(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Supervisor(robot={}, states={}, transitions={})",
            self.inner.robot,
            self.inner.automaton.n_states(),
            self.inner.automaton.n_transitions()
        )
    }
}

/// Synthesizes the supervisor for one robot; `None` when no supervisor
/// exists for the structure.
#[pyfunction]
#[pyo3(signature = (structure, robot=1))]
fn synthesize_supervisor(structure: &Structure, robot: u8) -> PyResult<Option<PySupervisor>> {
    match synthesize(&structure.inner, robot).map_err(to_py_err)? {
        Synthesized::Empty => Ok(None),
        Synthesized::Supervisor(s) => Ok(Some(PySupervisor { inner: *s })),
    }
}

/// Builds the joint behavior of `robots` replicated supervisors and checks
/// it is nonblocking. Returns a dict with `nonblocking`, `states`,
/// `transitions` and an optional `witness` event list.
#[pyfunction]
fn verify<'py>(py: Python<'py>, structure: &Structure, robots: u8) -> PyResult<Bound<'py, PyDict>> {
    match verify_fleet(&structure.inner, robots).map_err(to_py_err)? {
        VerifyOutcome::NoSupervisor => Err(PyRuntimeError::new_err("no supervisor exists")),
        VerifyOutcome::Report(report) => {
            let d = PyDict::new(py);
            d.set_item("nonblocking", report.nonblocking)?;
            d.set_item("states", report.states)?;
            d.set_item("transitions", report.transitions)?;
            d.set_item(
                "witness",
                report
                    .witness
                    .map(|w| w.iter().map(|e| e.to_string()).collect::<Vec<_>>()),
            )?;
            Ok(d)
        }
    }
}

/// Runs a seeded simulation. `script` is the optional scripted policy text;
/// without it every robot draws uniformly from its enabled actions.
#[pyfunction]
#[pyo3(signature = (structure, robots, seed, max_steps=10_000, script=None))]
fn simulate<'py>(
    py: Python<'py>,
    structure: &Structure,
    robots: u8,
    seed: u64,
    max_steps: u64,
    script: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut config = SimulationConfig::new(robots, seed);
    config.max_steps = max_steps;
    if let Some(text) = script {
        config.policy = Policy::Scripted(Script::parse(text).map_err(to_py_err)?);
    }
    let trace = run(&structure.inner, &config).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item(
        "outcome",
        match trace.outcome {
            Outcome::Completed => "completed",
            Outcome::StepLimit => "step_limit",
            Outcome::Stuck => "stuck",
        },
    )?;
    d.set_item("steps", trace.steps)?;
    d.set_item("trace", trace.to_text())?;
    Ok(d)
}

/// Refines a supervisor for a fleet and serializes the result.
#[pyfunction]
fn refine_text(supervisor: &PySupervisor, robots: u8) -> String {
    let refined = bricklayer::refine(&supervisor.inner, RobotSet::new(robots));
    textfmt::serialize_automaton(&refined)
}

#[pymodule]
fn bricklayer_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Structure>()?;
    m.add_class::<PySupervisor>()?;
    m.add_function(wrap_pyfunction!(synthesize_supervisor, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(refine_text, m)?)?;
    Ok(())
}
