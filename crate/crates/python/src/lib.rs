//! Python bindings: parameters, ground states, single-photon scattering,
//! protocol traces and the collective closed forms.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use lambda_zeno::collective::{self, Horizon};
use lambda_zeno::exact::{self, LossPolicy};
use lambda_zeno::model::spin_expectations;
use lambda_zeno::protocol::{
    self, DriveMode, Engine, InitialState, PhotonEvent, PreludeOutcome, ProtocolSpec,
};
use lambda_zeno::validation::{run_validation, Suite, ValidateOptions};
use lambda_zeno::{MeasurementBasis, PolarizationLabel, ZenoError, C64};

fn to_py(e: ZenoError) -> PyErr {
    match e {
        ZenoError::InvalidParameter(_)
        | ZenoError::InvalidState(_)
        | ZenoError::InvalidSpec(_)
        | ZenoError::ResourceLimit(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = ZenoError>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

#[pyclass(name = "PhysicalParams", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyParams(lambda_zeno::PhysicalParams);

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (n_at, omega0 = 0.0, omega = 0.0, gamma1d = 1.0, gamma = 0.0))]
    fn new(n_at: usize, omega0: f64, omega: f64, gamma1d: f64, gamma: f64) -> PyResult<Self> {
        lambda_zeno::PhysicalParams::new(omega0, omega, gamma1d, gamma, n_at)
            .map(Self)
            .map_err(to_py)
    }

    /// Parameters with `gamma` set so that the collective cooperativity is `c_n`.
    #[staticmethod]
    #[pyo3(signature = (n_at, c_n, omega0 = 0.0, omega = 0.0))]
    fn with_collective_cooperativity(
        n_at: usize,
        c_n: f64,
        omega0: f64,
        omega: f64,
    ) -> PyResult<Self> {
        lambda_zeno::PhysicalParams::with_collective_cooperativity(n_at, c_n, omega0, omega)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn n_at(&self) -> usize {
        self.0.n_at
    }
    #[getter]
    fn omega0(&self) -> f64 {
        self.0.omega0
    }
    #[getter]
    fn omega(&self) -> f64 {
        self.0.omega
    }
    #[getter]
    fn gamma1d(&self) -> f64 {
        self.0.gamma1d
    }
    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma
    }

    fn detuning(&self) -> f64 {
        self.0.detuning()
    }

    fn single_atom_cooperativity(&self) -> f64 {
        self.0.single_atom_cooperativity()
    }

    fn collective_cooperativity(&self) -> f64 {
        self.0.collective_cooperativity()
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        format!(
            "PhysicalParams(n_at={}, omega0={}, omega={}, gamma1d={}, gamma={})",
            p.n_at, p.omega0, p.omega, p.gamma1d, p.gamma
        )
    }
}

/// Pure ground state; bit `j` of the basis index is atom `j`, 0 = |+>, 1 = |->.
#[pyclass(name = "GroundState", frozen, from_py_object)]
#[derive(Clone)]
struct PyGroundState(lambda_zeno::GroundStateVector);

#[pymethods]
impl PyGroundState {
    #[new]
    fn new(n_at: usize, amplitudes: Vec<C64>) -> PyResult<Self> {
        lambda_zeno::GroundStateVector::from_vec(n_at, amplitudes)
            .map(Self)
            .map_err(to_py)
    }

    /// The symmetric state that reflects V photons without change.
    #[staticmethod]
    fn dark(n_at: usize) -> PyResult<Self> {
        lambda_zeno::dark_state(n_at).map(Self).map_err(to_py)
    }

    #[getter]
    fn n_at(&self) -> usize {
        self.0.n_at()
    }

    fn amplitudes(&self) -> Vec<C64> {
        self.0.amplitudes().iter().copied().collect()
    }

    fn norm_sqr(&self) -> f64 {
        self.0.norm_sqr()
    }

    fn normalized(&self) -> PyResult<Self> {
        self.0.normalized().map(Self).map_err(to_py)
    }

    /// `(sx, sy, sz)` of the normalized state.
    fn spin(&self) -> PyResult<(f64, f64, f64)> {
        let s = spin_expectations(&self.0).map_err(to_py)?;
        Ok((s.sx, s.sy, s.sz))
    }
}

#[pyclass(name = "ScatterBranch", frozen, skip_from_py_object)]
struct PyBranch {
    #[pyo3(get)]
    out_pol: String,
    #[pyo3(get)]
    probability: f64,
    /// Unnormalized post-scattering state.
    #[pyo3(get)]
    state: PyGroundState,
}

#[pyclass(name = "ScatterOutcome", frozen, skip_from_py_object)]
struct PyOutcome {
    #[pyo3(get)]
    loss: f64,
    #[pyo3(get)]
    branches: Vec<Py<PyBranch>>,
}

#[pymethods]
impl PyOutcome {
    fn probability(&self, py: Python<'_>, out_pol: &str) -> PyResult<f64> {
        let pol: PolarizationLabel = parse(out_pol)?;
        Ok(self
            .branches
            .iter()
            .map(|b| b.borrow(py))
            .find(|b| b.out_pol == pol.to_string())
            .map_or(0.0, |b| b.probability))
    }

    fn total_reflection(&self, py: Python<'_>) -> f64 {
        self.branches.iter().map(|b| b.borrow(py).probability).sum()
    }
}

/// Scatters one photon of polarization `in_pol` off `state`.
/// `basis` is "hv" or "circular"; it defaults to the basis of `in_pol`.
#[pyfunction]
#[pyo3(signature = (state, params, in_pol, basis = None))]
fn scatter(
    py: Python<'_>,
    state: &PyGroundState,
    params: &PyParams,
    in_pol: &str,
    basis: Option<&str>,
) -> PyResult<PyOutcome> {
    let pol: PolarizationLabel = parse(in_pol)?;
    let basis = match basis {
        Some(b) => parse(b)?,
        None => MeasurementBasis::of(pol),
    };
    let out = exact::scatter(&state.0, pol, basis, &params.0).map_err(to_py)?;
    let branches = out
        .branches
        .iter()
        .map(|b| {
            Py::new(
                py,
                PyBranch {
                    out_pol: b.out_pol.to_string(),
                    probability: b.probability,
                    state: PyGroundState(b.state.clone()),
                },
            )
        })
        .collect::<PyResult<_>>()?;
    Ok(PyOutcome {
        loss: out.loss,
        branches,
    })
}

/// Per-photon trace; entry `j` of every column describes the state after
/// `j` drive steps.
#[pyclass(name = "ProtocolTrace", frozen, skip_from_py_object)]
struct PyTrace {
    #[pyo3(get)]
    n_v: Vec<usize>,
    #[pyo3(get)]
    r_vh: Vec<f64>,
    #[pyo3(get)]
    r_vv: Vec<f64>,
    #[pyo3(get)]
    loss: Vec<f64>,
    #[pyo3(get)]
    n_tot_h: Vec<f64>,
    #[pyo3(get)]
    sx: Vec<f64>,
    #[pyo3(get)]
    sy: Vec<f64>,
    #[pyo3(get)]
    sz: Vec<f64>,
    /// Probability of the kept prelude branch, one entry per prelude photon.
    #[pyo3(get)]
    prelude_probability: Vec<f64>,
}

/// Runs the kick-then-drive protocol. `prelude` is "kick", "unconditioned"
/// or "none"; `drive` is "photons" or "free-rotation".
#[pyfunction]
#[pyo3(signature = (
    params, n_v, field_phase = 0.0, engine = "exact", loss_policy = "discard",
    prelude = "kick", drive = "photons", initial = None
))]
#[allow(clippy::too_many_arguments)]
fn run_protocol(
    params: &PyParams,
    n_v: usize,
    field_phase: f64,
    engine: &str,
    loss_policy: &str,
    prelude: &str,
    drive: &str,
    initial: Option<&PyGroundState>,
) -> PyResult<PyTrace> {
    let engine: Engine = parse(engine)?;
    let loss_policy: LossPolicy = parse(loss_policy)?;
    let drive: DriveMode = parse(drive)?;
    let prelude = match prelude {
        "kick" => vec![PhotonEvent::kick()],
        "unconditioned" => vec![PhotonEvent {
            outcome: PreludeOutcome::Unconditioned,
            ..PhotonEvent::kick()
        }],
        "none" => Vec::new(),
        other => return Err(PyValueError::new_err(format!("unknown prelude '{other}'"))),
    };
    let initial = match initial {
        Some(s) => InitialState::Custom {
            amplitudes: s.0.amplitudes().iter().copied().collect(),
        },
        None => InitialState::Dark,
    };
    let spec = ProtocolSpec {
        params: params.0,
        initial,
        prelude,
        n_v,
        field_phase,
        drive,
        engine,
        loss_policy,
    };
    let trace = protocol::run_protocol(&spec).map_err(to_py)?;
    let col = |f: fn(&protocol::TraceRow) -> f64| trace.rows.iter().map(f).collect();
    Ok(PyTrace {
        n_v: trace.rows.iter().map(|r| r.n_v).collect(),
        r_vh: col(|r| r.r_vh),
        r_vv: col(|r| r.r_vv),
        loss: col(|r| r.loss),
        n_tot_h: col(|r| r.n_tot_h),
        sx: col(|r| r.sx),
        sy: col(|r| r.sy),
        sz: col(|r| r.sz),
        prelude_probability: trace.prelude.iter().map(|p| p.probability).collect(),
    })
}

/// Collective polarizability `(alpha, chi)`.
#[pyfunction]
fn polarizability(params: &PyParams) -> (C64, C64) {
    let s = collective::polarizability(&params.0);
    (s.alpha, s.chi)
}

/// Closed-form cumulative H-photon count after `n_v` V photons, or its
/// limit when `n_v` is omitted.
#[pyfunction]
#[pyo3(signature = (params, n_v = None))]
fn n_tot_h(params: &PyParams, n_v: Option<u64>) -> f64 {
    let horizon = n_v.map_or(Horizon::Infinite, Horizon::Photons);
    collective::n_tot_h_closed_form(horizon, &params.0)
}

/// Runs the named self-check suites (all by default).
/// Returns `(passed, failures)`.
#[pyfunction]
#[pyo3(signature = (suites = None, seed = None))]
fn validate(suites: Option<Vec<String>>, seed: Option<u64>) -> PyResult<(bool, Vec<String>)> {
    let mut opts = ValidateOptions::default();
    if let Some(names) = suites {
        opts.suites = names
            .iter()
            .map(|s| parse::<Suite>(s))
            .collect::<PyResult<_>>()?;
    }
    if let Some(seed) = seed {
        opts.seed = seed;
    }
    let report = run_validation(&opts);
    Ok((report.passed(), report.failures()))
}

#[pymodule]
fn lambda_zeno_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyGroundState>()?;
    m.add_class::<PyBranch>()?;
    m.add_class::<PyOutcome>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(scatter, m)?)?;
    m.add_function(wrap_pyfunction!(run_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(polarizability, m)?)?;
    m.add_function(wrap_pyfunction!(n_tot_h, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
