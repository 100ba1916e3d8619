//! Python bindings: statics, sweeps and fits, absorber and amplifier
//! dynamics, the Q-function, the brute-force oracle and the experiment
//! runner. Errors surface as `photoqpt_py.PhotoqptError`.

use std::collections::BTreeMap;
use std::path::Path;

use photoqpt::absorber::{self, AbsorberParams};
use photoqpt::amplifier::{self, DriveSchedule};
use photoqpt::criticality;
use photoqpt::dicke::DickeSpace;
use photoqpt::harness::{self, ExperimentConfig};
use photoqpt::lmg;
use photoqpt::C64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(photoqpt_py, PhotoqptError, PyException);

fn py_err(e: photoqpt::Error) -> PyErr {
    PhotoqptError::new_err(e.to_string())
}

#[pyclass(name = "LmgParams", get_all, set_all, from_py_object)]
#[derive(Clone)]
struct PyLmgParams {
    n_qubits: usize,
    jx: f64,
    jy: f64,
    bx: f64,
    epsilon: f64,
}

impl PyLmgParams {
    fn inner(&self) -> lmg::LmgParams {
        lmg::LmgParams {
            n_qubits: self.n_qubits,
            epsilon: self.epsilon,
            jx: self.jx,
            jy: self.jy,
            bx: self.bx,
        }
    }
}

#[pymethods]
impl PyLmgParams {
    #[new]
    #[pyo3(signature = (n_qubits, jx, jy, bx = 0.0, epsilon = 1.0))]
    fn new(n_qubits: usize, jx: f64, jy: f64, bx: f64, epsilon: f64) -> PyResult<Self> {
        let p = Self {
            n_qubits,
            jx,
            jy,
            bx,
            epsilon,
        };
        p.inner().validate().map_err(py_err)?;
        Ok(p)
    }

    fn __repr__(&self) -> String {
        format!(
            "LmgParams(n_qubits={}, jx={}, jy={}, bx={}, epsilon={})",
            self.n_qubits, self.jx, self.jy, self.bx, self.epsilon
        )
    }
}

#[pyclass(name = "GroundState", get_all, frozen)]
struct PyGroundState {
    e0: f64,
    e1: f64,
    gap: f64,
    ground: Vec<C64>,
}

#[pyclass(name = "StaticObservables", get_all, frozen)]
struct PyStatics {
    e0: f64,
    gap: f64,
    zeta_x: f64,
    zeta_y: f64,
    c_xy: f64,
    c_xxyy: f64,
    eta: f64,
    magnetization_x: f64,
}

#[pymethods]
impl PyStatics {
    fn __repr__(&self) -> String {
        format!(
            "StaticObservables(e0={}, gap={}, zeta_x={}, zeta_y={}, c_xy={}, c_xxyy={}, eta={})",
            self.e0, self.gap, self.zeta_x, self.zeta_y, self.c_xy, self.c_xxyy, self.eta
        )
    }
}

#[pyclass(name = "ScalingFit", get_all, frozen)]
struct PyScalingFit {
    exponent: f64,
    log_amplitude: f64,
    r_squared: f64,
    window: (f64, f64),
    n_points: usize,
}

#[pymethods]
impl PyScalingFit {
    fn __repr__(&self) -> String {
        format!(
            "ScalingFit(exponent={}, r_squared={}, window={:?}, n_points={})",
            self.exponent, self.r_squared, self.window, self.n_points
        )
    }
}

#[pyfunction]
fn solve_ground(params: &PyLmgParams) -> PyResult<PyGroundState> {
    let g = lmg::solve_ground(&params.inner()).map_err(py_err)?;
    Ok(PyGroundState {
        e0: g.e0,
        e1: g.e1,
        gap: g.gap,
        ground: g.ground,
    })
}

#[pyfunction]
fn statics(params: &PyLmgParams) -> PyResult<PyStatics> {
    let s = lmg::statics(&params.inner()).map_err(py_err)?;
    Ok(PyStatics {
        e0: s.e0,
        gap: s.gap,
        zeta_x: s.order.zeta_x,
        zeta_y: s.order.zeta_y,
        c_xy: s.correlations.c_xy,
        c_xxyy: s.correlations.c_xxyy,
        eta: s.correlations.eta,
        magnetization_x: s.magnetization_x,
    })
}

/// Columns keyed by name, one entry per field value.
#[pyfunction]
#[pyo3(signature = (params, bx_values, rel_step = criticality::DEFAULT_REL_STEP))]
fn field_sweep(params: &PyLmgParams, bx_values: Vec<f64>, rel_step: f64) -> PyResult<BTreeMap<&'static str, Vec<f64>>> {
    let pts = criticality::field_sweep(&params.inner(), &bx_values, rel_step).map_err(py_err)?;
    let col = |f: fn(&criticality::SweepPoint) -> f64| pts.iter().map(f).collect::<Vec<_>>();
    Ok(BTreeMap::from([
        ("bx", col(|p| p.bx)),
        ("zeta_x", col(|p| p.zeta_x)),
        ("zeta_y", col(|p| p.zeta_y)),
        ("sqrt_zeta_x", col(|p| p.sqrt_zeta_x)),
        ("chi", col(|p| p.chi)),
        ("chi_m", col(|p| p.chi_m)),
        ("gap", col(|p| p.gap)),
        ("c_xy", col(|p| p.c_xy)),
        ("c_xxyy", col(|p| p.c_xxyy)),
        ("eta", col(|p| p.eta)),
    ]))
}

#[pyfunction]
fn logspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    criticality::logspace(lo, hi, points)
}

#[pyfunction]
fn fit_power_law(x: Vec<f64>, y: Vec<f64>, lo: f64, hi: f64) -> PyResult<PyScalingFit> {
    if x.len() != y.len() {
        return Err(py_err(photoqpt::Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        }));
    }
    let pts: Vec<(f64, f64)> = x.into_iter().zip(y).collect();
    let f = criticality::fit_power_law(&pts, (lo, hi)).map_err(py_err)?;
    Ok(PyScalingFit {
        exponent: f.exponent,
        log_amplitude: f.log_amplitude,
        r_squared: f.r_squared,
        window: f.window,
        n_points: f.n_points,
    })
}

/// Absorber P_e(t) for one single-photon pulse: (times, pe, pe_steady).
#[pyfunction]
#[pyo3(signature = (delta_pp, gamma_fg, gamma_he, tau_f = 1.0, t_arrival = 0.0, t_start = -5.0, t_end = 20.0, dt = 1e-3, eta = 1.0, phase = 0.0))]
#[allow(clippy::too_many_arguments)]
fn integrate_hierarchy(
    delta_pp: f64,
    gamma_fg: f64,
    gamma_he: f64,
    tau_f: f64,
    t_arrival: f64,
    t_start: f64,
    t_end: f64,
    dt: f64,
    eta: f64,
    phase: f64,
) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    let params = AbsorberParams {
        delta_pp,
        gamma_fg,
        gamma_he,
        tau_f,
        t_arrival,
        eta_scatter: eta,
        phase,
    };
    let tr = absorber::integrate_hierarchy(&params, t_start, t_end, dt).map_err(py_err)?;
    Ok((tr.times, tr.pe, tr.pe_steady))
}

#[pyclass(name = "Trajectory", get_all, frozen)]
struct PyTrajectory {
    n_qubits: usize,
    times: Vec<f64>,
    sx2: Vec<f64>,
    sy2: Vec<f64>,
    gain: Vec<f64>,
    g_max: f64,
    t_am: f64,
    states: Vec<Vec<C64>>,
}

/// Amplifier evolution driven by 2·bx·pe(t)·S_x from the zero-field ground
/// state of `params`, plus its quantum gain.
#[pyfunction]
#[pyo3(signature = (params, times, pe, bx, t_start, t_end, t_arrival = 0.0, dt = 1e-3, sample_every = 100))]
#[allow(clippy::too_many_arguments)]
fn evolve(
    params: &PyLmgParams,
    times: Vec<f64>,
    pe: Vec<f64>,
    bx: f64,
    t_start: f64,
    t_end: f64,
    t_arrival: f64,
    dt: f64,
    sample_every: usize,
) -> PyResult<PyTrajectory> {
    let drive = DriveSchedule::new(times, pe, bx).map_err(py_err)?;
    let traj = amplifier::evolve(&params.inner(), &drive, t_start, t_end, dt, sample_every).map_err(py_err)?;
    let gain = amplifier::quantum_gain(&traj, t_start, t_arrival).map_err(py_err)?;
    Ok(PyTrajectory {
        n_qubits: traj.n_qubits,
        times: traj.times,
        sx2: traj.sx2,
        sy2: traj.sy2,
        gain: gain.gain,
        g_max: gain.g_max,
        t_am: gain.t_am,
        states: traj.states,
    })
}

/// (theta, phi, values[theta][phi], normalization).
type QGrid = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>, f64);

#[pyfunction]
fn q_function(state: Vec<C64>, n_qubits: usize) -> PyResult<QGrid> {
    let space = DickeSpace::new(n_qubits).map_err(py_err)?;
    let q = amplifier::q_function(&state, space).map_err(py_err)?;
    let norm = q.normalization();
    Ok((q.theta, q.phi, q.values, norm))
}

#[pyfunction]
#[pyo3(signature = (n_qubits, jx, jy, bx = 0.0))]
fn brute_force_statics(n_qubits: usize, jx: f64, jy: f64, bx: f64) -> PyResult<BTreeMap<&'static str, f64>> {
    let o = harness::brute_force_statics(n_qubits, jx, jy, bx).map_err(py_err)?;
    Ok(BTreeMap::from([
        ("e0", o.e0),
        ("gap", o.gap),
        ("zeta_x", o.zeta_x),
        ("zeta_y", o.zeta_y),
        ("c_xy", o.c_xy),
        ("c_xxyy", o.c_xxyy),
    ]))
}

#[pyfunction]
fn list_experiments() -> Vec<(&'static str, &'static str)> {
    harness::REGISTRY.iter().map(|e| (e.name, e.description)).collect()
}

#[pyfunction]
fn default_config(name: &str) -> PyResult<String> {
    harness::default_config(name).and_then(|c| c.to_toml()).map_err(py_err)
}

/// Runs an experiment from TOML (its defaults when `config` is None) and
/// returns (path, sha256) for every file written, manifest excluded.
#[pyfunction]
#[pyo3(signature = (name, out, config = None, svg = false))]
fn run_experiment(name: &str, out: &str, config: Option<&str>, svg: bool) -> PyResult<Vec<(String, String)>> {
    let cfg = match config {
        Some(text) => ExperimentConfig::from_toml(text),
        None => harness::default_config(name),
    }
    .map_err(py_err)?;
    if cfg.experiment != name {
        return Err(PhotoqptError::new_err(format!("config is for {}, not {name}", cfg.experiment)));
    }
    let m = harness::run_experiment(&cfg, Some(Path::new(out)), svg).map_err(py_err)?;
    Ok(m.outputs.into_iter().map(|f| (f.path, f.sha256)).collect())
}

#[pymodule]
fn photoqpt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PhotoqptError", m.py().get_type::<PhotoqptError>())?;
    m.add_class::<PyLmgParams>()?;
    m.add_class::<PyGroundState>()?;
    m.add_class::<PyStatics>()?;
    m.add_class::<PyScalingFit>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(solve_ground, m)?)?;
    m.add_function(wrap_pyfunction!(statics, m)?)?;
    m.add_function(wrap_pyfunction!(field_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(logspace, m)?)?;
    m.add_function(wrap_pyfunction!(fit_power_law, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_hierarchy, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(q_function, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_statics, m)?)?;
    m.add_function(wrap_pyfunction!(list_experiments, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
