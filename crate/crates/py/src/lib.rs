//! Python bindings for the coldplasma laboratory: initial data presets,
//! the exact smoothness criteria, characteristic integration, phase-plane
//! structure, the Eulerian solver and the stochastic particle ensemble.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use coldplasma::characteristics::{self, CharState, CharSystemKind, IntegrateOptions, SeparatrixOptions};
use coldplasma::fields::{self, AdvectionScheme, SolverConfig};
use coldplasma::state::{self, Grid1D, Preset, RegularizerSpec};
use coldplasma::stochastic::{self, SpatialDensity};
use coldplasma::{acceptance, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidGrid(_)
        | Error::InvalidInitialData(_)
        | Error::InvalidConfig(_)
        | Error::InvalidDensity { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Evaluable initial data `(V0, E0)` with analytic derivatives.
#[pyclass(module = "coldplasma_py")]
struct InitialData {
    inner: state::InitialData,
}

#[pymethods]
impl InitialData {
    /// `V0 = 0`, `E0 = 0`.
    #[staticmethod]
    fn zero() -> PyResult<Self> {
        Ok(Self { inner: state::make_initial_data(Preset::Zero).map_err(to_py)? })
    }

    /// Laser pulse `E0 = sign * a * (exp(-x^2))'`.
    #[staticmethod]
    #[pyo3(signature = (a, sign = 1.0))]
    fn laser(a: f64, sign: f64) -> PyResult<Self> {
        Ok(Self {
            inner: state::make_initial_data(Preset::LaserPulse { a, sign }).map_err(to_py)?,
        })
    }

    /// `E0 = a * exp(-x^2 / s^2)`.
    #[staticmethod]
    #[pyo3(signature = (a, s = 1.0))]
    fn gaussian(a: f64, s: f64) -> PyResult<Self> {
        Ok(Self { inner: state::make_initial_data(Preset::GaussianE { a, s }).map_err(to_py)? })
    }

    /// Natural cubic spline through `(xs, v0, e0)` samples.
    #[staticmethod]
    fn table(xs: Vec<f64>, v0: Vec<f64>, e0: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: state::make_initial_data(Preset::CustomTable { xs, v0, e0 }).map_err(to_py)?,
        })
    }

    fn velocity(&self, x: f64) -> f64 {
        self.inner.velocity(x)
    }

    fn field(&self, x: f64) -> f64 {
        self.inner.field(x)
    }

    fn velocity_x(&self, x: f64) -> f64 {
        self.inner.velocity_x(x)
    }

    fn field_x(&self, x: f64) -> f64 {
        self.inner.field_x(x)
    }

    fn field_xx(&self, x: f64) -> f64 {
        self.inner.field_xx(x)
    }

    /// Pointwise criterion `Delta(x)` sampled on `xs`.
    fn delta_profile(&self, xs: Vec<f64>) -> Vec<f64> {
        xs.iter()
            .map(|&x| characteristics::delta(self.inner.velocity_x(x), self.inner.field_x(x)))
            .collect()
    }
}

/// `Delta = v0^2 + 2 e0 - 1`; globally smooth iff negative.
#[pyfunction]
fn delta(v0: f64, e0: f64) -> f64 {
    characteristics::delta(v0, e0)
}

/// Pressure-modified criterion; returns `(lhs, rhs)`, smooth iff lhs < rhs.
#[pyfunction]
fn delta_p(v0: f64, e0: f64, e0p: f64, alpha: f64, gamma: f64) -> PyResult<(f64, f64)> {
    characteristics::delta_p(v0, e0, e0p, alpha, gamma).map_err(to_py)
}

/// Result of one characteristic integration.
#[pyclass(module = "coldplasma_py")]
struct CharResult {
    #[pyo3(get)]
    blew_up: bool,
    #[pyo3(get)]
    t_star: Option<f64>,
    /// Sampled trajectory rows `(t, x, V, E, V_x, E_x)`.
    #[pyo3(get)]
    trajectory: Vec<(f64, f64, f64, f64, f64, f64)>,
}

/// Integrate one characteristic; `vx`, `ex` are the gradients that decide
/// blow-up, `nu > 0` switches on constant friction.
#[pyfunction]
#[pyo3(signature = (vx, ex, x = 0.0, v = 0.0, e = 0.0, nu = 0.0, t_end = 50.0))]
fn integrate_characteristic(
    vx: f64,
    ex: f64,
    x: f64,
    v: f64,
    e: f64,
    nu: f64,
    t_end: f64,
) -> PyResult<CharResult> {
    if !(nu >= 0.0) {
        return Err(PyValueError::new_err(format!("nu must be >= 0, got {nu}")));
    }
    let kind = if nu > 0.0 { CharSystemKind::Friction { nu } } else { CharSystemKind::Original };
    let init = CharState::new(x, v, e, vx, ex);
    let (states, report) =
        characteristics::integrate_characteristic(kind, init, t_end, &IntegrateOptions::default())
            .map_err(to_py)?;
    Ok(CharResult {
        blew_up: report.blew_up,
        t_star: report.t_star,
        trajectory: states.iter().map(|s| (s.t, s.x, s.v, s.e, s.v_x, s.e_x)).collect(),
    })
}

/// Equilibria of the friction gradient subsystem as `(e, v, kind)` rows.
#[pyfunction]
fn classify_equilibria(nu: f64) -> PyResult<Vec<(f64, f64, String)>> {
    if !(nu >= 0.0) {
        return Err(PyValueError::new_err(format!("nu must be >= 0, got {nu}")));
    }
    Ok(characteristics::classify_equilibria(nu)
        .iter()
        .map(|eq| (eq.location.0, eq.location.1, format!("{:?}", eq.kind)))
        .collect())
}

/// Smoothness-domain boundary polyline on the `(e, v)` plane.
#[pyfunction]
#[pyo3(signature = (nu, rays = 64, horizon = 100.0))]
fn trace_separatrix(nu: f64, rays: usize, horizon: f64) -> PyResult<Vec<(f64, f64)>> {
    if !(nu >= 0.0) {
        return Err(PyValueError::new_err(format!("nu must be >= 0, got {nu}")));
    }
    let opts = SeparatrixOptions { n_rays: rays, horizon, ..SeparatrixOptions::default() };
    characteristics::trace_separatrix(nu, &opts).map_err(to_py)
}

/// Final state and verdict of an Eulerian run.
#[pyclass(module = "coldplasma_py")]
struct SolveResult {
    #[pyo3(get)]
    blew_up: bool,
    #[pyo3(get)]
    t_star: Option<f64>,
    #[pyo3(get)]
    witness: Option<String>,
    #[pyo3(get)]
    t: f64,
    #[pyo3(get)]
    x: Vec<f64>,
    #[pyo3(get)]
    v: Vec<f64>,
    #[pyo3(get)]
    e: Vec<f64>,
    #[pyo3(get)]
    n: Vec<f64>,
}

/// Run the Eulerian solver; regularizers default to off.
#[pyfunction]
#[pyo3(signature = (init, t_end, cells = 1024, x_min = -20.0, x_max = 20.0,
    nu = 0.0, nu0 = 0.0, gamma = 1.0, alpha = 0.0, gamma_p = 2.0,
    mu = 0.0, kappa = 0.0, exotic = false, scheme = "upwind", filter = 0.0, cfl = 0.4))]
#[allow(clippy::too_many_arguments)]
fn solve(
    init: &InitialData,
    t_end: f64,
    cells: usize,
    x_min: f64,
    x_max: f64,
    nu: f64,
    nu0: f64,
    gamma: f64,
    alpha: f64,
    gamma_p: f64,
    mu: f64,
    kappa: f64,
    exotic: bool,
    scheme: &str,
    filter: f64,
    cfl: f64,
) -> PyResult<SolveResult> {
    let mut reg = RegularizerSpec::none();
    reg.nu_const = nu;
    if nu0 > 0.0 {
        reg.nu_density = Some(state::DensityFriction { nu0, gamma });
    }
    reg.alpha = alpha;
    reg.gamma_p = gamma_p;
    reg.mu = mu;
    reg.kappa = kappa;
    reg.exotic_viscosity = exotic;
    let grid = Grid1D::new(x_min, x_max, cells).map_err(to_py)?;
    let mut cfg = SolverConfig::new(grid, t_end, reg);
    cfg.cfl = cfl;
    cfg.scheme = match scheme {
        "upwind" => AdvectionScheme::Upwind,
        "central" => AdvectionScheme::Central { filter },
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown scheme {other:?} (upwind | central)"
            )))
        }
    };
    let run = fields::solve(&init.inner, &cfg).map_err(to_py)?;
    let last = run.final_state();
    Ok(SolveResult {
        blew_up: run.report.blew_up,
        t_star: run.report.t_star,
        witness: run.report.witness.clone(),
        t: last.t,
        x: grid.xs(),
        v: last.v.clone(),
        e: last.e.clone(),
        n: last.n.clone(),
    })
}

/// Kernel-density moment fields of a stochastic particle run.
#[pyclass(module = "coldplasma_py")]
struct MomentResult {
    #[pyo3(get)]
    t: f64,
    #[pyo3(get)]
    bandwidth: f64,
    #[pyo3(get)]
    mass: f64,
    #[pyo3(get)]
    x: Vec<f64>,
    #[pyo3(get)]
    rho: Vec<f64>,
    /// NaN where the density is below the mask floor.
    #[pyo3(get)]
    vhat: Vec<f64>,
    #[pyo3(get)]
    ehat: Vec<f64>,
}

/// Run the stochastic ensemble to `t_end` and estimate moment fields.
#[pyfunction]
#[pyo3(signature = (init, sigma, n, seed, t_end, dt = 0.01, cells = 512,
    x_min = -20.0, x_max = 20.0, f0 = "uniform", f0_s = 1.0, bandwidth = None))]
#[allow(clippy::too_many_arguments)]
fn stochastic_moments(
    init: &InitialData,
    sigma: f64,
    n: usize,
    seed: u64,
    t_end: f64,
    dt: f64,
    cells: usize,
    x_min: f64,
    x_max: f64,
    f0: &str,
    f0_s: f64,
    bandwidth: Option<f64>,
) -> PyResult<MomentResult> {
    let grid = Grid1D::new(x_min, x_max, cells).map_err(to_py)?;
    let density = match f0 {
        "uniform" => SpatialDensity::uniform(x_min, x_max).map_err(to_py)?,
        "gaussian" => SpatialDensity::gaussian(0.0, f0_s, x_max).map_err(to_py)?,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown density {other:?} (uniform | gaussian)"
            )))
        }
    };
    let mut ens = stochastic::init_ensemble(&init.inner, &density, n, sigma, seed).map_err(to_py)?;
    if t_end > 0.0 {
        stochastic::run_ensemble(&mut ens, t_end, dt).map_err(to_py)?;
    }
    let m = stochastic::estimate_moments(&ens, &grid, bandwidth).map_err(to_py)?;
    Ok(MomentResult {
        t: m.t,
        bandwidth: m.bandwidth,
        mass: m.rho_integral(),
        x: grid.xs(),
        rho: m.rho,
        vhat: m.vhat,
        ehat: m.ehat,
    })
}

/// Run one acceptance criterion; returns `(passed, line)`.
#[pyfunction]
fn run_criterion(id: usize) -> (bool, String) {
    let o = acceptance::run_criterion(id);
    (o.passed, o.line())
}

#[pymodule]
fn coldplasma_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<InitialData>()?;
    m.add_class::<CharResult>()?;
    m.add_class::<SolveResult>()?;
    m.add_class::<MomentResult>()?;
    m.add_function(wrap_pyfunction!(delta, m)?)?;
    m.add_function(wrap_pyfunction!(delta_p, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_characteristic, m)?)?;
    m.add_function(wrap_pyfunction!(classify_equilibria, m)?)?;
    m.add_function(wrap_pyfunction!(trace_separatrix, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(stochastic_moments, m)?)?;
    m.add_function(wrap_pyfunction!(run_criterion, m)?)?;
    Ok(())
}
