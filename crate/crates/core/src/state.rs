//! Shared domain types: uniform periodic grid, Eulerian field state,
//! initial-data presets with analytic derivatives, and the description of
//! which regularizing terms a run carries.
//!
//! Density is never a prognostic variable: it is always reconstructed as
//! `n = 1 - dE/dx` from the field component.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform 1D grid with periodic boundary treatment.
///
/// The computational window defaults to `[-20, 20]`; all presets decay far
/// below round-off at the edges for documented parameter ranges, so the
/// periodic wrap stands in for the Cauchy problem on the whole line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
}

pub const DEFAULT_X_MIN: f64 = -20.0;
pub const DEFAULT_X_MAX: f64 = 20.0;

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::InvalidGrid(format!(
                "need x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_cells < 8 {
            return Err(Error::InvalidGrid(format!("need n_cells >= 8, got {n_cells}")));
        }
        Ok(Self { x_min, x_max, n_cells })
    }

    /// Default window with the requested resolution.
    pub fn standard(n_cells: usize) -> Result<Self> {
        Self::new(DEFAULT_X_MIN, DEFAULT_X_MAX, n_cells)
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_cells as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.x(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.n_cells
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn wrap(&self, i: isize) -> usize {
        let n = self.n_cells as isize;
        (((i % n) + n) % n) as usize
    }

    /// Periodic linear interpolation of a grid sample at position `x`.
    pub fn interp(&self, f: &[f64], x: f64) -> f64 {
        let h = self.spacing();
        let s = (x - self.x_min) / h;
        let i0 = s.floor() as isize;
        let w = s - s.floor();
        let a = f[self.wrap(i0)];
        let b = f[self.wrap(i0 + 1)];
        a + w * (b - a)
    }
}

/// Second-order centered first derivative with periodic wrap.
pub fn centered_diff(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let ip = if i + 1 == n { 0 } else { i + 1 };
        let im = if i == 0 { n - 1 } else { i - 1 };
        out[i] = (f[ip] - f[im]) / (2.0 * h);
    }
    out
}

/// Second-order centered second derivative with periodic wrap.
pub fn second_diff(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let ip = if i + 1 == n { 0 } else { i + 1 };
        let im = if i == 0 { n - 1 } else { i - 1 };
        out[i] = (f[ip] - 2.0 * f[i] + f[im]) / (h * h);
    }
    out
}

/// Trapezoid rule over the periodic window (equal weights on a wrap grid).
pub fn periodic_integral(f: &[f64], h: f64) -> f64 {
    f.iter().sum::<f64>() * h
}

/// Density reconstruction `n = 1 - dE/dx` with the module's centered
/// difference. Non-positive values are returned as-is; they are a
/// diagnostic event, not a type error.
pub fn reconstruct_density(e_field: &[f64], grid: &Grid1D) -> Vec<f64> {
    centered_diff(e_field, grid.spacing())
        .into_iter()
        .map(|d| 1.0 - d)
        .collect()
}

/// Eulerian snapshot of the plasma at one time: velocity `v`, field `e`,
/// and the derived density `n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldState {
    pub t: f64,
    pub v: Vec<f64>,
    pub e: Vec<f64>,
    pub n: Vec<f64>,
}

impl FieldState {
    pub fn from_ve(t: f64, v: Vec<f64>, e: Vec<f64>, grid: &Grid1D) -> Self {
        assert_eq!(v.len(), grid.n_cells);
        assert_eq!(e.len(), grid.n_cells);
        let n = reconstruct_density(&e, grid);
        Self { t, v, e, n }
    }

    pub fn zero(grid: &Grid1D) -> Self {
        let z = vec![0.0; grid.n_cells];
        Self { t: 0.0, v: z.clone(), e: z.clone(), n: vec![1.0; grid.n_cells] }
    }
}

/// Which extra terms are active in a run, with their parameters.
///
/// Accepted combinations are the documented ones: any single factor,
/// Laplacian viscosity together with field diffusion (`mu` + `kappa`),
/// or the exotic viscous flux `mu (V_x / n)_x` on its own. The exotic
/// flag reuses `mu` as its coefficient and excludes the Laplacian form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizerSpec {
    /// Constant friction coefficient.
    pub nu_const: f64,
    /// Density-dependent friction `nu(n) = nu0 * n^gamma`.
    pub nu_density: Option<DensityFriction>,
    /// Pressure coefficient for `p(n) = n^gamma / gamma`.
    pub alpha: f64,
    /// Pressure exponent, required `> 1` when `alpha > 0`.
    pub gamma_p: f64,
    /// Viscosity coefficient (Laplacian on V, or the exotic flux).
    pub mu: f64,
    /// Replace `mu V_xx` by `mu (V_x / n)_x`.
    pub exotic_viscosity: bool,
    /// Diffusion on E (the non-degenerate matrix diag(mu, kappa)).
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityFriction {
    pub nu0: f64,
    pub gamma: f64,
}

impl Default for RegularizerSpec {
    fn default() -> Self {
        Self {
            nu_const: 0.0,
            nu_density: None,
            alpha: 0.0,
            gamma_p: 2.0,
            mu: 0.0,
            exotic_viscosity: false,
            kappa: 0.0,
        }
    }
}

impl RegularizerSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn friction(nu: f64) -> Self {
        Self { nu_const: nu, ..Self::default() }
    }

    pub fn density_friction(nu0: f64, gamma: f64) -> Self {
        Self { nu_density: Some(DensityFriction { nu0, gamma }), ..Self::default() }
    }

    pub fn pressure(alpha: f64, gamma_p: f64) -> Self {
        Self { alpha, gamma_p, ..Self::default() }
    }

    pub fn viscosity(mu: f64) -> Self {
        Self { mu, ..Self::default() }
    }

    pub fn viscosity_matrix(mu: f64, kappa: f64) -> Self {
        Self { mu, kappa, ..Self::default() }
    }

    pub fn exotic(mu: f64) -> Self {
        Self { mu, exotic_viscosity: true, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [self.nu_const, self.alpha, self.mu, self.kappa];
        if nonneg.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidConfig("regularizer coefficients must be finite and >= 0".into()));
        }
        if let Some(df) = self.nu_density {
            if !df.nu0.is_finite() || df.nu0 < 0.0 || !df.gamma.is_finite() {
                return Err(Error::InvalidConfig("density friction needs nu0 >= 0 and finite gamma".into()));
            }
        }
        if self.alpha > 0.0 && !(self.gamma_p > 1.0) {
            return Err(Error::InvalidConfig("pressure requires gamma > 1".into()));
        }
        if self.exotic_viscosity {
            if self.mu <= 0.0 {
                return Err(Error::InvalidConfig("exotic viscosity needs mu > 0".into()));
            }
            if self.kappa > 0.0 {
                return Err(Error::InvalidConfig(
                    "exotic viscosity excludes the diag(mu, kappa) diffusion matrix".into(),
                ));
            }
        }
        Ok(())
    }

    /// True when no extra term is active (the original system).
    pub fn is_none(&self) -> bool {
        self.nu_const == 0.0
            && self.nu_density.is_none()
            && self.alpha == 0.0
            && self.mu == 0.0
            && self.kappa == 0.0
    }
}

/// Initial-data preset. Every preset provides `V0`, `E0` and the
/// analytically differentiated `v0 = V0'`, `e0 = E0'`, `e0' = E0''`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Preset {
    /// `V0 = 0`, `E0 = 0`.
    Zero,
    /// Laser pulse `V0 = 0`, `E0 = sign * a * (exp(-x^2))'`.
    ///
    /// The source convention is ambiguous: the potential `Phi0 = a exp(-x^2)`
    /// with `E = -grad Phi` gives the opposite sign of the literal formula
    /// `E0 = a (exp(-x^2))'`. The literal formula is the default
    /// (`sign = +1`); the other convention is `sign = -1`.
    LaserPulse { a: f64, sign: f64 },
    /// `V0 = 0`, `E0 = a * exp(-x^2 / s^2)`.
    GaussianE { a: f64, s: f64 },
    /// Natural cubic spline through samples of `V0` and `E0`; derivatives
    /// are those of the spline (zero outside the sampled range).
    CustomTable { xs: Vec<f64>, v0: Vec<f64>, e0: Vec<f64> },
}

/// Evaluable initial data with analytic derivatives.
#[derive(Debug, Clone)]
pub struct InitialData {
    preset: Preset,
    v_spline: Option<CubicSpline>,
    e_spline: Option<CubicSpline>,
}

pub fn make_initial_data(preset: Preset) -> Result<InitialData> {
    match &preset {
        Preset::Zero => {}
        Preset::LaserPulse { a, sign } => {
            if !(a.is_finite() && *a > 0.0) {
                return Err(Error::InvalidInitialData(format!("laser pulse needs a > 0, got {a}")));
            }
            if *sign != 1.0 && *sign != -1.0 {
                return Err(Error::InvalidInitialData(format!("laser pulse sign must be +1 or -1, got {sign}")));
            }
        }
        Preset::GaussianE { a, s } => {
            if !(a.is_finite() && s.is_finite() && *s > 0.0) {
                return Err(Error::InvalidInitialData(format!("gaussian_e needs finite a and s > 0, got a={a} s={s}")));
            }
        }
        Preset::CustomTable { xs, v0, e0 } => {
            if xs.len() < 4 || xs.len() != v0.len() || xs.len() != e0.len() {
                return Err(Error::InvalidInitialData("custom table needs >= 4 aligned samples".into()));
            }
            if xs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInitialData("custom table abscissae must be strictly increasing".into()));
            }
            if xs.iter().chain(v0).chain(e0).any(|x| !x.is_finite()) {
                return Err(Error::InvalidInitialData("custom table values must be finite".into()));
            }
        }
    }
    let (v_spline, e_spline) = match &preset {
        Preset::CustomTable { xs, v0, e0 } => (
            Some(CubicSpline::natural(xs, v0)),
            Some(CubicSpline::natural(xs, e0)),
        ),
        _ => (None, None),
    };
    Ok(InitialData { preset, v_spline, e_spline })
}

impl InitialData {
    pub fn preset(&self) -> &Preset {
        &self.preset
    }

    /// `V0(x)`
    pub fn velocity(&self, x: f64) -> f64 {
        match &self.preset {
            Preset::Zero | Preset::LaserPulse { .. } | Preset::GaussianE { .. } => 0.0,
            Preset::CustomTable { .. } => self.v_spline.as_ref().unwrap().eval(x),
        }
    }

    /// `E0(x)`
    pub fn field(&self, x: f64) -> f64 {
        match &self.preset {
            Preset::Zero => 0.0,
            Preset::LaserPulse { a, sign } => -2.0 * sign * a * x * (-x * x).exp(),
            Preset::GaussianE { a, s } => a * (-(x * x) / (s * s)).exp(),
            Preset::CustomTable { .. } => self.e_spline.as_ref().unwrap().eval(x),
        }
    }

    /// `v0(x) = V0'(x)`
    pub fn velocity_x(&self, x: f64) -> f64 {
        match &self.preset {
            Preset::Zero | Preset::LaserPulse { .. } | Preset::GaussianE { .. } => 0.0,
            Preset::CustomTable { .. } => self.v_spline.as_ref().unwrap().deriv(x),
        }
    }

    /// `e0(x) = E0'(x)`
    pub fn field_x(&self, x: f64) -> f64 {
        match &self.preset {
            Preset::Zero => 0.0,
            Preset::LaserPulse { a, sign } => -2.0 * sign * a * (1.0 - 2.0 * x * x) * (-x * x).exp(),
            Preset::GaussianE { a: _, s } => -2.0 * x / (s * s) * self.field(x),
            Preset::CustomTable { .. } => self.e_spline.as_ref().unwrap().deriv(x),
        }
    }

    /// `e0'(x) = E0''(x)`
    pub fn field_xx(&self, x: f64) -> f64 {
        match &self.preset {
            Preset::Zero => 0.0,
            Preset::LaserPulse { a, sign } => {
                -2.0 * sign * a * (4.0 * x * x * x - 6.0 * x) * (-x * x).exp()
            }
            Preset::GaussianE { a, s } => {
                let s2 = s * s;
                (-2.0 / s2 + 4.0 * x * x / (s2 * s2)) * a * (-(x * x) / s2).exp()
            }
            Preset::CustomTable { .. } => self.e_spline.as_ref().unwrap().deriv2(x),
        }
    }

    /// Sample the preset on a grid and reconstruct the discrete density.
    pub fn sample(&self, grid: &Grid1D) -> FieldState {
        let v: Vec<f64> = grid.xs().iter().map(|&x| self.velocity(x)).collect();
        let e: Vec<f64> = grid.xs().iter().map(|&x| self.field(x)).collect();
        FieldState::from_ve(0.0, v, e, grid)
    }
}

/// Natural cubic spline with clamped-to-zero extrapolation outside the
/// sampled range (presets are compactly supported by convention).
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(xs: &[f64], ys: &[f64]) -> Self {
        let n = xs.len();
        assert!(n >= 3);
        // Tridiagonal solve for knot second derivatives (Thomas algorithm).
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        b[0] = 1.0;
        b[n - 1] = 1.0;
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            a[i] = h0 / 6.0;
            b[i] = (h0 + h1) / 3.0;
            c[i] = h1 / 6.0;
            d[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
        }
        for i in 1..n {
            let w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = d[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (d[i] - c[i] * m[i + 1]) / b[i];
        }
        Self { xs: xs.to_vec(), ys: ys.to_vec(), m }
    }

    fn segment(&self, x: f64) -> Option<usize> {
        if x < self.xs[0] || x > *self.xs.last().unwrap() {
            return None;
        }
        let i = match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        };
        Some(i)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let Some(i) = self.segment(x) else { return 0.0 };
        let h = self.xs[i + 1] - self.xs[i];
        let u = (self.xs[i + 1] - x) / h;
        let w = (x - self.xs[i]) / h;
        u * self.ys[i]
            + w * self.ys[i + 1]
            + ((u * u * u - u) * self.m[i] + (w * w * w - w) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let Some(i) = self.segment(x) else { return 0.0 };
        let h = self.xs[i + 1] - self.xs[i];
        let u = (self.xs[i + 1] - x) / h;
        let w = (x - self.xs[i]) / h;
        (self.ys[i + 1] - self.ys[i]) / h
            + ((3.0 * w * w - 1.0) * self.m[i + 1] - (3.0 * u * u - 1.0) * self.m[i]) * h / 6.0
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        let Some(i) = self.segment(x) else { return 0.0 };
        let h = self.xs[i + 1] - self.xs[i];
        let u = (self.xs[i + 1] - x) / h;
        let w = (x - self.xs[i]) / h;
        u * self.m[i] + w * self.m[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn laser(a: f64) -> InitialData {
        make_initial_data(Preset::LaserPulse { a, sign: 1.0 }).unwrap()
    }

    #[test]
    fn grid_invariants() {
        assert!(Grid1D::new(0.0, 1.0, 4).is_err());
        assert!(Grid1D::new(1.0, 0.0, 64).is_err());
        let g = Grid1D::standard(128).unwrap();
        assert!(g.spacing() > 0.0);
        assert_abs_diff_eq!(g.spacing(), 40.0 / 128.0);
    }

    #[test]
    fn zero_field_gives_background_density() {
        let g = Grid1D::standard(64).unwrap();
        let n = reconstruct_density(&vec![0.0; 64], &g);
        assert!(n.iter().all(|&ni| ni == 1.0));
    }

    #[test]
    fn sine_field_density_second_order() {
        // E = sin(x) on [0, 2pi) periodic -> n = 1 - cos(x) + O(h^2).
        let g = Grid1D::new(0.0, std::f64::consts::TAU, 256).unwrap();
        let e: Vec<f64> = g.xs().iter().map(|x| x.sin()).collect();
        let n = reconstruct_density(&e, &g);
        let h = g.spacing();
        for (i, &x) in g.xs().iter().enumerate() {
            assert_abs_diff_eq!(n[i], 1.0 - x.cos(), epsilon = h * h);
        }
    }

    #[test]
    fn density_reconstruction_converges_at_order_two() {
        // Measured slope of the max error in log-log must be >= 1.9.
        let mut errs = Vec::new();
        let cells = [64usize, 128, 256, 512];
        for &nc in &cells {
            let g = Grid1D::new(0.0, std::f64::consts::TAU, nc).unwrap();
            let e: Vec<f64> = g.xs().iter().map(|x| (2.0 * x).sin()).collect();
            let n = reconstruct_density(&e, &g);
            let err = g
                .xs()
                .iter()
                .enumerate()
                .map(|(i, &x)| (n[i] - (1.0 - 2.0 * (2.0 * x).cos())).abs())
                .fold(0.0f64, f64::max);
            errs.push(err);
        }
        for w in errs.windows(2) {
            let slope = (w[0] / w[1]).log2();
            assert!(slope >= 1.9, "convergence slope {slope} below 1.9");
        }
    }

    #[test]
    fn laser_pulse_density_matches_symbolic() {
        // n0(x) = 1 + 2a(1 - 2x^2) exp(-x^2) pointwise to O(h^2).
        let a = 0.1;
        let g = Grid1D::standard(4096).unwrap();
        let init = laser(a);
        let st = init.sample(&g);
        let h = g.spacing();
        for (i, &x) in g.xs().iter().enumerate() {
            let exact = 1.0 + 2.0 * a * (1.0 - 2.0 * x * x) * (-x * x).exp();
            assert_abs_diff_eq!(st.n[i], exact, epsilon = 10.0 * h * h);
        }
    }

    #[test]
    fn laser_pulse_derivatives_at_origin() {
        let a = 0.3;
        let init = laser(a);
        assert_abs_diff_eq!(init.field_x(0.0), -2.0 * a);
        assert_abs_diff_eq!(init.field_xx(0.0), 0.0);
    }

    #[test]
    fn zero_preset_everywhere_zero() {
        let init = make_initial_data(Preset::Zero).unwrap();
        for x in [-3.0, 0.0, 7.5] {
            assert_eq!(init.velocity(x), 0.0);
            assert_eq!(init.field(x), 0.0);
            assert_eq!(init.velocity_x(x), 0.0);
            assert_eq!(init.field_x(x), 0.0);
        }
    }

    #[test]
    fn preset_validation_errors() {
        assert!(make_initial_data(Preset::LaserPulse { a: -1.0, sign: 1.0 }).is_err());
        assert!(make_initial_data(Preset::LaserPulse { a: f64::NAN, sign: 1.0 }).is_err());
        assert!(make_initial_data(Preset::GaussianE { a: 1.0, s: 0.0 }).is_err());
        assert!(make_initial_data(Preset::CustomTable {
            xs: vec![0.0, 1.0],
            v0: vec![0.0, 1.0],
            e0: vec![0.0, 1.0]
        })
        .is_err());
    }

    /// Analytic derivatives must agree with centered finite differences of
    /// the primitives to O(h^2) at randomly placed points.
    #[test]
    fn derivatives_match_finite_differences() {
        let table_x: Vec<f64> = (0..41).map(|i| -10.0 + 0.5 * i as f64).collect();
        let table_v: Vec<f64> = table_x.iter().map(|x| 0.3 * (-x * x / 9.0).exp()).collect();
        let table_e: Vec<f64> = table_x.iter().map(|x| 0.1 * x * (-x * x / 4.0).exp()).collect();
        let presets = vec![
            Preset::LaserPulse { a: 0.7, sign: 1.0 },
            Preset::LaserPulse { a: 0.2, sign: -1.0 },
            Preset::GaussianE { a: 0.5, s: 1.7 },
            Preset::CustomTable { xs: table_x, v0: table_v, e0: table_e },
        ];
        let h = 1e-4;
        for preset in presets {
            let init = make_initial_data(preset.clone()).unwrap();
            let scale = 1.0
                + (0..100)
                    .map(|i| init.field(-8.0 + 0.16 * i as f64).abs())
                    .fold(0.0f64, f64::max);
            for i in 0..100 {
                // Deterministic pseudo-random points in [-8, 8].
                let x = -8.0 + 16.0 * ((i as f64 * 0.618033988749895) % 1.0);
                let fd_v = (init.velocity(x + h) - init.velocity(x - h)) / (2.0 * h);
                let fd_e = (init.field(x + h) - init.field(x - h)) / (2.0 * h);
                let fd_ep = (init.field_x(x + h) - init.field_x(x - h)) / (2.0 * h);
                assert_abs_diff_eq!(init.velocity_x(x), fd_v, epsilon = 10.0 * h * h * scale + 1e-9);
                assert_abs_diff_eq!(init.field_x(x), fd_e, epsilon = 10.0 * h * h * scale + 1e-9);
                assert_abs_diff_eq!(init.field_xx(x), fd_ep, epsilon = 10.0 * h * h * scale + 1e-7);
            }
        }
    }

    #[test]
    fn regularizer_validation() {
        assert!(RegularizerSpec::none().validate().is_ok());
        assert!(RegularizerSpec::viscosity_matrix(0.1, 0.1).validate().is_ok());
        assert!(RegularizerSpec::exotic(0.05).validate().is_ok());
        let bad = RegularizerSpec { alpha: 1.0, gamma_p: 1.0, ..RegularizerSpec::default() };
        assert!(bad.validate().is_err());
        let bad = RegularizerSpec { exotic_viscosity: true, mu: 0.1, kappa: 0.1, ..RegularizerSpec::default() };
        assert!(bad.validate().is_err());
        let bad = RegularizerSpec { nu_const: -1.0, ..RegularizerSpec::default() };
        assert!(bad.validate().is_err());
    }
}
