//! A-posteriori checks on solver runs: the Cole-Hopf consistency residual
//! for viscous runs, return-to-data periodicity for smooth runs, and
//! reconciliation of the pointwise blow-up criterion with the observed
//! outcome.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::characteristics::{delta, delta_p};
use crate::error::{Error, Result};
use crate::fields::{solve, AdvectionScheme, RunResult, SolverConfig};
use crate::state::{second_diff, Grid1D, InitialData, RegularizerSpec};

/// Mean-zero periodic antiderivative by trapezoidal accumulation.
fn antiderivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for i in 1..n {
        out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
    }
    let mean = out.iter().sum::<f64>() / n as f64;
    for x in out.iter_mut() {
        *x -= mean;
    }
    out
}

fn mean(f: &[f64]) -> f64 {
    f.iter().sum::<f64>() / f.len() as f64
}

/// Discrete residual of the Cole-Hopf transform for a run with Laplacian
/// viscosity `mu V_xx`, one value per consecutive snapshot pair.
///
/// With `U` the mean-zero antiderivative of `V` and `z = exp(-U / (2 mu))`,
/// the momentum equation is equivalent to the linear heat equation
/// `z_t = mu z_xx + Psi z` with potential
/// `Psi = (Phi - <V^2>/2) / (2 mu)`, `Phi_x = E`, `Phi` mean-zero.
/// The `<V^2>/2` gauge constant keeps `U` mean-zero in time; the potential
/// enters linearly, so the gauge must be fixed exactly as above.
///
/// Returns `(t_mid, ||z_t - mu z_xx - Psi z||_2 / ||z||_2)` per pair;
/// `O(h^2 + dt^2)` for a faithful run. `psi_shift` perturbs the potential
/// and must destroy the residual; pass 0 for the genuine check.
pub fn cole_hopf_residual(run: &RunResult, psi_shift: f64) -> Result<Vec<(f64, f64)>> {
    let mu = run.config.reg.mu;
    if !(mu > 0.0) || run.config.reg.exotic_viscosity {
        return Err(Error::InvalidConfig(
            "Cole-Hopf residual requires Laplacian viscosity mu > 0".into(),
        ));
    }
    if run.states.len() < 2 {
        return Err(Error::RunTooShort { needed: run.config.t_end, have: 0.0 });
    }
    let grid = run.config.grid;
    let h = grid.spacing();
    let nc = grid.n_cells;
    let z_of = |v: &[f64]| -> Result<Vec<f64>> {
        let vm = mean(v);
        let shifted: Vec<f64> = v.iter().map(|x| x - vm).collect();
        let u = antiderivative(&shifted, h);
        let z: Vec<f64> = u.iter().map(|ui| (-ui / (2.0 * mu)).exp()).collect();
        if z.iter().any(|x| !x.is_finite() || *x == 0.0) {
            return Err(Error::NumericalBreakdown { t: run.config.t_end });
        }
        Ok(z)
    };
    let mut series = Vec::new();
    for pair in run.states.windows(2) {
        let (s1, s2) = (&pair[0], &pair[1]);
        let dt = s2.t - s1.t;
        if dt <= 0.0 {
            continue;
        }
        let z1 = z_of(&s1.v)?;
        let z2 = z_of(&s2.v)?;
        let zm: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| 0.5 * (a + b)).collect();
        let em: Vec<f64> = s1.e.iter().zip(&s2.e).map(|(a, b)| 0.5 * (a + b)).collect();
        let vm: Vec<f64> = s1.v.iter().zip(&s2.v).map(|(a, b)| 0.5 * (a + b)).collect();
        let phi = antiderivative(&em, h);
        let gauge = 0.5 * mean(&vm.iter().map(|x| x * x).collect::<Vec<_>>());
        let zxx = second_diff(&zm, h);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..nc {
            let psi = (phi[i] - gauge) / (2.0 * mu) + psi_shift;
            let r = (z2[i] - z1[i]) / dt - mu * zxx[i] - psi * zm[i];
            num += r * r;
            den += zm[i] * zm[i];
        }
        series.push((0.5 * (s1.t + s2.t), (num / den).sqrt()));
    }
    Ok(series)
}

/// Largest residual of the series from [`cole_hopf_residual`].
pub fn cole_hopf_worst(run: &RunResult) -> Result<f64> {
    Ok(cole_hopf_residual(run, 0.0)?
        .iter()
        .fold(0.0f64, |m, &(_, r)| m.max(r)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicityReport {
    /// Time of the snapshot compared against the initial data.
    pub t_return: f64,
    pub err_v: f64,
    pub err_e: f64,
    pub tol: f64,
    pub periodic: bool,
}

/// Check whether the solution returned to its initial data at `t = 2 pi`,
/// within a tolerance scaled by the discretization error `10 (h^2 + dt^4)`
/// times the data amplitude. Only meaningful without regularizers (with
/// friction the amplitude decays instead of returning).
pub fn periodicity_check(run: &RunResult) -> Result<PeriodicityReport> {
    if !run.config.reg.is_none() {
        return Err(Error::InvalidConfig(
            "periodicity check applies only to unregularized runs".into(),
        ));
    }
    if run.final_state().t < TAU - 1e-9 {
        return Err(Error::RunTooShort { needed: TAU, have: run.final_state().t });
    }
    let first = &run.states[0];
    let ret = run.state_at(TAU);
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let err = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0f64, f64::max)
    };
    let h = run.config.grid.spacing();
    let dt = run
        .series
        .windows(2)
        .map(|w| w[1].t - w[0].t)
        .fold(0.0f64, f64::max);
    let scale = sup(&first.v).max(sup(&first.e)).max(1e-30);
    // allow for snapshot granularity around t = 2 pi
    let snap_slack = (ret.t - TAU).abs() * (sup(&first.v) + sup(&first.e) + 1.0);
    let tol = 10.0 * (h * h + dt.powi(4)) * scale + snap_slack;
    let err_v = err(&first.v, &ret.v);
    let err_e = err(&first.e, &ret.e);
    Ok(PeriodicityReport {
        t_return: ret.t,
        err_v,
        err_e,
        tol,
        periodic: err_v.max(err_e) < tol,
    })
}

/// Width of the band around the criterion boundary inside which verdicts
/// are not trusted (blow-up time diverges as the boundary is approached).
pub const CRITERION_BAND: f64 = 1e-2;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PointVerdict {
    pub x: f64,
    /// Criterion left-hand side `v0^2 + 2 e0 - 1` and right-hand side
    /// (0 without pressure, the alpha term with it); blow-up is predicted
    /// where `lhs >= rhs`.
    pub lhs: f64,
    pub rhs: f64,
    pub predicts_blowup: bool,
    /// `|lhs - rhs|` within the boundary band.
    pub marginal: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconciliationReport {
    pub points: Vec<PointVerdict>,
    pub predicted_blowup: bool,
    pub observed_blowup: bool,
    pub agree: bool,
    /// The deciding point sits inside the boundary band, so a disagreement
    /// would not count as a failure.
    pub marginal: bool,
    /// Largest criterion excess `lhs - rhs` and where it occurs.
    pub max_excess: f64,
    pub argmax_x: f64,
    pub t_star: Option<f64>,
}

/// Evaluate the pointwise criterion on the initial data, run the Eulerian
/// solver from the same data, and compare the verdicts. `reg` must be
/// either all-off (criterion Delta) or pressure-only (criterion Delta_p).
/// Smooth verdicts need `t_end >= 2 pi`.
pub fn reconcile_criterion(
    init: &InitialData,
    reg: &RegularizerSpec,
    grid: &Grid1D,
    t_end: f64,
) -> Result<ReconciliationReport> {
    let pressure_only = reg.alpha > 0.0
        && reg.nu_const == 0.0
        && reg.nu_density.is_none()
        && reg.mu == 0.0
        && reg.kappa == 0.0;
    if !reg.is_none() && !pressure_only {
        return Err(Error::InvalidConfig(
            "reconciliation covers the bare system (Delta) or pressure-only (Delta_p)".into(),
        ));
    }
    if t_end < TAU {
        return Err(Error::InvalidConfig(format!(
            "t_end must cover one period 2 pi, got {t_end}"
        )));
    }
    let mut points = Vec::with_capacity(grid.n_cells);
    let mut max_excess = f64::NEG_INFINITY;
    let mut argmax_x = 0.0;
    for &x in &grid.xs() {
        let v0 = init.velocity_x(x);
        let e0 = init.field_x(x);
        let (lhs, rhs) = if pressure_only {
            delta_p(v0, e0, init.field_xx(x), reg.alpha, reg.gamma_p)?
        } else {
            (delta(v0, e0), 0.0)
        };
        if lhs - rhs > max_excess {
            max_excess = lhs - rhs;
            argmax_x = x;
        }
        points.push(PointVerdict {
            x,
            lhs,
            rhs,
            predicts_blowup: lhs >= rhs,
            marginal: (lhs - rhs).abs() < CRITERION_BAND,
        });
    }
    let mut cfg = SolverConfig::new(*grid, t_end, *reg);
    cfg.scheme = AdvectionScheme::central();
    let run = solve(init, &cfg)?;
    let predicted = max_excess >= 0.0;
    let observed = run.report.blew_up;
    Ok(ReconciliationReport {
        points,
        predicted_blowup: predicted,
        observed_blowup: observed,
        agree: predicted == observed,
        marginal: max_excess.abs() < CRITERION_BAND,
        max_excess,
        argmax_x,
        t_star: run.report.t_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{make_initial_data, Preset};

    fn laser(a: f64) -> InitialData {
        make_initial_data(Preset::LaserPulse { a, sign: 1.0 }).unwrap()
    }

    #[test]
    fn antiderivative_recovers_sine() {
        let n = 256;
        let h = TAU / n as f64;
        let f: Vec<f64> = (0..n).map(|i| (i as f64 * h).cos()).collect();
        let u = antiderivative(&f, h);
        for i in 0..n {
            let exact = (i as f64 * h).sin();
            assert!((u[i] - exact).abs() < 1e-3);
        }
    }

    #[test]
    fn cole_hopf_residual_small_and_gauge_sensitive() {
        let init = laser(0.3);
        let mut cfg = SolverConfig::new(
            Grid1D::standard(512).unwrap(),
            1.0,
            RegularizerSpec::viscosity(0.1),
        );
        cfg.scheme = AdvectionScheme::central();
        cfg.output_stride = 2;
        let run = solve(&init, &cfg).unwrap();
        assert!(!run.report.blew_up);
        let r = cole_hopf_worst(&run).unwrap();
        assert!(r < 1e-2, "Cole-Hopf residual too large: {r}");
        // breaking the gauge constant must destroy the identity
        let bad = cole_hopf_residual(&run, 1.0)
            .unwrap()
            .iter()
            .fold(0.0f64, |m, &(_, x)| m.max(x));
        assert!(bad > 10.0 * r, "gauge-broken residual {bad} vs {r}");
    }

    #[test]
    fn cole_hopf_requires_viscosity() {
        let init = laser(0.1);
        let cfg = SolverConfig::new(Grid1D::standard(128).unwrap(), 0.5, RegularizerSpec::none());
        let run = solve(&init, &cfg).unwrap();
        assert!(cole_hopf_residual(&run, 0.0).is_err());
    }

    #[test]
    fn periodicity_of_subcritical_run() {
        let init = laser(0.05);
        let mut cfg = SolverConfig::new(Grid1D::standard(1024).unwrap(), TAU, RegularizerSpec::none());
        cfg.scheme = AdvectionScheme::central();
        let run = solve(&init, &cfg).unwrap();
        let rep = periodicity_check(&run).unwrap();
        assert!(rep.periodic, "errors {} / {} vs tol {}", rep.err_v, rep.err_e, rep.tol);
    }

    #[test]
    fn periodicity_needs_full_period_and_bare_system() {
        let init = laser(0.05);
        let cfg = SolverConfig::new(Grid1D::standard(128).unwrap(), 1.0, RegularizerSpec::none());
        let run = solve(&init, &cfg).unwrap();
        assert!(matches!(periodicity_check(&run), Err(Error::RunTooShort { .. })));

        let cfg = SolverConfig::new(Grid1D::standard(128).unwrap(), 7.0, RegularizerSpec::friction(0.5));
        let run = solve(&init, &cfg).unwrap();
        assert!(matches!(periodicity_check(&run), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn reconcile_agrees_both_ways() {
        let grid = Grid1D::standard(1024).unwrap();
        let reg = RegularizerSpec::none();

        let smooth = laser(0.3);
        let rep = reconcile_criterion(&smooth, &reg, &grid, 10.0).unwrap();
        assert!(!rep.predicted_blowup && !rep.observed_blowup && rep.agree && !rep.marginal);
        assert!(rep.max_excess < 0.0);

        let steep = laser(0.9);
        let rep = reconcile_criterion(&steep, &reg, &grid, 10.0).unwrap();
        assert!(rep.predicted_blowup && rep.observed_blowup && rep.agree);
        // Delta is maximized where E0' peaks, at x = +-sqrt(3/2)
        assert!((rep.argmax_x.abs() - 1.5f64.sqrt()).abs() < 0.05, "argmax {}", rep.argmax_x);
    }

    #[test]
    fn reconcile_rejects_other_regularizers() {
        let init = laser(0.3);
        let grid = Grid1D::standard(128).unwrap();
        let err = reconcile_criterion(&init, &RegularizerSpec::friction(0.5), &grid, 10.0);
        assert!(matches!(err, Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn reconcile_pressure_uses_delta_p() {
        let init = laser(0.3);
        let grid = Grid1D::standard(512).unwrap();
        let rep = reconcile_criterion(&init, &RegularizerSpec::pressure(1.0, 2.0), &grid, 10.0).unwrap();
        assert!(rep.points.iter().any(|p| p.rhs > 0.0));
        assert!(!rep.predicted_blowup && rep.agree);
    }
}
