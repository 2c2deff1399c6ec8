//! Stochastic regularization: an ensemble of noisy characteristics
//! `dX = V dt + sigma dW` with the (V, E) pair rotated exactly, plus
//! kernel-density moment fields and their consistency checks.
//!
//! All randomness comes from a counter-based generator keyed by
//! `(seed, step, particle)`, so results are bit-identical regardless of
//! how particles are distributed over worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{Read as _, Write as _};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::RunResult;
use crate::state::{centered_diff, second_diff, Grid1D, InitialData};

const SQRT_TAU: f64 = 2.5066282746310002; // sqrt(2 pi)

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn counter_u64(seed: u64, step: u64, particle: u64, lane: u64) -> u64 {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ step);
    h = splitmix64(h ^ particle);
    splitmix64(h ^ lane)
}

fn to_uniform(z: u64) -> f64 {
    ((z >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

/// Standard normal draw, Box-Muller on two counter streams.
fn counter_normal(seed: u64, step: u64, particle: u64) -> f64 {
    let u1 = to_uniform(counter_u64(seed, step, particle, 0));
    let u2 = to_uniform(counter_u64(seed, step, particle, 1));
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Normalized spatial law for the initial particle positions.
#[derive(Debug, Clone)]
pub struct SpatialDensity {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl SpatialDensity {
    /// Tabulated density on strictly increasing abscissae; normalized here.
    pub fn from_table(xs: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if xs.len() != f.len() || xs.len() < 2 || xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("density table needs increasing abscissae".into()));
        }
        if f.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidConfig("density values must be finite and nonnegative".into()));
        }
        let mut cdf = vec![0.0; xs.len()];
        for i in 1..xs.len() {
            cdf[i] = cdf[i - 1] + 0.5 * (xs[i] - xs[i - 1]) * (f[i] + f[i - 1]);
        }
        let total = *cdf.last().unwrap();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidConfig("density is not normalizable".into()));
        }
        for c in cdf.iter_mut() {
            *c /= total;
        }
        Ok(Self { xs, cdf })
    }

    pub fn uniform(x_min: f64, x_max: f64) -> Result<Self> {
        Self::from_table(vec![x_min, x_max], vec![1.0, 1.0])
    }

    pub fn gaussian(center: f64, s: f64, cut: f64) -> Result<Self> {
        let n = 2001;
        let xs: Vec<f64> = (0..n)
            .map(|i| center - cut * s + 2.0 * cut * s * i as f64 / (n - 1) as f64)
            .collect();
        let f = xs.iter().map(|x| (-0.5 * ((x - center) / s).powi(2)).exp()).collect();
        Self::from_table(xs, f)
    }

    /// Inverse-CDF sample at quantile `u` in [0, 1].
    pub fn quantile(&self, u: f64) -> f64 {
        let idx = self.cdf.partition_point(|&c| c < u);
        if idx == 0 {
            return self.xs[0];
        }
        if idx >= self.cdf.len() {
            return *self.xs.last().unwrap();
        }
        let (c0, c1) = (self.cdf[idx - 1], self.cdf[idx]);
        let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        self.xs[idx - 1] + w * (self.xs[idx] - self.xs[idx - 1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    pub sigma: f64,
    pub seed: u64,
    pub t: f64,
    /// Completed step count; keys the per-step RNG streams.
    pub step_index: u64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub e: Vec<f64>,
}

impl ParticleEnsemble {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

pub const MIN_PARTICLES: usize = 1000;

/// Draw `n` particles from `f0` (inverse-CDF, counter stream step 0) and
/// place each on the deterministic initial data: V = V0(X), E = E0(X).
pub fn init_ensemble(
    init: &InitialData,
    f0: &SpatialDensity,
    n: usize,
    sigma: f64,
    seed: u64,
) -> Result<ParticleEnsemble> {
    if n < MIN_PARTICLES {
        return Err(Error::InvalidConfig(format!("need at least {MIN_PARTICLES} particles, got {n}")));
    }
    if !(sigma >= 0.0) {
        return Err(Error::InvalidConfig(format!("sigma must be >= 0, got {sigma}")));
    }
    let x: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| f0.quantile(to_uniform(counter_u64(seed, 0, i as u64, 2))))
        .collect();
    let v: Vec<f64> = x.par_iter().map(|&xi| init.velocity(xi)).collect();
    let e: Vec<f64> = x.par_iter().map(|&xi| init.field(xi)).collect();
    Ok(ParticleEnsemble { sigma, seed, t: 0.0, step_index: 0, x, v, e })
}

/// One Euler-Maruyama step for X and the exact rotation for (V, E).
pub fn step_ensemble(ens: &mut ParticleEnsemble, dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
    }
    let step = ens.step_index + 1;
    let (seed, sigma) = (ens.seed, ens.sigma);
    let sqdt = dt.sqrt();
    let (c, s) = (dt.cos(), dt.sin());
    let n = ens.len();
    let noise: Vec<f64> = if sigma > 0.0 {
        (0..n)
            .into_par_iter()
            .map(|i| sigma * sqdt * counter_normal(seed, step, i as u64))
            .collect()
    } else {
        vec![0.0; n]
    };
    for i in 0..n {
        ens.x[i] += ens.v[i] * dt + noise[i];
        let (vi, ei) = (ens.v[i], ens.e[i]);
        ens.v[i] = vi * c - ei * s;
        ens.e[i] = vi * s + ei * c;
    }
    ens.t += dt;
    ens.step_index = step;
    Ok(())
}

/// Advance the ensemble to `t_end` in uniform steps of (at most) `dt`.
pub fn run_ensemble(ens: &mut ParticleEnsemble, t_end: f64, dt: f64) -> Result<()> {
    while ens.t < t_end - 1e-12 {
        step_ensemble(ens, dt.min(t_end - ens.t))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentFields {
    pub grid: Grid1D,
    pub t: f64,
    pub bandwidth: f64,
    pub rho: Vec<f64>,
    /// NaN where the density is below the mask floor.
    pub vhat: Vec<f64>,
    pub ehat: Vec<f64>,
}

/// Fraction of the density peak below which the conditional means are
/// masked as undefined.
pub const RHO_FLOOR: f64 = 1e-6;

/// Gaussian kernel density and Nadaraya-Watson means on `grid`.
/// `bandwidth = None` selects Silverman's rule `1.06 std(X) N^(-1/5)`.
/// The reduction runs parallel over grid points and sequential over
/// particles, so the result does not depend on the thread count.
pub fn estimate_moments(
    ens: &ParticleEnsemble,
    grid: &Grid1D,
    bandwidth: Option<f64>,
) -> Result<MomentFields> {
    if ens.is_empty() {
        return Err(Error::InvalidConfig("ensemble is empty".into()));
    }
    let n = ens.len() as f64;
    let bw = match bandwidth {
        Some(b) if b > 0.0 => b,
        Some(b) => return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {b}"))),
        None => {
            let mean = ens.x.iter().sum::<f64>() / n;
            let var = ens.x.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
            let sd = var.sqrt();
            if sd > 0.0 {
                1.06 * sd * n.powf(-0.2)
            } else {
                grid.spacing()
            }
        }
    };
    let xs = grid.xs();
    let triples: Vec<(f64, f64, f64)> = xs
        .par_iter()
        .map(|&xg| {
            let mut w_sum = 0.0;
            let mut wv = 0.0;
            let mut we = 0.0;
            for i in 0..ens.len() {
                let u = (xg - ens.x[i]) / bw;
                if u.abs() > 8.0 {
                    continue;
                }
                let w = (-0.5 * u * u).exp();
                w_sum += w;
                wv += w * ens.v[i];
                we += w * ens.e[i];
            }
            (w_sum, wv, we)
        })
        .collect();
    let rho: Vec<f64> = triples.iter().map(|t| t.0 / (n * bw * SQRT_TAU)).collect();
    let rho_max = rho.iter().fold(0.0f64, |m, &x| m.max(x));
    if rho_max == 0.0 {
        return Err(Error::EmptyEstimate);
    }
    let floor = RHO_FLOOR * rho_max;
    let vhat: Vec<f64> = triples
        .iter()
        .zip(&rho)
        .map(|(t, &r)| if r > floor { t.1 / t.0 } else { f64::NAN })
        .collect();
    let ehat: Vec<f64> = triples
        .iter()
        .zip(&rho)
        .map(|(t, &r)| if r > floor { t.2 / t.0 } else { f64::NAN })
        .collect();
    Ok(MomentFields { grid: *grid, t: ens.t, bandwidth: bw, rho, vhat, ehat })
}

impl MomentFields {
    /// Non-periodic trapezoid integral of the density over the grid.
    pub fn rho_integral(&self) -> f64 {
        let h = self.grid.spacing();
        let edge = 0.5 * (self.rho[0] + self.rho[self.rho.len() - 1]);
        h * (self.rho.iter().sum::<f64>() - edge)
    }
}

/// Discrete residual of the first-moment (continuity) equation
/// `rho_t + (rho Vhat)_x = (sigma^2 / 2) rho_xx`, midpoint in time.
/// Statistical noise dominates: expect `O(1/sqrt(N) + h^2 + dt)`.
pub fn moment_residual(
    m0: &MomentFields,
    m1: &MomentFields,
    sigma: f64,
) -> Result<Vec<f64>> {
    if m0.grid != m1.grid {
        return Err(Error::GridMismatch);
    }
    let dt = m1.t - m0.t;
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig("moment fields must be at increasing times".into()));
    }
    let h = m0.grid.spacing();
    let nc = m0.grid.n_cells;
    let masked = |v: f64| if v.is_finite() { v } else { 0.0 };
    let rho_m: Vec<f64> = (0..nc).map(|i| 0.5 * (m0.rho[i] + m1.rho[i])).collect();
    let flux: Vec<f64> = (0..nc)
        .map(|i| rho_m[i] * 0.5 * (masked(m0.vhat[i]) + masked(m1.vhat[i])))
        .collect();
    let dflux = centered_diff(&flux, h);
    let diff = second_diff(&rho_m, h);
    Ok((0..nc)
        .map(|i| (m1.rho[i] - m0.rho[i]) / dt + dflux[i] - 0.5 * sigma * sigma * diff[i])
        .collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub sigma: f64,
    pub t: f64,
    /// Sup distance of Vhat / Ehat to the deterministic reference over the
    /// unmasked region.
    pub err_v: f64,
    pub err_e: f64,
    /// Same distances for a paired-seed sigma = 0 ensemble: the pure
    /// sampling and discretization floor.
    pub floor_v: f64,
    pub floor_e: f64,
}

fn sup_distance(m: &MomentFields, state_v: &[f64], state_e: &[f64]) -> (f64, f64) {
    let mut dv = 0.0f64;
    let mut de = 0.0f64;
    for i in 0..m.grid.n_cells {
        if m.vhat[i].is_finite() {
            dv = dv.max((m.vhat[i] - state_v[i]).abs());
            de = de.max((m.ehat[i] - state_e[i]).abs());
        }
    }
    (dv, de)
}

/// Paired-seed Monte Carlo study: for each noise level, the sup distance
/// of the moment fields to a deterministic reference run, next to the
/// sigma = 0 floor of the identical ensemble. The reference must stay
/// smooth over the requested checkpoints.
pub fn convergence_study(
    init: &InitialData,
    f0: &SpatialDensity,
    sigmas: &[f64],
    n: usize,
    seed: u64,
    dt: f64,
    t_checkpoints: &[f64],
    reference: &RunResult,
) -> Result<Vec<ConvergenceRow>> {
    if sigmas.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidConfig("convergence study needs sigma > 0".into()));
    }
    let t_max = t_checkpoints.iter().cloned().fold(0.0f64, f64::max);
    let have = reference.final_state().t;
    if have + 1e-9 < t_max {
        return Err(Error::RunTooShort { needed: t_max, have });
    }
    let grid = reference.config.grid;
    // shared floor: the same seed with the noise switched off
    let mut floors = Vec::new();
    {
        let mut ens = init_ensemble(init, f0, n, 0.0, seed)?;
        for &tc in t_checkpoints {
            run_ensemble(&mut ens, tc, dt)?;
            let m = estimate_moments(&ens, &grid, None)?;
            let s = reference.state_at(tc);
            floors.push(sup_distance(&m, &s.v, &s.e));
        }
    }
    let mut rows = Vec::new();
    for &sigma in sigmas {
        let mut ens = init_ensemble(init, f0, n, sigma, seed)?;
        for (ci, &tc) in t_checkpoints.iter().enumerate() {
            run_ensemble(&mut ens, tc, dt)?;
            let m = estimate_moments(&ens, &grid, None)?;
            let s = reference.state_at(tc);
            let (err_v, err_e) = sup_distance(&m, &s.v, &s.e);
            rows.push(ConvergenceRow {
                sigma,
                t: tc,
                err_v,
                err_e,
                floor_v: floors[ci].0,
                floor_e: floors[ci].1,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmoothnessRow {
    pub t: f64,
    pub max_vhat: f64,
    pub max_ehat: f64,
    pub max_rho: f64,
    /// Peak density re-estimated with the bandwidth halved; a stable ratio
    /// to `max_rho` rules out delta concentration.
    pub max_rho_half_bw: f64,
}

/// Track the moment fields of a (possibly supercritical) ensemble through
/// and past the deterministic blow-up time; everything must stay finite.
pub fn blowup_smoothness_study(
    init: &InitialData,
    f0: &SpatialDensity,
    sigma: f64,
    n: usize,
    seed: u64,
    dt: f64,
    t_checkpoints: &[f64],
    grid: &Grid1D,
) -> Result<Vec<SmoothnessRow>> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidConfig("smoothness study needs sigma > 0".into()));
    }
    let mut ens = init_ensemble(init, f0, n, sigma, seed)?;
    let mut rows = Vec::new();
    let mut ts: Vec<f64> = t_checkpoints.to_vec();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for &tc in &ts {
        run_ensemble(&mut ens, tc, dt)?;
        let m = estimate_moments(&ens, grid, None)?;
        let m_half = estimate_moments(&ens, grid, Some(0.5 * m.bandwidth))?;
        let finite_max = |v: &[f64]| {
            v.iter().filter(|x| x.is_finite()).fold(0.0f64, |a, &b| a.max(b.abs()))
        };
        rows.push(SmoothnessRow {
            t: tc,
            max_vhat: finite_max(&m.vhat),
            max_ehat: finite_max(&m.ehat),
            max_rho: finite_max(&m.rho),
            max_rho_half_bw: finite_max(&m_half.rho),
        });
    }
    Ok(rows)
}

/// Flat binary checkpoint: header `N, sigma, seed, t` then the X, V, E
/// arrays, all little-endian 64-bit.
pub fn write_checkpoint(ens: &ParticleEnsemble, path: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(32 + 24 * ens.len());
    buf.extend_from_slice(&(ens.len() as u64).to_le_bytes());
    buf.extend_from_slice(&ens.sigma.to_le_bytes());
    buf.extend_from_slice(&ens.seed.to_le_bytes());
    buf.extend_from_slice(&ens.t.to_le_bytes());
    for arr in [&ens.x, &ens.v, &ens.e] {
        for val in arr.iter() {
            buf.extend_from_slice(&val.to_le_bytes());
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<ParticleEnsemble> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    let fail = || Error::InvalidConfig(format!("malformed checkpoint {}", path.display()));
    if buf.len() < 32 {
        return Err(fail());
    }
    let u64_at = |off: usize| u64::from_le_bytes(buf[off..off + 8].try_into().unwrap());
    let f64_at = |off: usize| f64::from_le_bytes(buf[off..off + 8].try_into().unwrap());
    let n = u64_at(0) as usize;
    let sigma = f64_at(8);
    let seed = u64_at(16);
    let t = f64_at(24);
    if buf.len() != 32 + 24 * n {
        return Err(fail());
    }
    let arr = |k: usize| -> Vec<f64> { (0..n).map(|i| f64_at(32 + 8 * (k * n + i))).collect() };
    Ok(ParticleEnsemble { sigma, seed, t, step_index: 0, x: arr(0), v: arr(1), e: arr(2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristics::{integrate_characteristic, CharState, CharSystemKind, IntegrateOptions};
    use crate::state::{make_initial_data, Preset};
    use approx::assert_abs_diff_eq;

    fn laser(a: f64) -> InitialData {
        make_initial_data(Preset::LaserPulse { a, sign: 1.0 }).unwrap()
    }

    #[test]
    fn uniform_sampling_kolmogorov_distance() {
        let init = make_initial_data(Preset::Zero).unwrap();
        let f0 = SpatialDensity::uniform(-5.0, 5.0).unwrap();
        let n = 100_000;
        let ens = init_ensemble(&init, &f0, n, 0.1, 42).unwrap();
        let mut xs = ens.x.clone();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks = 0.0f64;
        for (i, &x) in xs.iter().enumerate() {
            let cdf = (x + 5.0) / 10.0;
            let emp_hi = (i + 1) as f64 / n as f64;
            let emp_lo = i as f64 / n as f64;
            ks = ks.max((cdf - emp_lo).abs()).max((cdf - emp_hi).abs());
        }
        assert!(ks < 3.0 / (n as f64).sqrt(), "Kolmogorov distance {ks}");
    }

    #[test]
    fn delta_initial_law() {
        let f0 = SpatialDensity::uniform(-5.0, 5.0).unwrap();
        let zero = make_initial_data(Preset::Zero).unwrap();
        let ens = init_ensemble(&zero, &f0, 2000, 0.1, 1).unwrap();
        assert!(ens.v.iter().all(|&v| v == 0.0));

        let init = laser(0.4);
        let ens = init_ensemble(&init, &f0, 2000, 0.1, 1).unwrap();
        for i in 0..ens.len() {
            assert_eq!(ens.e[i], init.field(ens.x[i]));
        }
    }

    #[test]
    fn rotation_conserves_particle_energy() {
        let init = laser(0.5);
        let f0 = SpatialDensity::uniform(-5.0, 5.0).unwrap();
        let mut ens = init_ensemble(&init, &f0, 1000, 0.3, 9).unwrap();
        let e0: Vec<f64> = (0..ens.len()).map(|i| ens.v[i].powi(2) + ens.e[i].powi(2)).collect();
        run_ensemble(&mut ens, 5.0, 0.01).unwrap();
        for i in 0..ens.len() {
            let e1 = ens.v[i].powi(2) + ens.e[i].powi(2);
            assert_abs_diff_eq!(e1, e0[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn brownian_spreading_variance() {
        // V0 = E0 = 0, narrow start: Var(X(t)) = sigma^2 t.
        let init = make_initial_data(Preset::Zero).unwrap();
        let f0 = SpatialDensity::gaussian(0.0, 1e-4, 6.0).unwrap();
        let sigma = 0.1;
        let mut ens = init_ensemble(&init, &f0, 100_000, sigma, 7).unwrap();
        run_ensemble(&mut ens, 1.0, 0.01).unwrap();
        let n = ens.len() as f64;
        let mean = ens.x.iter().sum::<f64>() / n;
        let var = ens.x.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let expected = sigma * sigma * 1.0;
        assert!((var - expected).abs() < 0.05 * expected, "Var(X) = {var} vs {expected}");
    }

    #[test]
    fn sigma_zero_matches_characteristic_flow() {
        let init = laser(0.3);
        let f0 = SpatialDensity::uniform(-4.0, 4.0).unwrap();
        let dt = 1e-3;
        let mut ens = init_ensemble(&init, &f0, 1000, 0.0, 3).unwrap();
        let x0 = ens.x.clone();
        run_ensemble(&mut ens, 1.0, dt).unwrap();
        for i in (0..ens.len()).step_by(10) {
            let c0 = CharState::new(
                x0[i],
                init.velocity(x0[i]),
                init.field(x0[i]),
                init.velocity_x(x0[i]),
                init.field_x(x0[i]),
            );
            let (traj, _) = integrate_characteristic(
                CharSystemKind::Original,
                c0,
                1.0,
                &IntegrateOptions::default(),
            )
            .unwrap();
            let last = traj.last().unwrap();
            // (V, E) rotation is exact; X carries the Euler O(dt) error
            assert_abs_diff_eq!(ens.v[i], last.v, epsilon = 1e-9);
            assert_abs_diff_eq!(ens.e[i], last.e, epsilon = 1e-9);
            assert!((ens.x[i] - last.x).abs() < 5.0 * dt, "X error {}", (ens.x[i] - last.x).abs());
        }
    }

    #[test]
    fn moments_constant_field_and_normalization() {
        let ens = ParticleEnsemble {
            sigma: 0.1,
            seed: 0,
            t: 0.0,
            step_index: 0,
            x: vec![0.0; 1500],
            v: vec![1.0; 1500],
            e: vec![-0.5; 1500],
        };
        let grid = Grid1D::standard(512).unwrap();
        let m = estimate_moments(&ens, &grid, Some(0.3)).unwrap();
        assert_abs_diff_eq!(m.rho_integral(), 1.0, epsilon = 1e-3);
        for i in 0..grid.n_cells {
            if m.vhat[i].is_finite() {
                assert_abs_diff_eq!(m.vhat[i], 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(m.ehat[i], -0.5, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn rho_normalized_during_evolution() {
        let init = laser(0.4);
        let f0 = SpatialDensity::uniform(-6.0, 6.0).unwrap();
        let mut ens = init_ensemble(&init, &f0, 20_000, 0.2, 5).unwrap();
        let grid = Grid1D::standard(512).unwrap();
        for k in 1..=5 {
            run_ensemble(&mut ens, 0.5 * k as f64, 0.01).unwrap();
            let m = estimate_moments(&ens, &grid, None).unwrap();
            assert_abs_diff_eq!(m.rho_integral(), 1.0, epsilon = 1e-3);
            assert!(m.rho.iter().all(|&r| r >= 0.0));
        }
    }

    #[test]
    fn bit_exact_reproducibility() {
        let init = laser(0.4);
        let f0 = SpatialDensity::uniform(-6.0, 6.0).unwrap();
        let run = || {
            let mut ens = init_ensemble(&init, &f0, 5000, 0.15, 11).unwrap();
            run_ensemble(&mut ens, 2.0, 0.01).unwrap();
            ens
        };
        let (a, b) = (run(), run());
        assert_eq!(a, b);
    }

    #[test]
    fn residual_zero_for_stationary_uniform() {
        let grid = Grid1D::standard(128).unwrap();
        let flat = MomentFields {
            grid,
            t: 0.0,
            bandwidth: 0.5,
            rho: vec![0.025; 128],
            vhat: vec![0.0; 128],
            ehat: vec![0.0; 128],
        };
        let mut later = flat.clone();
        later.t = 0.1;
        let r = moment_residual(&flat, &later, 0.2).unwrap();
        assert!(r.iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn residual_shrinks_with_ensemble_size() {
        let init = make_initial_data(Preset::Zero).unwrap();
        let f0 = SpatialDensity::gaussian(0.0, 1.0, 6.0).unwrap();
        let grid = Grid1D::standard(256).unwrap();
        let rms = |n: usize| {
            let mut ens = init_ensemble(&init, &f0, n, 0.3, 17).unwrap();
            run_ensemble(&mut ens, 0.5, 0.01).unwrap();
            let m0 = estimate_moments(&ens, &grid, Some(0.25)).unwrap();
            run_ensemble(&mut ens, 0.6, 0.01).unwrap();
            let m1 = estimate_moments(&ens, &grid, Some(0.25)).unwrap();
            let r = moment_residual(&m0, &m1, 0.3).unwrap();
            (r.iter().map(|x| x * x).sum::<f64>() / r.len() as f64).sqrt()
        };
        let (r_small, r_large) = (rms(4_000), rms(40_000));
        // 1/sqrt(N) scaling predicts a factor sqrt(10) ~ 3.16
        assert!(
            r_large < r_small / 1.5,
            "residual did not shrink: {r_small} -> {r_large}"
        );
    }

    #[test]
    fn convergence_study_rejects_sigma_zero() {
        let init = laser(0.1);
        let f0 = SpatialDensity::uniform(-4.0, 4.0).unwrap();
        let cfg = crate::fields::SolverConfig::new(
            Grid1D::standard(128).unwrap(),
            1.0,
            crate::state::RegularizerSpec::none(),
        );
        let reference = crate::fields::solve(&init, &cfg).unwrap();
        let err = convergence_study(&init, &f0, &[0.0], 1000, 1, 0.01, &[0.5], &reference);
        assert!(err.is_err());
    }

    #[test]
    fn checkpoint_round_trip() {
        let init = laser(0.4);
        let f0 = SpatialDensity::uniform(-6.0, 6.0).unwrap();
        let mut ens = init_ensemble(&init, &f0, 1200, 0.15, 23).unwrap();
        run_ensemble(&mut ens, 1.0, 0.01).unwrap();
        let dir = std::env::temp_dir().join("coldplasma-ckpt-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("ens.bin");
        write_checkpoint(&ens, &path).unwrap();
        let back = read_checkpoint(&path).unwrap();
        assert_eq!(back.x, ens.x);
        assert_eq!(back.v, ens.v);
        assert_eq!(back.e, ens.e);
        assert_eq!(back.seed, ens.seed);
        assert_eq!(back.sigma, ens.sigma);
        assert_eq!(back.t, ens.t);
    }

    #[test]
    fn normal_draws_have_unit_moments() {
        let n = 200_000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for i in 0..n {
            let z = counter_normal(99, 1, i);
            sum += z;
            sq += z * z;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }
}
