//! Lagrangian dynamics along characteristics, the analytic blow-up
//! criteria, and the phase-plane taxonomy of the friction system.
//!
//! Along a characteristic of the original system the solution values and
//! their spatial gradients obey the closed ODEs
//! `dV/dt = -E`, `dE/dt = V`, `dv/dt = -e - v^2`, `de/dt = v(1 - e)`,
//! with `-nu v` / `-nu V` added under constant friction.

use crate::error::{Error, Result};
use crate::ode::{self, AdaptiveOptions, StopReason};

/// Which characteristic system is integrated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CharSystemKind {
    Original,
    Friction { nu: f64 },
}

impl CharSystemKind {
    pub fn nu(&self) -> f64 {
        match self {
            CharSystemKind::Original => 0.0,
            CharSystemKind::Friction { nu } => *nu,
        }
    }
}

/// State carried along one characteristic: position, solution values and
/// their spatial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharState {
    pub t: f64,
    pub x: f64,
    /// Solution values `V`, `E` on the characteristic.
    pub v: f64,
    pub e: f64,
    /// Spatial derivatives `V_x`, `E_x`.
    pub v_x: f64,
    pub e_x: f64,
    pub blown_up: bool,
}

impl CharState {
    pub fn new(x: f64, v: f64, e: f64, v_x: f64, e_x: f64) -> Self {
        Self { t: 0.0, x, v, e, v_x, e_x, blown_up: false }
    }
}

/// Which gradient crossed the blow-up threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowupWitness {
    VelocityGradient,
    FieldGradient,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupReport {
    pub blew_up: bool,
    pub t_star: Option<f64>,
    pub witness: Option<BlowupWitness>,
}

impl BlowupReport {
    pub fn smooth() -> Self {
        Self { blew_up: false, t_star: None, witness: None }
    }
}

/// The exact smoothness criterion of the original system:
/// `Delta = v0^2 + 2 e0 - 1`; the characteristic stays globally smooth
/// iff the value is strictly negative.
pub fn delta(v0: f64, e0: f64) -> f64 {
    v0 * v0 + 2.0 * e0 - 1.0
}

/// Pressure-modified criterion: returns `(lhs, rhs)` with
/// `lhs = v0^2 + 2 e0 - 1` and `rhs = alpha e0'^2 / (1 - e0)^(3 - gamma)`;
/// smooth iff `lhs < rhs` at every point.
pub fn delta_p(v0: f64, e0: f64, e0p: f64, alpha: f64, gamma: f64) -> Result<(f64, f64)> {
    if e0 >= 1.0 {
        return Err(Error::InvalidDensity { e0 });
    }
    if !(gamma > 1.0) || alpha < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "pressure criterion needs gamma > 1 and alpha >= 0, got gamma={gamma} alpha={alpha}"
        )));
    }
    let lhs = delta(v0, e0);
    let rhs = alpha * e0p * e0p / (1.0 - e0).powf(3.0 - gamma);
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    pub ode: AdaptiveOptions,
    /// Blow-up threshold on `|v_x|` and `|e_x|`.
    pub blowup_threshold: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            ode: AdaptiveOptions { rtol: 1e-10, atol: 1e-12, h_init: 1e-3, min_step: 1e-14, max_step: 0.1 },
            blowup_threshold: 1e8,
        }
    }
}

impl IntegrateOptions {
    /// Looser tolerances for survive/blow-up classification sweeps.
    pub fn probe() -> Self {
        Self {
            ode: AdaptiveOptions { rtol: 1e-8, atol: 1e-10, h_init: 1e-3, min_step: 1e-14, max_step: 0.2 },
            blowup_threshold: 1e8,
        }
    }
}

/// Integrate one characteristic up to `t_end`, halting early at gradient
/// blow-up. The blow-up time is estimated by fitting `C / (t_star - t)` to
/// the diverging gradient over its last decade of growth.
pub fn integrate_characteristic(
    kind: CharSystemKind,
    init: CharState,
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<(Vec<CharState>, BlowupReport)> {
    assert!(t_end > 0.0);
    let nu = kind.nu();
    let thr = opts.blowup_threshold;
    // y = [x, V, E, v_x, e_x]
    let rhs = move |_t: f64, y: &[f64; 5]| {
        let (v, e, vx, ex) = (y[1], y[2], y[3], y[4]);
        [v, -e - nu * v, v, -ex - vx * vx - nu * vx, vx * (1.0 - ex)]
    };
    let y0 = [init.x, init.v, init.e, init.v_x, init.e_x];
    let sol = ode::integrate_adaptive(rhs, init.t, y0, init.t + t_end, &opts.ode, |_, y| {
        y[3].abs() > thr || y[4].abs() > thr
    })?;
    let blew_up = sol.reason == StopReason::Event;
    let trajectory: Vec<CharState> = sol
        .samples
        .iter()
        .map(|&(t, y)| CharState {
            t,
            x: y[0],
            v: y[1],
            e: y[2],
            v_x: y[3],
            e_x: y[4],
            blown_up: blew_up && (y[3].abs() > thr || y[4].abs() > thr),
        })
        .collect();
    let report = if blew_up {
        let (_, yl) = sol.last();
        let witness = match (yl[3].abs() > thr, yl[4].abs() > thr) {
            (true, true) => BlowupWitness::Both,
            (true, false) => BlowupWitness::VelocityGradient,
            _ => BlowupWitness::FieldGradient,
        };
        let idx = if matches!(witness, BlowupWitness::FieldGradient) { 4 } else { 3 };
        let growth: Vec<(f64, f64)> =
            sol.samples.iter().map(|&(t, y)| (t, y[idx].abs())).collect();
        BlowupReport { blew_up: true, t_star: ode::fit_blowup_time(&growth), witness: Some(witness) }
    } else {
        BlowupReport::smooth()
    };
    Ok((trajectory, report))
}

/// Survive/blow-up probe of the closed `(v, e)` gradient subsystem with
/// friction `nu`. The solution values `V`, `E` do not feed back into the
/// gradients, so membership depends only on `(v0, e0)`.
fn gradient_probe(nu: f64, v0: f64, e0: f64, horizon: f64, opts: &AdaptiveOptions, thr: f64) -> Result<bool> {
    let rhs = move |_t: f64, y: &[f64; 2]| [-y[1] - y[0] * y[0] - nu * y[0], y[0] * (1.0 - y[1])];
    let sol = ode::integrate_adaptive(rhs, 0.0, [v0, e0], horizon, opts, |_, y| {
        y[0].abs() > thr || y[1].abs() > thr
    })?;
    Ok(sol.reason == StopReason::Completed)
}

pub const DEFAULT_MEMBERSHIP_HORIZON: f64 = 100.0;

/// True iff the characteristic through `(v0, e0)` under friction `nu`
/// survives to the horizon without gradient blow-up.
pub fn smoothness_membership(nu: f64, v0: f64, e0: f64, horizon: f64) -> bool {
    let opts = IntegrateOptions::probe();
    gradient_probe(nu, v0, e0, horizon, &opts.ode, opts.blowup_threshold).unwrap_or(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    Center,
    StableFocus,
    StableNode,
    Saddle,
    UnstableNode,
    SaddleNode,
}

/// Complex eigenvalue as `(re, im)`.
pub type Eigenvalue = (f64, f64);

/// Equilibrium of the friction `(v, e)` subsystem, located on the phase
/// plane in `(e, v)` order to match the usual plot axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    /// `(e, v)` coordinates.
    pub location: (f64, f64),
    pub kind: EquilibriumKind,
    pub eigenvalues: [Eigenvalue; 2],
}

/// Jacobian of `(dv/dt, de/dt)` with respect to `(v, e)`.
pub fn gradient_jacobian(nu: f64, v: f64, e: f64) -> [[f64; 2]; 2] {
    [[-2.0 * v - nu, -1.0], [1.0 - e, -v]]
}

/// Eigenvalues of a 2x2 real matrix.
pub fn eigenvalues_2x2(j: [[f64; 2]; 2]) -> [Eigenvalue; 2] {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [(tr / 2.0 - r, 0.0), (tr / 2.0 + r, 0.0)]
    } else {
        let r = (-disc).sqrt();
        [(tr / 2.0, -r), (tr / 2.0, r)]
    }
}

/// Classification from eigenvalues, degenerate cases resolved within `tol`.
pub fn classify_from_eigenvalues(eigs: [Eigenvalue; 2], tol: f64) -> EquilibriumKind {
    let [(r1, i1), (r2, _i2)] = eigs;
    if i1.abs() > tol {
        if r1.abs() <= tol {
            EquilibriumKind::Center
        } else if r1 < 0.0 {
            EquilibriumKind::StableFocus
        } else {
            // No unstable focus arises in this family; classify by sign anyway.
            EquilibriumKind::UnstableNode
        }
    } else if r1.abs() <= tol || r2.abs() <= tol {
        EquilibriumKind::SaddleNode
    } else if r1 < 0.0 && r2 < 0.0 {
        EquilibriumKind::StableNode
    } else if r1 > 0.0 && r2 > 0.0 {
        EquilibriumKind::UnstableNode
    } else {
        EquilibriumKind::Saddle
    }
}

/// Equilibria of the friction gradient subsystem.
///
/// `nu = 0`: a single center at the origin. `0 < nu < 2`: a stable focus.
/// `nu = 2`: the saddle and the unstable node merge into a saddle-node at
/// `(e, v) = (1, -1)` next to the stable node at the origin. `nu > 2`:
/// stable node, saddle and unstable node.
pub fn classify_equilibria(nu: f64) -> Vec<Equilibrium> {
    assert!(nu >= 0.0);
    let tol = 1e-12;
    let mut out = Vec::new();
    let origin = eigenvalues_2x2(gradient_jacobian(nu, 0.0, 0.0));
    out.push(Equilibrium {
        location: (0.0, 0.0),
        kind: classify_from_eigenvalues(origin, tol),
        eigenvalues: origin,
    });
    if nu >= 2.0 {
        let root = (nu * nu - 4.0).sqrt();
        let vs = [-0.5 * (nu - root), -0.5 * (nu + root)];
        for (k, &v) in vs.iter().enumerate() {
            if k == 1 && root == 0.0 {
                continue; // merged with the first at nu = 2
            }
            let eigs = eigenvalues_2x2(gradient_jacobian(nu, v, 1.0));
            out.push(Equilibrium {
                location: (1.0, v),
                kind: classify_from_eigenvalues(eigs, tol),
                eigenvalues: eigs,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct SeparatrixOptions {
    /// Rays used for the bisection trace (`nu <= 2`).
    pub n_rays: usize,
    pub max_radius: f64,
    /// Bisection tolerance in the `(e, v)` plane.
    pub bisect_tol: f64,
    /// Survival horizon for each probe.
    pub horizon: f64,
    /// Displacement along the saddle eigenvectors (`nu > 2`).
    pub eps: f64,
}

impl Default for SeparatrixOptions {
    fn default() -> Self {
        Self { n_rays: 256, max_radius: 6.0, bisect_tol: 1e-4, horizon: 300.0, eps: 1e-6 }
    }
}

/// Trace the boundary of the smoothness domain on the `(e, v)` plane.
///
/// For `nu > 2` the boundary is the saddle's stable manifold, obtained by
/// integrating the gradient subsystem backward in time from points
/// displaced `±eps` along the stable eigenvector. For `0 <= nu <= 2` the
/// boundary is found by bisection on rays from the origin, each probe
/// resolved by direct integration.
pub fn trace_separatrix(nu: f64, opts: &SeparatrixOptions) -> Result<Vec<(f64, f64)>> {
    if nu > 2.0 {
        return Ok(trace_stable_manifold(nu, opts));
    }
    let radii = ray_boundary_radii(nu, opts);
    if radii.iter().all(Option::is_none) {
        return Err(Error::Inconclusive(format!(
            "no blow-up bracket within radius {} for nu = {nu}",
            opts.max_radius
        )));
    }
    let points = radii
        .iter()
        .enumerate()
        .filter_map(|(k, r)| {
            r.map(|rb| {
                let theta = std::f64::consts::TAU * k as f64 / opts.n_rays as f64;
                (rb * theta.cos(), rb * theta.sin())
            })
        })
        .collect();
    Ok(points)
}

/// Boundary radius of the smoothness domain along each of `n_rays` rays
/// from the origin, `None` where the domain extends past `max_radius`.
fn ray_boundary_radii(nu: f64, opts: &SeparatrixOptions) -> Vec<Option<f64>> {
    let probe_opts = IntegrateOptions::probe();
    (0..opts.n_rays)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / opts.n_rays as f64;
            let (de, dv) = (theta.cos(), theta.sin());
            let smooth_at = |r: f64| {
                gradient_probe(nu, r * dv, r * de, opts.horizon, &probe_opts.ode, probe_opts.blowup_threshold)
                    .unwrap_or(false)
            };
            // March outward to bracket the first blow-up radius.
            let step = 0.25;
            let mut lo = 0.0;
            let mut hi = None;
            let mut r = step;
            while r <= opts.max_radius {
                if smooth_at(r) {
                    lo = r;
                } else {
                    hi = Some(r);
                    break;
                }
                r += step;
            }
            let mut hi = hi?;
            while hi - lo > opts.bisect_tol {
                let mid = 0.5 * (lo + hi);
                if smooth_at(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(0.5 * (lo + hi))
        })
        .collect()
}

fn trace_stable_manifold(nu: f64, opts: &SeparatrixOptions) -> Vec<(f64, f64)> {
    let root = (nu * nu - 4.0).sqrt();
    let v_saddle = -0.5 * (nu - root);
    // Stable eigenvector at the saddle is (1, 0) in (v, e) coordinates.
    let probe = AdaptiveOptions { rtol: 1e-10, atol: 1e-12, h_init: 1e-4, min_step: 1e-14, max_step: 0.05 };
    let branch = |sgn: f64| -> Vec<(f64, f64)> {
        let rhs = move |_t: f64, y: &[f64; 2]| {
            // backward time
            [y[1] + y[0] * y[0] + nu * y[0], -y[0] * (1.0 - y[1])]
        };
        let r = opts.max_radius;
        let sol = ode::integrate_adaptive(
            rhs,
            0.0,
            [v_saddle + sgn * opts.eps, 1.0],
            1e4,
            &probe,
            |_, y| y[0].abs() > r || y[1].abs() > r,
        );
        match sol {
            Ok(s) => s.samples.iter().map(|&(_, y)| (y[1], y[0])).collect(),
            Err(_) => Vec::new(),
        }
    };
    let left: Vec<(f64, f64)> = branch(-1.0);
    let right = branch(1.0);
    let mut poly: Vec<(f64, f64)> = left.into_iter().rev().collect();
    poly.push((1.0, v_saddle));
    poly.extend(right);
    poly
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, TAU};

    #[test]
    fn delta_examples() {
        assert_abs_diff_eq!(delta(0.0, 0.0), -1.0);
        assert_abs_diff_eq!(delta(1.0, 0.0), 0.0);
        assert_abs_diff_eq!(delta(0.5, 0.3), -0.15);
    }

    #[test]
    fn delta_p_reduces_to_delta_when_alpha_zero() {
        let (lhs, rhs) = delta_p(0.4, -0.2, 0.7, 0.0, 2.0).unwrap();
        assert_abs_diff_eq!(lhs, delta(0.4, -0.2));
        assert_eq!(rhs, 0.0);
    }

    #[test]
    fn delta_p_arithmetic_example() {
        let (lhs, rhs) = delta_p(0.0, 0.4, 1.0, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(lhs, -0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(rhs, 1.0 / 0.6, epsilon = 1e-12);
    }

    #[test]
    fn delta_p_rejects_invalid_density() {
        assert!(matches!(delta_p(0.0, 1.0, 0.0, 1.0, 2.0), Err(Error::InvalidDensity { .. })));
        assert!(delta_p(0.0, 0.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn harmonic_rotation_of_solution_values() {
        let init = CharState::new(0.0, 1.0, 0.0, 0.0, 0.0);
        let (traj, report) =
            integrate_characteristic(CharSystemKind::Original, init, TAU, &IntegrateOptions::default())
                .unwrap();
        assert!(!report.blew_up);
        let last = traj.last().unwrap();
        assert_abs_diff_eq!(last.v, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(last.e, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(last.v_x, 0.0);
        assert_abs_diff_eq!(last.e_x, 0.0);
    }

    #[test]
    fn tangent_blowup_at_half_pi() {
        // (v, e)(0) = (0, 1): e stays 1, v = -tan(t).
        let init = CharState::new(0.0, 0.0, 0.0, 0.0, 1.0);
        let (traj, report) =
            integrate_characteristic(CharSystemKind::Original, init, 10.0, &IntegrateOptions::default())
                .unwrap();
        assert!(report.blew_up);
        assert_eq!(report.witness, Some(BlowupWitness::VelocityGradient));
        assert_abs_diff_eq!(report.t_star.unwrap(), FRAC_PI_2, epsilon = 1e-3);
        for s in &traj {
            assert_abs_diff_eq!(s.e_x, 1.0, epsilon = 1e-7);
        }
        let mid = traj.iter().find(|s| s.t > 1.0).unwrap();
        assert_abs_diff_eq!(mid.v_x, -mid.t.tan(), epsilon = 1e-5 * (1.0 + mid.v_x.abs()));
    }

    #[test]
    fn smooth_characteristic_is_two_pi_periodic() {
        let init = CharState::new(0.3, 0.2, -0.1, 0.4, 0.1);
        assert!(delta(0.4, 0.1) < 0.0);
        let (traj, report) =
            integrate_characteristic(CharSystemKind::Original, init, TAU, &IntegrateOptions::default())
                .unwrap();
        assert!(!report.blew_up);
        let last = traj.last().unwrap();
        assert_abs_diff_eq!(last.v_x, 0.4, epsilon = 1e-7);
        assert_abs_diff_eq!(last.e_x, 0.1, epsilon = 1e-7);
        // and survives a long horizon
        let (_, report) =
            integrate_characteristic(CharSystemKind::Original, init, 50.0, &IntegrateOptions::default())
                .unwrap();
        assert!(!report.blew_up);
    }

    #[test]
    fn classify_nu_zero_center() {
        let eqs = classify_equilibria(0.0);
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].location, (0.0, 0.0));
        assert_eq!(eqs[0].kind, EquilibriumKind::Center);
    }

    #[test]
    fn classify_nu_one_stable_focus() {
        let eqs = classify_equilibria(1.0);
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].kind, EquilibriumKind::StableFocus);
    }

    #[test]
    fn classify_nu_two_saddle_node() {
        let eqs = classify_equilibria(2.0);
        assert_eq!(eqs.len(), 2);
        assert_eq!(eqs[0].kind, EquilibriumKind::StableNode);
        assert_eq!(eqs[1].kind, EquilibriumKind::SaddleNode);
        assert_abs_diff_eq!(eqs[1].location.1, -1.0);
    }

    #[test]
    fn classify_nu_three_triple() {
        let eqs = classify_equilibria(3.0);
        assert_eq!(eqs.len(), 3);
        assert_eq!(eqs[0].kind, EquilibriumKind::StableNode);
        assert_eq!(eqs[1].kind, EquilibriumKind::Saddle);
        assert_abs_diff_eq!(eqs[1].location.1, -(3.0 - 5.0f64.sqrt()) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eqs[1].location.1, -0.3819660112501051, epsilon = 1e-12);
        assert_eq!(eqs[2].kind, EquilibriumKind::UnstableNode);
        assert_abs_diff_eq!(eqs[2].location.1, -2.618033988749895, epsilon = 1e-12);
    }

    #[test]
    fn membership_examples() {
        assert!(smoothness_membership(0.0, 0.0, 0.0, DEFAULT_MEMBERSHIP_HORIZON));
        // oracle: v' = -1 - v^2 blows at pi/2
        assert!(!smoothness_membership(0.0, 0.0, 1.0, DEFAULT_MEMBERSHIP_HORIZON));
        // friction enlarges the domain
        assert!(smoothness_membership(5.0, 0.0, 0.9, DEFAULT_MEMBERSHIP_HORIZON));
        assert!(!smoothness_membership(0.0, 0.0, 0.9, DEFAULT_MEMBERSHIP_HORIZON));
    }

    #[test]
    fn separatrix_nu3_passes_through_saddle() {
        let opts = SeparatrixOptions::default();
        let poly = trace_separatrix(3.0, &opts).unwrap();
        let v_saddle = -(3.0 - 5.0f64.sqrt()) / 2.0;
        let dmin = poly
            .iter()
            .map(|&(e, v)| ((e - 1.0).powi(2) + (v - v_saddle).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!(dmin < 1e-5, "separatrix misses the saddle by {dmin}");
        // forward integration from an on-curve point returns to the saddle
        let &(e0, v0) = poly
            .iter()
            .find(|&&(e, v)| ((e - 1.0).powi(2) + (v - v_saddle).powi(2)).sqrt() > 0.3)
            .unwrap();
        let rhs = |_t: f64, y: &[f64; 2]| [-y[1] - y[0] * y[0] - 3.0 * y[0], y[0] * (1.0 - y[1])];
        let sol = ode::integrate_adaptive(
            rhs,
            0.0,
            [v0, e0],
            50.0,
            &AdaptiveOptions { rtol: 1e-10, atol: 1e-12, h_init: 1e-4, min_step: 1e-14, max_step: 0.05 },
            |_, y| ((y[1] - 1.0).powi(2) + (y[0] - v_saddle).powi(2)).sqrt() < 1e-4,
        )
        .unwrap();
        assert_eq!(sol.reason, StopReason::Event, "on-curve point did not flow back to the saddle");
    }

    /// Distance from a point to a polyline (segment distances).
    fn dist_to_polyline(p: (f64, f64), poly: &[(f64, f64)]) -> f64 {
        let mut best = f64::INFINITY;
        for w in poly.windows(2) {
            let (ax, ay) = w[0];
            let (bx, by) = w[1];
            let (dx, dy) = (bx - ax, by - ay);
            let len2 = dx * dx + dy * dy;
            let t = if len2 == 0.0 {
                0.0
            } else {
                (((p.0 - ax) * dx + (p.1 - ay) * dy) / len2).clamp(0.0, 1.0)
            };
            let (cx, cy) = (ax + t * dx, ay + t * dy);
            best = best.min(((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt());
        }
        best
    }

    #[test]
    fn separatrix_nu0_matches_delta_zero_curve() {
        let opts = SeparatrixOptions { horizon: 60.0, ..SeparatrixOptions::default() };
        let mut traced = trace_separatrix(0.0, &opts).unwrap();
        traced.push(traced[0]); // rays are in angular order; close the loop
        let in_box = |&(e, v): &(f64, f64)| e.abs() <= 2.0 && v.abs() <= 2.0;
        // exact boundary {v^2 + 2e - 1 = 0} sampled densely inside the box
        let exact: Vec<(f64, f64)> = (0..=2000)
            .map(|i| {
                let v = -2.0 + 4.0 * i as f64 / 2000.0;
                ((1.0 - v * v) / 2.0, v)
            })
            .collect();
        let mut hausdorff = 0.0f64;
        for p in exact.iter().filter(|p| in_box(p)) {
            hausdorff = hausdorff.max(dist_to_polyline(*p, &traced));
        }
        for p in traced.iter().filter(|p| in_box(p)) {
            hausdorff = hausdorff.max(dist_to_polyline(*p, &exact));
        }
        assert!(hausdorff < 1e-3, "Hausdorff distance {hausdorff} exceeds 1e-3");
    }

    #[test]
    fn separatrix_friction_domain_contains_frictionless_domain() {
        // Compare boundary radii ray by ray (aligned by angle): the nu = 0.5
        // domain strictly contains the nu = 0 domain.
        let opts = SeparatrixOptions { n_rays: 64, horizon: 60.0, ..SeparatrixOptions::default() };
        let r0 = ray_boundary_radii(0.0, &opts);
        let r5 = ray_boundary_radii(0.5, &opts);
        let mut compared = 0;
        let mut strictly_larger = 0;
        for (k, (a, b)) in r0.iter().zip(&r5).enumerate() {
            let Some(a) = a else { continue };
            // friction may push the boundary past max_radius: counts as larger
            let b = b.unwrap_or(opts.max_radius);
            compared += 1;
            assert!(b >= a - 2.0 * opts.bisect_tol, "friction domain smaller on ray {k}");
            if b > a + 10.0 * opts.bisect_tol {
                strictly_larger += 1;
            }
        }
        assert!(compared > 16);
        assert!(
            strictly_larger > compared / 4,
            "friction domain not strictly larger ({strictly_larger}/{compared})"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// V^2 + E^2 is conserved along original characteristics.
        #[test]
        fn rotation_invariant(v in -1.5f64..1.5, e in -1.5f64..1.5,
                              vx in -0.6f64..0.6, ex in -0.6f64..0.45) {
            prop_assume!(delta(vx, ex) < -0.05);
            let init = CharState::new(0.0, v, e, vx, ex);
            let (traj, report) = integrate_characteristic(
                CharSystemKind::Original, init, 10.0, &IntegrateOptions::default()).unwrap();
            prop_assert!(!report.blew_up);
            let r0 = v * v + e * e;
            for s in traj {
                prop_assert!((s.v * s.v + s.e * s.e - r0).abs() < 1e-7 * (1.0 + r0));
            }
        }

        /// sign(Delta) never changes while |Delta(0)| is resolvable.
        #[test]
        fn delta_sign_invariant(vx in -2.0f64..2.0, ex in -2.0f64..2.0) {
            let d0 = delta(vx, ex);
            prop_assume!(d0.abs() > 1e-2);
            let init = CharState::new(0.0, 0.0, 0.0, vx, ex);
            let (traj, _) = integrate_characteristic(
                CharSystemKind::Original, init, 30.0, &IntegrateOptions::default()).unwrap();
            for s in traj {
                prop_assert!(delta(s.v_x, s.e_x) * d0 > 0.0,
                    "Delta changed sign at t = {}", s.t);
            }
        }
    }
}
