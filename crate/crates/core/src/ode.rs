//! Embedded Dormand-Prince 5(4) integrator with PI-free step control and an
//! event predicate that halts integration (used for blow-up detection).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub min_step: f64,
    pub max_step: f64,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_init: 1e-3, min_step: 1e-14, max_step: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Completed,
    Event,
}

#[derive(Debug, Clone)]
pub struct OdeSolution<const N: usize> {
    /// Accepted steps `(t, y)`, including the initial condition.
    pub samples: Vec<(f64, [f64; N])>,
    pub reason: StopReason,
}

impl<const N: usize> OdeSolution<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        *self.samples.last().unwrap()
    }
}

const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// Difference between the 5th- and 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

/// Integrate `dy/dt = f(t, y)` from `t0` to `t_end`, stopping early when
/// `event` returns true on an accepted state. Step underflow below
/// `min_step` without an event is reported as stiffness.
pub fn integrate_adaptive<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &AdaptiveOptions,
    mut event: impl FnMut(f64, &[f64; N]) -> bool,
) -> Result<OdeSolution<N>> {
    assert!(t_end > t0);
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.h_init.min(t_end - t0).min(opts.max_step);
    let mut samples = vec![(t, y)];
    if event(t, &y) {
        return Ok(OdeSolution { samples, reason: StopReason::Event });
    }
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, &y);
    loop {
        if t >= t_end {
            return Ok(OdeSolution { samples, reason: StopReason::Completed });
        }
        h = h.min(t_end - t);
        let stage = |acc: &mut [f64; N], coeffs: &[f64], k: &[[f64; N]; 7], y: &[f64; N], h: f64| {
            for i in 0..N {
                let mut s = 0.0;
                for (j, &c) in coeffs.iter().enumerate() {
                    s += c * k[j][i];
                }
                acc[i] = y[i] + h * s;
            }
        };
        let mut yt = [0.0; N];
        stage(&mut yt, &A2, &k, &y, h);
        k[1] = f(t + C[1] * h, &yt);
        stage(&mut yt, &A3, &k, &y, h);
        k[2] = f(t + C[2] * h, &yt);
        stage(&mut yt, &A4, &k, &y, h);
        k[3] = f(t + C[3] * h, &yt);
        stage(&mut yt, &A5, &k, &y, h);
        k[4] = f(t + C[4] * h, &yt);
        stage(&mut yt, &A6, &k, &y, h);
        k[5] = f(t + h, &yt);
        let mut y5 = [0.0; N];
        stage(&mut y5, &B5, &k, &y, h);
        k[6] = f(t + h, &y5);

        // Scaled RMS error of the embedded pair.
        let mut err = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for j in 0..7 {
                e += E[j] * k[j][i];
            }
            e *= h;
            let sc = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / N as f64).sqrt();

        if err <= 1.0 || h <= opts.min_step {
            if !y5.iter().all(|v| v.is_finite()) {
                return Err(Error::NumericalBreakdown { t });
            }
            t += h;
            y = y5;
            k[0] = k[6]; // FSAL
            samples.push((t, y));
            if event(t, &y) {
                return Ok(OdeSolution { samples, reason: StopReason::Event });
            }
            if h <= opts.min_step && err > 1.0 {
                return Err(Error::Stiffness { t, min_step: opts.min_step });
            }
        } else {
            k[0] = f(t, &y); // restore FSAL slot clobbered above
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * fac).clamp(opts.min_step, opts.max_step);
    }
}

/// Least-squares fit of a `w(t) ~ C / (t_star - t)` divergence on the last
/// decade of growth: minimizes the variance of `log w_i + log(t_star - t_i)`
/// over `t_star` by golden-section search.
pub fn fit_blowup_time(samples: &[(f64, f64)]) -> Option<f64> {
    let (t_last, w_max) = *samples.last()?;
    if !(w_max > 0.0) {
        return None;
    }
    let decade: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, w)| *w >= w_max / 10.0 && *w > 0.0)
        .copied()
        .collect();
    if decade.len() < 3 {
        return None;
    }
    let span = (t_last - decade[0].0).max(1e-12);
    let residual = |ts: f64| {
        let logs: Vec<f64> = decade.iter().map(|&(t, w)| w.ln() + (ts - t).ln()).collect();
        let mean = logs.iter().sum::<f64>() / logs.len() as f64;
        logs.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>()
    };
    let mut lo = t_last + 1e-3 * span / w_max.max(1.0);
    let hi = t_last + 100.0 * span;
    // make sure the bracket is open on the left
    lo = lo.max(t_last * (1.0 + 1e-15) + f64::MIN_POSITIVE);
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = residual(x1);
    let mut f2 = residual(x2);
    for _ in 0..200 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = residual(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = residual(x2);
        }
        if (b - a) < 1e-12 * (1.0 + b.abs()) {
            break;
        }
    }
    Some(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn harmonic_oscillator_high_accuracy() {
        let opts = AdaptiveOptions::default();
        let sol = integrate_adaptive(
            |_, y: &[f64; 2]| [-y[1], y[0]],
            0.0,
            [1.0, 0.0],
            std::f64::consts::TAU,
            &opts,
            |_, _| false,
        )
        .unwrap();
        let (t, y) = sol.last();
        assert_abs_diff_eq!(t, std::f64::consts::TAU);
        assert_abs_diff_eq!(y[0], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(y[1], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn tangent_blowup_time() {
        // v' = -1 - v^2, v(0) = 0 -> v = -tan(t), diverges at pi/2.
        let opts = AdaptiveOptions::default();
        let sol = integrate_adaptive(
            |_, y: &[f64; 1]| [-1.0 - y[0] * y[0]],
            0.0,
            [0.0],
            10.0,
            &opts,
            |_, y| y[0].abs() > 1e8,
        )
        .unwrap();
        assert_eq!(sol.reason, StopReason::Event);
        let growth: Vec<(f64, f64)> = sol.samples.iter().map(|&(t, y)| (t, y[0].abs())).collect();
        let t_star = fit_blowup_time(&growth).unwrap();
        assert_abs_diff_eq!(t_star, std::f64::consts::FRAC_PI_2, epsilon = 1e-3);
    }

    #[test]
    fn fit_rejects_flat_series() {
        assert!(fit_blowup_time(&[(0.0, 1.0), (1.0, 1.0)]).is_none());
    }
}
