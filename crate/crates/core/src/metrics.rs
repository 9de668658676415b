//! Reconstruction error measures.
//!
//! The estimate is compared against the reference after rescaling its time
//! axis to the true period, `ŝ(t·T̂/T)`, and after the best time shift `t₀` of
//! the reference. The RMS error is the literal `√(∫₀ᵀ e(t)² dt)`, so it
//! carries a factor `√T` (and equals the normalized RMS when `T = 1`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::signal::PeriodicSignal;

/// Time-grid points per period for the inner integral / maximum.
pub const TIME_GRID: usize = 4096;
pub const DEFAULT_SHIFT_GRID: usize = 2048;
pub const MIN_SHIFT_GRID: usize = 256;
/// Largest reference table the shift scan will build.
const MAX_REFERENCE_TABLE: usize = 1 << 22;

/// `|T − T̂|`.
pub fn period_error(t_true: f64, t_est: f64) -> f64 {
    (t_true - t_est).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub eps_t: f64,
    pub eps_2: f64,
    pub eps_inf: f64,
    /// Minimizing shift for `eps_2`.
    pub best_shift: f64,
    /// Minimizing shift for `eps_inf`.
    pub best_shift_inf: f64,
}

/// All three measures at once.
pub fn evaluate(
    reference: &PeriodicSignal,
    estimate: &PeriodicSignal,
    shift_grid: usize,
) -> ErrorReport {
    let t_true = reference.period();
    let t_est = estimate.period();
    let (eps_2, best_shift) = rms_error(reference, estimate, t_true, t_est, shift_grid);
    let (eps_inf, best_shift_inf) = max_error(reference, estimate, t_true, t_est, shift_grid);
    ErrorReport {
        eps_t: period_error(t_true, t_est),
        eps_2,
        eps_inf,
        best_shift,
        best_shift_inf,
    }
}

struct ShiftProblem<'a> {
    reference: &'a PeriodicSignal,
    estimate: Vec<f64>,
    t_true: f64,
}

impl<'a> ShiftProblem<'a> {
    fn new(reference: &'a PeriodicSignal, estimate: &PeriodicSignal, t_true: f64, t_est: f64) -> Self {
        let estimate = (0..TIME_GRID)
            .map(|j| estimate.evaluate(j as f64 / TIME_GRID as f64 * t_est))
            .collect();
        Self {
            reference,
            estimate,
            t_true,
        }
    }

    fn time(&self, j: usize) -> f64 {
        self.t_true * j as f64 / TIME_GRID as f64
    }

    /// `∫₀ᵀ (s_ref(t − t₀) − ŝ(tT̂/T))² dt`, periodic trapezoid rule.
    fn squared(&self, shift: f64) -> f64 {
        let sum: f64 = self
            .estimate
            .iter()
            .enumerate()
            .map(|(j, e)| {
                let diff = self.reference.evaluate(self.time(j) - shift) - e;
                diff * diff
            })
            .sum();
        sum * self.t_true / TIME_GRID as f64
    }

    fn sup(&self, shift: f64) -> f64 {
        self.estimate
            .iter()
            .enumerate()
            .map(|(j, e)| (self.reference.evaluate(self.time(j) - shift) - e).abs())
            .fold(0.0, f64::max)
    }

    /// Pointwise errors `s_ref(t_j − t₀) − ŝ_j` for every lattice shift, in
    /// one pass each. On a common refinement of the time grid and the shift
    /// lattice the reference is tabulated once; otherwise it is evaluated
    /// directly.
    fn scan(&self, shift_grid: usize, reduce: impl Fn(&mut dyn Iterator<Item = f64>) -> f64 + Sync) -> (usize, Vec<f64>) {
        let fine = lcm(TIME_GRID, shift_grid);
        let values: Vec<f64> = if fine <= MAX_REFERENCE_TABLE {
            let table: Vec<f64> = (0..fine)
                .map(|k| self.reference.evaluate(self.t_true * k as f64 / fine as f64))
                .collect();
            let (time_step, shift_step) = (fine / TIME_GRID, fine / shift_grid);
            (0..shift_grid)
                .into_par_iter()
                .map(|i| {
                    let offset = fine - i * shift_step;
                    let mut diffs = self
                        .estimate
                        .iter()
                        .enumerate()
                        .map(|(j, e)| table[(j * time_step + offset) % fine] - e);
                    reduce(&mut diffs)
                })
                .collect()
        } else {
            (0..shift_grid)
                .into_par_iter()
                .map(|i| {
                    let shift = self.t_true * i as f64 / shift_grid as f64;
                    let mut diffs = self
                        .estimate
                        .iter()
                        .enumerate()
                        .map(|(j, e)| self.reference.evaluate(self.time(j) - shift) - e);
                    reduce(&mut diffs)
                })
                .collect()
        };
        // Ties go to the smaller shift.
        let best = values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |b, (i, &v)| if v < b.1 { (i, v) } else { b })
            .0;
        (best, values)
    }
}

fn squared_sum(diffs: &mut dyn Iterator<Item = f64>) -> f64 {
    diffs.map(|x| x * x).sum()
}

fn lcm(a: usize, b: usize) -> usize {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    a / x * b
}

/// `ε₂ = min_{t₀} √(∫₀ᵀ (s_ref(t − t₀) − ŝ(tT̂/T))² dt)` and its minimizer.
///
/// Coarse scan over `shift_grid` shifts, then one parabolic step through the
/// best lattice point and its neighbours.
pub fn rms_error(
    reference: &PeriodicSignal,
    estimate: &PeriodicSignal,
    t_true: f64,
    t_est: f64,
    shift_grid: usize,
) -> (f64, f64) {
    let shift_grid = shift_grid.max(MIN_SHIFT_GRID);
    let problem = ShiftProblem::new(reference, estimate, t_true, t_est);
    let (best, values) = problem.scan(shift_grid, |d| squared_sum(d) * t_true / TIME_GRID as f64);
    let h = t_true / shift_grid as f64;
    let (fm, f0, fp) = (
        values[(best + shift_grid - 1) % shift_grid],
        values[best],
        values[(best + 1) % shift_grid],
    );
    let mut shift = best as f64 * h;
    let mut value = f0;
    let curvature = fm - 2.0 * f0 + fp;
    if curvature > 0.0 {
        let step = 0.5 * h * (fm - fp) / curvature;
        let candidate = shift + step.clamp(-h, h);
        let refined = problem.squared(candidate);
        if refined < value {
            shift = candidate;
            value = refined;
        }
    }
    (value.max(0.0).sqrt(), shift.rem_euclid(t_true))
}

/// `ε_∞ = min_{t₀} max_t |s_ref(t − t₀) − ŝ(tT̂/T)|` and its minimizer.
///
/// Coarse scan, then golden-section search in the bracket around the best
/// lattice point (the objective is only piecewise smooth).
pub fn max_error(
    reference: &PeriodicSignal,
    estimate: &PeriodicSignal,
    t_true: f64,
    t_est: f64,
    shift_grid: usize,
) -> (f64, f64) {
    let shift_grid = shift_grid.max(MIN_SHIFT_GRID);
    let problem = ShiftProblem::new(reference, estimate, t_true, t_est);
    let (best, values) = problem.scan(shift_grid, |d| d.fold(0.0, |m, x| m.max(x.abs())));
    let h = t_true / shift_grid as f64;
    let center = best as f64 * h;
    let (mut lo, mut hi) = (center - h, center + h);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = problem.sup(x1);
    let mut f2 = problem.sup(x2);
    while hi - lo > 1e-9 * t_true {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = problem.sup(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = problem.sup(x2);
        }
    }
    let (mut shift, mut value) = (center, values[best]);
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f < value {
            shift = x;
            value = f;
        }
    }
    (value, shift.rem_euclid(t_true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Harmonic;

    fn sine(amplitude: f64) -> PeriodicSignal {
        PeriodicSignal::sine(1.0, amplitude).unwrap()
    }

    #[test]
    fn period_error_cases() {
        assert_eq!(period_error(1.0, 1.0), 0.0);
        assert!((period_error(1.0, 1.001) - 0.001).abs() < 1e-15);
    }

    #[test]
    fn identical_signals_have_zero_error() {
        let s = crate::signal::make_chirp_like(1.0).unwrap();
        let (e2, _) = rms_error(&s, &s, 1.0, 1.0, 512);
        let (ei, _) = max_error(&s, &s, 1.0, 1.0, 512);
        assert!(e2 < 1e-9);
        assert!(ei < 1e-9);
    }

    #[test]
    fn pure_shift_is_absorbed() {
        let s = sine(1.0);
        // ŝ(t) = s(t − 0.3) ⇒ the best t₀ is 0.3.
        let est_values: Vec<f64> = (0..4096).map(|j| s.evaluate(j as f64 / 4096.0 - 0.3)).collect();
        let est = PeriodicSignal::table(1.0, est_values).unwrap();
        let (e2, shift) = rms_error(&s, &est, 1.0, 1.0, 2048);
        assert!(e2 < 1e-6, "{e2}");
        assert!((shift - 0.3).abs() < 1.0 / 2048.0, "{shift}");
    }

    #[test]
    fn scaled_sine_rms_closed_form() {
        let (e2, shift) = rms_error(&sine(1.0), &sine(1.1), 1.0, 1.0, 1024);
        assert!((e2 - 0.1 * 0.5f64.sqrt()).abs() < 1e-4, "{e2}");
        assert!(shift.min(1.0 - shift) < 1e-3);
    }

    #[test]
    fn constant_offset_max_error() {
        let one = PeriodicSignal::fourier(1.0, vec![Harmonic::new(0, 1.0, 0.0)]).unwrap();
        let other = PeriodicSignal::fourier(1.0, vec![Harmonic::new(0, 1.25, 0.0)]).unwrap();
        let (ei, _) = max_error(&one, &other, 1.0, 1.0, 256);
        assert!((ei - 0.25).abs() < 1e-12);
    }

    #[test]
    fn period_rescaling_compares_one_period_each() {
        // The same waveform at period 1.02 compares equal after rescaling.
        let s = crate::signal::make_chirp_like(1.0).unwrap();
        let stretched = crate::signal::make_chirp_like(1.02).unwrap();
        let report = evaluate(&s, &stretched, 512);
        assert!(report.eps_2 < 1e-9 && report.eps_inf < 1e-9);
        assert!((report.eps_t - 0.02).abs() < 1e-12);
    }

    #[test]
    fn sup_norm_dominates_rms() {
        let s = crate::signal::make_chirp_like(1.0).unwrap();
        let est = PeriodicSignal::fourier(1.0, vec![Harmonic::new(1, 0.3, 1.8), Harmonic::new(2, 0.1, 0.0)]).unwrap();
        let report = evaluate(&s, &est, 512);
        assert!(report.eps_inf >= report.eps_2 / 1.0f64.sqrt() - 1e-9);
    }
}
