//! Offset recovery, period estimate and signal assembly.
//!
//! For the uniform-time curve `q̂`, consecutive coordinates of a train are the
//! same waveform shifted by one sampling period, which moves `q̂` by the
//! fractional offset `x₀ = τ/T`. We find `x₀` as the least-squares solution
//! of `π_k q̂(x + (l−k)x₀) = π_l q̂(x)` over all coordinate pairs `k < l`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::UniformTimeCurve;
use crate::error::{SignalError, SolverError};
use crate::signal::PeriodicSignal;

pub const DEFAULT_SCAN_POINTS: usize = 2048;
pub const DEFAULT_QUADRATURE_POINTS: usize = 2048;
pub const MIN_QUADRATURE_POINTS: usize = 256;
/// Tolerance of the golden-section refinement on `x₀`.
pub const OFFSET_TOLERANCE: f64 = 1e-7;
/// Relative gap (of the scanned objective range) below which two distinct
/// minima are considered ambiguous.
pub const AMBIGUITY_RATIO: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Forward,
    Reversed,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Forward => "forward",
            Orientation::Reversed => "reversed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetSearchResult {
    pub x0: f64,
    pub objective: f64,
    pub orientation: Orientation,
    /// `(x, F(x))` over the scan grid.
    pub profile: Vec<(f64, f64)>,
}

impl OffsetSearchResult {
    /// `τ/x₀` going forward, `τ/(1 − x₀)` when reversed.
    pub fn period_estimate(&self, tau: f64) -> f64 {
        match self.orientation {
            Orientation::Forward => tau / self.x0,
            Orientation::Reversed => tau / (1.0 - self.x0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetOptions {
    pub scan_points: usize,
    pub quadrature_points: usize,
}

impl Default for OffsetOptions {
    fn default() -> Self {
        Self {
            scan_points: DEFAULT_SCAN_POINTS,
            quadrature_points: DEFAULT_QUADRATURE_POINTS,
        }
    }
}

/// Search margin: `x₀` is restricted to `[x_min, 1 − x_min]`.
pub fn margin(scan_points: usize) -> f64 {
    2.0 / scan_points as f64
}

/// The least-squares functional
/// `F(x₀) = Σ_{k<l} ∫₀¹ (π_k q̂(x + (l−k)x₀) − π_l q̂(x))² dx`
/// by the periodic trapezoid rule on `quadrature_points` nodes.
pub fn objective_f(curve: &UniformTimeCurve, x0: f64, quadrature_points: usize) -> Result<f64, SolverError> {
    if quadrature_points < MIN_QUADRATURE_POINTS {
        return Err(SolverError::InvalidInput(format!(
            "need at least {MIN_QUADRATURE_POINTS} quadrature points, got {quadrature_points}"
        )));
    }
    let base = curve.sample(quadrature_points);
    Ok(objective_with_base(curve, &base, x0, quadrature_points))
}

/// `F(x₀)` with `q̂` at the quadrature nodes precomputed.
fn objective_with_base(curve: &UniformTimeCurve, base: &[f64], x0: f64, q: usize) -> f64 {
    let d = curve.dim();
    let mut shifted = vec![0.0; d];
    let mut total = 0.0;
    for j in 0..q {
        let x = j as f64 / q as f64;
        let here = &base[j * d..(j + 1) * d];
        for lag in 1..d {
            curve.point_into(x + lag as f64 * x0, &mut shifted);
            for k in 0..d - lag {
                let diff = shifted[k] - here[k + lag];
                total += diff * diff;
            }
        }
    }
    total / q as f64
}

/// Fast `F` on a tabulated curve (linear interpolation between table rows).
struct TabulatedObjective {
    dim: usize,
    rows: usize,
    table: Vec<f64>,
    stride: usize,
}

impl TabulatedObjective {
    fn new(curve: &UniformTimeCurve, quadrature_points: usize) -> Self {
        let stride = 4;
        let rows = quadrature_points * stride;
        Self {
            dim: curve.dim(),
            rows,
            table: curve.sample(rows),
            stride,
        }
    }

    fn eval(&self, x0: f64) -> f64 {
        let d = self.dim;
        let q = self.rows / self.stride;
        let mut shifted = vec![0.0; d];
        let mut total = 0.0;
        for j in 0..q {
            let here = &self.table[j * self.stride * d..(j * self.stride + 1) * d];
            let x = j as f64 / q as f64;
            for lag in 1..d {
                self.interpolate(x + lag as f64 * x0, &mut shifted);
                for k in 0..d - lag {
                    let diff = shifted[k] - here[k + lag];
                    total += diff * diff;
                }
            }
        }
        total / q as f64
    }

    fn interpolate(&self, x: f64, out: &mut [f64]) {
        let pos = (x - x.floor()) * self.rows as f64;
        let i = (pos.floor() as usize).min(self.rows - 1);
        let frac = pos - i as f64;
        let a = &self.table[i * self.dim..(i + 1) * self.dim];
        let b = &self.table[((i + 1) % self.rows) * self.dim..((i + 1) % self.rows + 1) * self.dim];
        for k in 0..self.dim {
            out[k] = a[k] + frac * (b[k] - a[k]);
        }
    }
}

/// Global minimizer of `F` on `(0, 1)`.
pub fn find_offset(curve: &UniformTimeCurve) -> Result<OffsetSearchResult, SolverError> {
    find_offset_with(curve, &OffsetOptions::default())
}

/// Scans `F` on `scan_points` values in `[x_min, 1 − x_min]`, then refines the
/// best bracket by golden-section search on the exact objective. Fails with
/// `AmbiguousMinimum` when another, well-separated local minimum comes
/// within `AMBIGUITY_RATIO` of the objective range; a minimum at `1 − x₀`
/// (the time-reversed twin) does not count.
pub fn find_offset_with(curve: &UniformTimeCurve, options: &OffsetOptions) -> Result<OffsetSearchResult, SolverError> {
    if curve.dim() < 2 {
        return Err(SolverError::InvalidInput("need trains of at least 2 samples".into()));
    }
    if options.scan_points < 8 || options.quadrature_points < MIN_QUADRATURE_POINTS {
        return Err(SolverError::InvalidInput("scan or quadrature grid too small".into()));
    }
    let g = options.scan_points;
    let x_min = margin(g);
    let xs: Vec<f64> = (0..g)
        .map(|j| x_min + (1.0 - 2.0 * x_min) * j as f64 / (g - 1) as f64)
        .collect();
    let fast = TabulatedObjective::new(curve, options.quadrature_points);
    let values: Vec<f64> = xs.par_iter().map(|&x| fast.eval(x)).collect();

    let best = argmin(&values);
    check_ambiguity(&xs, &values, best)?;

    let base = curve.sample(options.quadrature_points);
    let exact = |x: f64| objective_with_base(curve, &base, x, options.quadrature_points);
    let lo = xs[best.saturating_sub(1)];
    let hi = xs[(best + 1).min(g - 1)];
    let (x0, objective) = golden_section(exact, lo, hi, OFFSET_TOLERANCE);
    let orientation = if x0 > 0.5 {
        Orientation::Reversed
    } else {
        Orientation::Forward
    };
    Ok(OffsetSearchResult {
        x0,
        objective,
        orientation,
        profile: xs.into_iter().zip(values).collect(),
    })
}

fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |b, (i, &v)| if v < b.1 { (i, v) } else { b })
        .0
}

fn check_ambiguity(xs: &[f64], values: &[f64], best: usize) -> Result<(), SolverError> {
    let g = values.len();
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if range <= 0.0 {
        return Ok(());
    }
    let threshold = AMBIGUITY_RATIO * range;
    let step = xs[1] - xs[0];
    let minima = (1..g - 1).filter(|&i| values[i] <= values[i - 1] && values[i] <= values[i + 1]);
    for i in minima {
        if i == best || (xs[i] + xs[best] - 1.0).abs() <= 2.0 * step {
            continue;
        }
        if values[i] - values[best] >= threshold {
            continue;
        }
        // Distinct only if a barrier of at least the threshold separates them.
        let (a, b) = if i < best { (i, best) } else { (best, i) };
        let barrier = values[a..=b].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if barrier - values[i].max(values[best]) >= threshold {
            return Err(SolverError::AmbiguousMinimum {
                first: xs[best],
                second: xs[i],
                gap: values[i] - values[best],
            });
        }
    }
    Ok(())
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Output of the full reconstruction.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub period_estimate: f64,
    pub signal_estimate: PeriodicSignal,
    pub offset: OffsetSearchResult,
    pub curve: UniformTimeCurve,
    pub metadata: ReconstructionMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionMetadata {
    pub radius: f64,
    pub d: usize,
    pub n: usize,
    pub tau: f64,
    pub seed: Option<u64>,
    pub chain_nodes: usize,
    pub curve_length: f64,
}

/// Period estimate and the signal averaged over the `d` coordinate estimates,
/// `ŝ(t) = (1/d) Σ_k π_k(q̂(±(t − (k−1)τ)/T̂))`, tabulated at
/// `output_resolution` points over one estimated period. The result is
/// defined up to a time shift.
pub fn assemble_signal(
    curve: &UniformTimeCurve,
    offset: &OffsetSearchResult,
    tau: f64,
    output_resolution: usize,
) -> Result<(f64, PeriodicSignal), SignalError> {
    let period = offset.period_estimate(tau);
    let estimates = coordinate_estimates(curve, offset, tau, output_resolution);
    let d = curve.dim();
    let samples = (0..output_resolution)
        .map(|j| estimates.iter().map(|e| e[j]).sum::<f64>() / d as f64)
        .collect();
    Ok((period, PeriodicSignal::table(period, samples)?))
}

/// The `d` individual estimates `π_k(samp̂(t − (k−1)τ))` on the output grid.
pub fn coordinate_estimates(
    curve: &UniformTimeCurve,
    offset: &OffsetSearchResult,
    tau: f64,
    output_resolution: usize,
) -> Vec<Vec<f64>> {
    let period = offset.period_estimate(tau);
    let sign = match offset.orientation {
        Orientation::Forward => 1.0,
        Orientation::Reversed => -1.0,
    };
    let d = curve.dim();
    let mut out = vec![vec![0.0; output_resolution]; d];
    let mut buf = vec![0.0; d];
    for j in 0..output_resolution {
        let t = period * j as f64 / output_resolution as f64;
        for (k, row) in out.iter_mut().enumerate() {
            curve.point_into(sign * (t - k as f64 * tau) / period, &mut buf);
            row[j] = buf[k];
        }
    }
    out
}

impl ReconstructionResult {
    pub fn to_document(&self) -> ResultDocument {
        let samples = match self.signal_estimate.model() {
            crate::signal::SignalModel::Table(s) => s.clone(),
            crate::signal::SignalModel::Fourier(_) => Vec::new(),
        };
        ResultDocument {
            period_estimate: self.period_estimate,
            x0: self.offset.x0,
            orientation: self.offset.orientation,
            objective: self.offset.objective,
            signal: samples,
            objective_profile: self.offset.profile.clone(),
            metadata: self.metadata.clone(),
        }
    }
}

/// Serialized reconstruction: `T̂`, `x₀`, orientation, tabulated `ŝ` over one
/// estimated period and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub period_estimate: f64,
    pub x0: f64,
    pub orientation: Orientation,
    pub objective: f64,
    pub signal: Vec<f64>,
    pub objective_profile: Vec<(f64, f64)>,
    pub metadata: ReconstructionMetadata,
}

impl ResultDocument {
    pub fn signal_estimate(&self) -> Result<PeriodicSignal, SignalError> {
        PeriodicSignal::table(self.period_estimate, self.signal.clone())
    }
}
