//! End-to-end reconstruction and the Monte Carlo experiment harness.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{build_chain_with, fit_closed_curve, ChainOptions};
use crate::density::{estimate_density, invert_density, UniformTimeCurve, DEFAULT_WARP_GRID};
use crate::error::{ConfigError, CurveError, ReconstructError, SolverError, Stage};
use crate::kdtree::KdTree;
use crate::metrics::{self, DEFAULT_SHIFT_GRID};
use crate::sampler::{sample_cloud, NoiseModel, NoiseProfile, PointCloud};
use crate::signal::{make_chirp_like, PeriodicSignal};
use crate::solver::{
    assemble_signal, find_offset_with, OffsetOptions, ReconstructionMetadata, ReconstructionResult,
    DEFAULT_QUADRATURE_POINTS, DEFAULT_SCAN_POINTS,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReconstructOptions {
    /// Points of the tabulated time warp.
    pub warp_grid: usize,
    pub scan_points: usize,
    pub quadrature_points: usize,
    /// Samples of the output waveform over one period.
    pub output_resolution: usize,
    /// Clouds smaller than this are rejected before the curve stage.
    pub min_points: usize,
    pub denoise_iterations: usize,
    pub max_improvement_passes: usize,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        let chain = ChainOptions::default();
        Self {
            warp_grid: DEFAULT_WARP_GRID,
            scan_points: DEFAULT_SCAN_POINTS,
            quadrature_points: DEFAULT_QUADRATURE_POINTS,
            output_resolution: 2048,
            min_points: 50,
            denoise_iterations: chain.denoise_iterations,
            max_improvement_passes: chain.max_improvement_passes,
        }
    }
}

impl ReconstructOptions {
    fn chain(&self) -> ChainOptions {
        ChainOptions {
            denoise_iterations: self.denoise_iterations,
            max_improvement_passes: self.max_improvement_passes,
        }
    }
}

/// Period and waveform from an unsynchronized cloud of sample trains.
pub fn reconstruct(
    cloud: &PointCloud,
    radius: f64,
    options: &ReconstructOptions,
) -> Result<ReconstructionResult, ReconstructError> {
    let curve_err = |e: CurveError| ReconstructError::new(Stage::Curve, e);
    if cloud.len() < options.min_points {
        return Err(curve_err(CurveError::TooFewPoints(cloud.len())));
    }
    let chain = build_chain_with(cloud, radius, &options.chain()).map_err(curve_err)?;
    let curve = fit_closed_curve(&chain).map_err(curve_err)?;
    log::debug!("chain: {} nodes, curve length {:.6}", chain.len() - 1, curve.length());

    let density_err = |e| ReconstructError::new(Stage::Density, e);
    let profile = estimate_density(cloud, &curve, &chain, radius).map_err(density_err)?;
    let uniform = invert_density(&profile, &curve, options.warp_grid).map_err(density_err)?;

    let offset = find_offset_with(
        &uniform,
        &OffsetOptions {
            scan_points: options.scan_points,
            quadrature_points: options.quadrature_points,
        },
    )
    .map_err(|e| ReconstructError::new(Stage::Offset, e))?;
    log::debug!("x0 = {:.9}, F = {:.3e}", offset.x0, offset.objective);

    if options.output_resolution < 2 {
        return Err(ReconstructError::new(
            Stage::Assembly,
            SolverError::InvalidInput("output resolution must be at least 2".into()),
        ));
    }
    let (period_estimate, signal_estimate) =
        assemble_signal(&uniform, &offset, cloud.tau, options.output_resolution)
            .map_err(|e| ReconstructError::new(Stage::Assembly, e))?;

    let metadata = ReconstructionMetadata {
        radius,
        d: cloud.dim(),
        n: cloud.len(),
        tau: cloud.tau,
        seed: cloud.seed,
        chain_nodes: chain.len() - 1,
        curve_length: curve.length(),
    };
    Ok(ReconstructionResult {
        period_estimate,
        signal_estimate,
        offset,
        curve: uniform,
        metadata,
    })
}

/// Relative RMS error of the estimated arc-length PDF at the chain nodes
/// against the pushforward law `1/(T‖samp′‖)` of the true signal.
///
/// Each node is matched to the nearest point of a dense sampling of the true
/// curve; the speed there comes from a central difference.
pub fn density_error(signal: &PeriodicSignal, tau: f64, curve: &UniformTimeCurve) -> f64 {
    const DENSE: usize = 16384;
    let d = curve.dim();
    let period = signal.period();
    let mut dense = vec![0.0; DENSE * d];
    for (j, chunk) in dense.chunks_exact_mut(d).enumerate() {
        signal.fill_train(period * j as f64 / DENSE as f64, tau, chunk);
    }
    let tree = KdTree::new(&dense, d);
    let h = period / 2048.0;
    let mut ahead = vec![0.0; d];
    let mut behind = vec![0.0; d];
    let profile = curve.profile();
    let base = curve.base();
    let mut point = vec![0.0; d];
    let (mut sq, mut truth_sum) = (0.0, 0.0);
    for &u in profile.anchors() {
        base.point_into(u, &mut point);
        let (j, _) = tree.nearest(&point).expect("dense curve is non-empty");
        let t = period * j as f64 / DENSE as f64;
        signal.fill_train(t + h, tau, &mut ahead);
        signal.fill_train(t - h, tau, &mut behind);
        let speed = ahead
            .iter()
            .zip(&behind)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
            / (2.0 * h);
        let truth = 1.0 / (period * speed);
        let diff = profile.pdf(u) - truth;
        sq += diff * diff;
        truth_sum += truth;
    }
    let count = profile.anchors().len() as f64;
    (sq / count).sqrt() / (truth_sum / count)
}

/// Test signal of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SignalSource {
    Builtin {
        builtin: BuiltinSignal,
        #[serde(default = "unit_period")]
        period: f64,
    },
    Inline(PeriodicSignal),
}

fn unit_period() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinSignal {
    /// Frequency-modulated test waveform, 4 V peak to peak.
    Chirp,
    /// `2·sin(2πt/T)`.
    Sine,
}

impl SignalSource {
    pub fn build(&self) -> Result<PeriodicSignal, ConfigError> {
        Ok(match self {
            SignalSource::Builtin { builtin, period } => match builtin {
                BuiltinSignal::Chirp => make_chirp_like(*period)?,
                BuiltinSignal::Sine => PeriodicSignal::sine(*period, 2.0)?,
            },
            SignalSource::Inline(s) => s.clone(),
        })
    }
}

/// How the neighbourhood radius is chosen per cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusRule {
    Absolute(f64),
    SigmaMultiple(f64),
    DeltaMultiple(f64),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    /// One row per trial.
    pub results: Option<PathBuf>,
    /// One row per `(d, n)` cell.
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub signal: SignalSource,
    /// `τ/T`, must be below one half.
    pub tau_ratio: f64,
    pub d_values: Vec<usize>,
    pub n_values: Vec<usize>,
    /// Total noise standard deviation in volts.
    pub sigma: f64,
    #[serde(default)]
    pub noise_profile: NoiseProfile,
    /// Quantization step `Δ` in volts, 0 for none.
    #[serde(default)]
    pub delta: f64,
    pub radius: RadiusRule,
    pub trials: usize,
    pub master_seed: u64,
    /// Worker threads, 0 for all cores.
    #[serde(default)]
    pub threads: usize,
    #[serde(default = "default_shift_grid")]
    pub shift_grid: usize,
    #[serde(default)]
    pub options: ReconstructOptions,
    #[serde(default)]
    pub output: OutputPaths,
}

fn default_shift_grid() -> usize {
    DEFAULT_SHIFT_GRID
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(self.tau_ratio > 0.0 && self.tau_ratio < 0.5) {
            return bad(format!("tau_ratio must lie in (0, 1/2), got {}", self.tau_ratio));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.d_values.is_empty() || self.n_values.is_empty() {
            return bad("d_values and n_values must be non-empty".into());
        }
        if let Some(d) = self.d_values.iter().find(|&&d| d < 2) {
            return bad(format!("every d must be at least 2, got {d}"));
        }
        if self.n_values.contains(&0) {
            return bad("every n must be positive".into());
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be non-negative, got {}", self.sigma));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be non-negative, got {}", self.delta));
        }
        let r = self.radius_value();
        if !(r > 0.0 && r.is_finite()) {
            return bad(format!("radius rule {:?} yields R = {r}", self.radius));
        }
        self.signal.build()?;
        Ok(())
    }

    pub fn radius_value(&self) -> f64 {
        match self.radius {
            RadiusRule::Absolute(r) => r,
            RadiusRule::SigmaMultiple(k) => k * self.sigma,
            RadiusRule::DeltaMultiple(k) => k * self.delta,
        }
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            sigma: self.sigma,
            profile: self.noise_profile,
        }
    }
}

/// Sub-seed of one trial, a SplitMix64 hash of the master seed and the
/// trial coordinates. Independent of execution order.
pub fn trial_seed(master: u64, d: usize, n: usize, trial: usize) -> u64 {
    let mut x = master;
    for v in [d as u64, n as u64, trial as u64] {
        x = splitmix64(x ^ splitmix64(v));
    }
    x
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub d: usize,
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub sigma: f64,
    pub delta: f64,
    pub radius: f64,
    pub tau: f64,
    pub period: f64,
    pub outcome: TrialOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrialOutcome {
    Success(TrialMeasures),
    Failure { stage: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialMeasures {
    pub period_estimate: f64,
    pub x0: f64,
    pub reversed: bool,
    pub eps_t: f64,
    pub eps_2: f64,
    pub eps_inf: f64,
    pub best_shift: f64,
    pub density_error: f64,
    pub chain_nodes: usize,
}

impl TrialRow {
    pub fn measures(&self) -> Option<&TrialMeasures> {
        match &self.outcome {
            TrialOutcome::Success(m) => Some(m),
            TrialOutcome::Failure { .. } => None,
        }
    }
}

/// Min, quartiles (linear interpolation between order statistics) and max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self {
            min: v[0],
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub const SUMMARY_METRICS: [&str; 4] = ["eps_t", "eps_2", "eps_inf", "density_error"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub d: usize,
    pub n: usize,
    pub successes: usize,
    pub failures: usize,
    /// Per metric in [`SUMMARY_METRICS`] order; `None` without successes.
    pub stats: Vec<Option<FiveNumber>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    /// Ordered by `d`, then `n`, then trial index.
    pub rows: Vec<TrialRow>,
    pub summaries: Vec<CellSummary>,
}

/// Runs every `(d, n, trial)` combination. Failed trials become rows with a
/// failure stage; the sweep never aborts on them.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, ConfigError> {
    config.validate()?;
    let signal = config.signal.build()?;
    let tau = config.tau_ratio * signal.period();
    let radius = config.radius_value();
    let jobs: Vec<(usize, usize, usize)> = config
        .d_values
        .iter()
        .flat_map(|&d| {
            config
                .n_values
                .iter()
                .flat_map(move |&n| (0..config.trials).map(move |t| (d, n, t)))
        })
        .collect();

    let run = || -> Result<Vec<TrialRow>, ConfigError> {
        jobs.par_iter()
            .map(|&(d, n, trial)| run_trial(config, &signal, tau, radius, d, n, trial))
            .collect()
    };
    let rows = if config.threads == 0 {
        run()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?
            .install(run)?
    };

    let summaries = summarize(&rows);
    Ok(ExperimentOutput { rows, summaries })
}

fn run_trial(
    config: &ExperimentConfig,
    signal: &PeriodicSignal,
    tau: f64,
    radius: f64,
    d: usize,
    n: usize,
    trial: usize,
) -> Result<TrialRow, ConfigError> {
    let seed = trial_seed(config.master_seed, d, n, trial);
    let cloud = sample_cloud(signal, tau, d, n, config.noise(), config.delta, seed)?;
    let outcome = match reconstruct(&cloud, radius, &config.options) {
        Ok(result) => {
            let report = metrics::evaluate(signal, &result.signal_estimate, config.shift_grid);
            TrialOutcome::Success(TrialMeasures {
                period_estimate: result.period_estimate,
                x0: result.offset.x0,
                reversed: result.offset.orientation == crate::solver::Orientation::Reversed,
                eps_t: report.eps_t,
                eps_2: report.eps_2,
                eps_inf: report.eps_inf,
                best_shift: report.best_shift,
                density_error: density_error(signal, tau, &result.curve),
                chain_nodes: result.metadata.chain_nodes,
            })
        }
        Err(e) => {
            log::info!("trial d={d} n={n} #{trial} failed: {e}");
            TrialOutcome::Failure {
                stage: e.stage.as_str().to_string(),
                message: e.source.to_string(),
            }
        }
    };
    Ok(TrialRow {
        d,
        n,
        trial,
        seed,
        sigma: config.sigma,
        delta: config.delta,
        radius,
        tau,
        period: signal.period(),
        outcome,
    })
}

/// Box-plot statistics per `(d, n)` cell, in first-appearance order.
pub fn summarize(rows: &[TrialRow]) -> Vec<CellSummary> {
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for r in rows {
        if !cells.contains(&(r.d, r.n)) {
            cells.push((r.d, r.n));
        }
    }
    cells
        .into_iter()
        .map(|(d, n)| {
            let ok: Vec<&TrialMeasures> = rows
                .iter()
                .filter(|r| r.d == d && r.n == n)
                .filter_map(TrialRow::measures)
                .collect();
            let total = rows.iter().filter(|r| r.d == d && r.n == n).count();
            let column = |f: fn(&TrialMeasures) -> f64| {
                let v: Vec<f64> = ok.iter().map(|m| f(m)).collect();
                FiveNumber::of(&v)
            };
            CellSummary {
                d,
                n,
                successes: ok.len(),
                failures: total - ok.len(),
                stats: vec![
                    column(|m| m.eps_t),
                    column(|m| m.eps_2),
                    column(|m| m.eps_inf),
                    column(|m| m.density_error),
                ],
            }
        })
        .collect()
}

pub const RESULTS_HEADER: &str = "d,n,trial,seed,sigma,delta,radius,tau,period,status,failure_stage,failure_message,\
period_estimate,x0,orientation,eps_t,eps_2,eps_inf,best_shift,density_error,chain_nodes";

/// Results table, one line per trial. Failed trials leave the measure
/// columns empty.
pub fn results_csv(rows: &[TrialRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},",
            r.d, r.n, r.trial, r.seed, r.sigma, r.delta, r.radius, r.tau, r.period
        );
        match &r.outcome {
            TrialOutcome::Success(m) => {
                let _ = writeln!(
                    out,
                    "ok,,,{},{},{},{},{},{},{},{},{}",
                    m.period_estimate,
                    m.x0,
                    if m.reversed { "reversed" } else { "forward" },
                    m.eps_t,
                    m.eps_2,
                    m.eps_inf,
                    m.best_shift,
                    m.density_error,
                    m.chain_nodes
                );
            }
            TrialOutcome::Failure { stage, message } => {
                let _ = writeln!(out, "failed,{stage},{},,,,,,,,,", sanitize(message));
            }
        }
    }
    out
}

fn sanitize(message: &str) -> String {
    message.replace([',', '\n', '\r'], ";")
}

/// Summary table, one line per cell: success and failure counts, then the
/// five-number summary of every metric. Cells without successes leave the
/// statistics empty.
pub fn summary_csv(summaries: &[CellSummary]) -> String {
    let mut out = String::from("d,n,successes,failures");
    for name in SUMMARY_METRICS {
        for stat in ["min", "q1", "median", "q3", "max"] {
            let _ = write!(out, ",{name}_{stat}");
        }
    }
    out.push('\n');
    for s in summaries {
        let _ = write!(out, "{},{},{},{}", s.d, s.n, s.successes, s.failures);
        for stats in &s.stats {
            match stats {
                Some(f) => {
                    let _ = write!(out, ",{},{},{},{},{}", f.min, f.q1, f.median, f.q3, f.max);
                }
                None => out.push_str(",,,,,"),
            }
        }
        out.push('\n');
    }
    out
}

/// Long-format box-plot table from a results CSV: one line per
/// `(metric, d, n)` with count and five-number summary over successful
/// trials.
pub fn plot_data(results_csv: &str) -> Result<String, ConfigError> {
    let mut lines = results_csv.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| ConfigError::Invalid("empty results file".into()))?
        .split(',')
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| ConfigError::Invalid(format!("results file lacks column '{name}'")))
    };
    let (cd, cn, cs) = (col("d")?, col("n")?, col("status")?);
    let metric_cols: Vec<usize> = SUMMARY_METRICS.iter().map(|m| col(m)).collect::<Result<_, _>>()?;

    // (d, n) -> per-metric values
    let mut cells: BTreeMap<(usize, usize), Vec<Vec<f64>>> = BTreeMap::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(ConfigError::Invalid(format!("row {}: wrong column count", idx + 2)));
        }
        let parse_usize = |i: usize| {
            fields[i]
                .parse::<usize>()
                .map_err(|_| ConfigError::Invalid(format!("row {}: bad integer '{}'", idx + 2, fields[i])))
        };
        let key = (parse_usize(cd)?, parse_usize(cn)?);
        let cell = cells.entry(key).or_insert_with(|| vec![Vec::new(); SUMMARY_METRICS.len()]);
        if fields[cs] != "ok" {
            continue;
        }
        for (slot, &c) in cell.iter_mut().zip(&metric_cols) {
            let v: f64 = fields[c]
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("row {}: bad number '{}'", idx + 2, fields[c])))?;
            slot.push(v);
        }
    }

    let mut out = String::from("metric,d,n,count,min,q1,median,q3,max\n");
    for (m, name) in SUMMARY_METRICS.iter().enumerate() {
        for ((d, n), values) in &cells {
            let _ = write!(out, "{name},{d},{n},{},", values[m].len());
            match FiveNumber::of(&values[m]) {
                Some(f) => {
                    let _ = writeln!(out, "{},{},{},{},{}", f.min, f.q1, f.median, f.q3, f.max);
                }
                None => out.push_str(",,,,\n"),
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quantiles() {
        let f = FiveNumber::of(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((f.min, f.q1, f.median, f.q3, f.max), (1.0, 1.75, 2.5, 3.25, 4.0));
        assert!(FiveNumber::of(&[]).is_none());
    }

    #[test]
    fn trial_seeds_differ_per_coordinate() {
        let base = trial_seed(1, 3, 1000, 0);
        assert_ne!(base, trial_seed(1, 3, 1000, 1));
        assert_ne!(base, trial_seed(1, 4, 1000, 0));
        assert_ne!(base, trial_seed(1, 3, 4000, 0));
        assert_ne!(base, trial_seed(2, 3, 1000, 0));
        assert_eq!(base, trial_seed(1, 3, 1000, 0));
    }

    #[test]
    fn too_few_points_is_a_curve_error() {
        let s = PeriodicSignal::sine(1.0, 1.0).unwrap();
        let cloud = sample_cloud(&s, 0.39, 3, 10, NoiseModel::none(), 0.0, 1).unwrap();
        let err = reconstruct(&cloud, 0.1, &ReconstructOptions::default()).unwrap_err();
        assert_eq!(err.stage, Stage::Curve);
        assert!(matches!(
            err.source,
            crate::error::StageError::Curve(CurveError::TooFewPoints(10))
        ));
    }

    #[test]
    fn config_validation() {
        let text = r#"{
            "signal": {"builtin": "sine"},
            "tau_ratio": 0.6, "d_values": [3], "n_values": [100],
            "sigma": 0.01, "radius": {"sigma_multiple": 5.0},
            "trials": 1, "master_seed": 0
        }"#;
        assert!(matches!(ExperimentConfig::from_json(text), Err(ConfigError::Invalid(_))));
        let ok = text.replace("0.6", "0.39");
        let config = ExperimentConfig::from_json(&ok).unwrap();
        assert!((config.radius_value() - 0.05).abs() < 1e-15);
        let zero_trials = ok.replace("\"trials\": 1", "\"trials\": 0");
        assert!(ExperimentConfig::from_json(&zero_trials).is_err());
        let no_sigma = ok.replace("\"sigma\": 0.01", "\"sigma\": 0.0");
        assert!(ExperimentConfig::from_json(&no_sigma).is_err());
    }

    #[test]
    fn failure_rows_keep_column_count() {
        let row = TrialRow {
            d: 3,
            n: 10,
            trial: 0,
            seed: 1,
            sigma: 0.0,
            delta: 0.0,
            radius: 0.1,
            tau: 0.39,
            period: 1.0,
            outcome: TrialOutcome::Failure {
                stage: "curve".into(),
                message: "a, b".into(),
            },
        };
        let csv = results_csv(&[row]);
        let widths: Vec<usize> = csv.lines().map(|l| l.split(',').count()).collect();
        assert_eq!(widths[0], widths[1]);
    }
}
