//! Periodic test signals and the train map.
//!
//! A [`PeriodicSignal`] is either a finite Fourier series or a table of
//! uniformly spaced samples over one period, evaluated with linear
//! interpolation. Both are exactly periodic because the time argument is
//! reduced to a phase in `[0, 1)` before evaluation.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::SignalError;

/// Minimum number of samples per period for the table model.
pub const MIN_TABLE_SAMPLES: usize = 8;

/// Number of samples used to tabulate the chirp-like test waveform.
pub const CHIRP_TABLE_SAMPLES: usize = 4096;

/// Mean instantaneous frequency of the chirp-like waveform, in cycles per period.
pub const CHIRP_CENTER_CYCLES: f64 = 1.0;
/// Half-width of the frequency sweep, in cycles per period.
pub const CHIRP_SWEEP_CYCLES: f64 = 0.3;
/// Peak-to-peak value of the chirp-like waveform, in volts.
pub const CHIRP_PEAK_TO_PEAK: f64 = 4.0;

/// One term `a cos(2πkt/T) + b sin(2πkt/T)` of a Fourier series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub k: u32,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

impl Harmonic {
    pub fn new(k: u32, a: f64, b: f64) -> Self {
        Self { k, a, b }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SignalModel {
    Fourier(Vec<Harmonic>),
    /// Uniform samples at `t = jT/N`, `j = 0..N`, linearly interpolated.
    Table(Vec<f64>),
}

/// Serialized form of a signal. This is the on-disk document format:
///
/// ```json
/// {"type": "fourier", "period": 1.0, "coefficients": [{"k": 1, "a": 0.0, "b": 1.0}]}
/// {"type": "table", "period": 1.0, "samples": [0.0, 0.5, ...]}
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SignalSpec {
    Fourier {
        period: f64,
        coefficients: Vec<Harmonic>,
    },
    Table {
        period: f64,
        samples: Vec<f64>,
    },
}

/// A `T`-periodic waveform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignalSpec", into = "SignalSpec")]
pub struct PeriodicSignal {
    period: f64,
    model: SignalModel,
    peak_to_peak: f64,
}

impl PeriodicSignal {
    pub fn fourier(period: f64, coefficients: Vec<Harmonic>) -> Result<Self, SignalError> {
        check_period(period)?;
        if coefficients.is_empty() {
            return Err(SignalError::EmptyModel);
        }
        if coefficients
            .iter()
            .any(|h| !h.a.is_finite() || !h.b.is_finite())
        {
            return Err(SignalError::NonFinite);
        }
        let mut signal = Self {
            period,
            model: SignalModel::Fourier(coefficients),
            peak_to_peak: 0.0,
        };
        signal.peak_to_peak = signal.scan_peak_to_peak();
        Ok(signal)
    }

    pub fn table(period: f64, samples: Vec<f64>) -> Result<Self, SignalError> {
        check_period(period)?;
        if samples.len() < MIN_TABLE_SAMPLES {
            return Err(SignalError::TableTooShort {
                len: samples.len(),
                min: MIN_TABLE_SAMPLES,
            });
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(SignalError::NonFinite);
        }
        // Linear interpolation never leaves the sample range.
        let (lo, hi) = min_max(&samples);
        Ok(Self {
            period,
            model: SignalModel::Table(samples),
            peak_to_peak: hi - lo,
        })
    }

    /// `amplitude · sin(2πt/T)`.
    pub fn sine(period: f64, amplitude: f64) -> Result<Self, SignalError> {
        Self::fourier(period, vec![Harmonic::new(1, 0.0, amplitude)])
    }

    /// Rising ramp `s(t) = (t mod T)/T` tabulated with `samples` points.
    pub fn sawtooth(period: f64, samples: usize) -> Result<Self, SignalError> {
        let values = (0..samples).map(|j| j as f64 / samples as f64).collect();
        Self::table(period, values)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn model(&self) -> &SignalModel {
        &self.model
    }

    pub fn peak_to_peak(&self) -> f64 {
        self.peak_to_peak
    }

    /// Value of the signal at time `t`.
    pub fn evaluate(&self, t: f64) -> f64 {
        let phase = (t / self.period).rem_euclid(1.0);
        match &self.model {
            SignalModel::Fourier(terms) => terms
                .iter()
                .map(|h| {
                    let (sin, cos) = (TAU * h.k as f64 * phase).sin_cos();
                    h.a * cos + h.b * sin
                })
                .sum(),
            SignalModel::Table(samples) => interpolate_cyclic(samples, phase),
        }
    }

    /// The train `[s(t), s(t+τ), …, s(t+(d-1)τ)]`.
    pub fn extract_train(&self, t: f64, tau: f64, d: usize) -> Result<SampleTrain, SignalError> {
        check_train_args(tau, d)?;
        let values = (0..d).map(|k| self.evaluate(t + k as f64 * tau)).collect();
        Ok(SampleTrain {
            values,
            start_time: Some(t),
            tau,
        })
    }

    /// Writes the train starting at `t` into `out` (length `d`), without allocating.
    pub fn fill_train(&self, t: f64, tau: f64, out: &mut [f64]) {
        for (k, v) in out.iter_mut().enumerate() {
            *v = self.evaluate(t + k as f64 * tau);
        }
    }

    pub fn to_spec(&self) -> SignalSpec {
        self.clone().into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("signal serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SignalError> {
        serde_json::from_str(text).map_err(|e| SignalError::Parse(e.to_string()))
    }

    /// Same waveform tabulated at `samples` points (useful to turn a Fourier
    /// model into a table).
    pub fn tabulate(&self, samples: usize) -> Result<Self, SignalError> {
        let values = (0..samples)
            .map(|j| self.evaluate(self.period * j as f64 / samples as f64))
            .collect();
        Self::table(self.period, values)
    }

    fn scan_peak_to_peak(&self) -> f64 {
        let max_k = match &self.model {
            SignalModel::Fourier(terms) => terms.iter().map(|h| h.k).max().unwrap_or(0),
            SignalModel::Table(_) => 0,
        };
        let n = (64 * max_k as usize).max(8192);
        let values: Vec<f64> = (0..n)
            .map(|j| self.evaluate(self.period * j as f64 / n as f64))
            .collect();
        let (lo, hi) = min_max(&values);
        hi - lo
    }
}

impl TryFrom<SignalSpec> for PeriodicSignal {
    type Error = SignalError;

    fn try_from(spec: SignalSpec) -> Result<Self, Self::Error> {
        match spec {
            SignalSpec::Fourier {
                period,
                coefficients,
            } => Self::fourier(period, coefficients),
            SignalSpec::Table { period, samples } => Self::table(period, samples),
        }
    }
}

impl From<PeriodicSignal> for SignalSpec {
    fn from(signal: PeriodicSignal) -> Self {
        match signal.model {
            SignalModel::Fourier(coefficients) => SignalSpec::Fourier {
                period: signal.period,
                coefficients,
            },
            SignalModel::Table(samples) => SignalSpec::Table {
                period: signal.period,
                samples,
            },
        }
    }
}

/// `d` consecutive samples spaced `tau` apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleTrain {
    pub values: Vec<f64>,
    /// Known only for synthetic data.
    pub start_time: Option<f64>,
    pub tau: f64,
}

impl SampleTrain {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The fixed chirp-like test waveform.
///
/// `s(t) = sin(2π θ(t/T))` with phase `θ(x) = f₀x + w(1 − cos 2πx)/(2π)`, so
/// the instantaneous frequency `f₀ + w sin 2πx` sweeps between
/// `f₀ − w` and `f₀ + w` cycles per period and returns to its start, which
/// makes the waveform smooth across the period boundary. The tabulated values
/// are centered and scaled to a peak-to-peak of exactly 4 V.
pub fn make_chirp_like(period: f64) -> Result<PeriodicSignal, SignalError> {
    check_period(period)?;
    let n = CHIRP_TABLE_SAMPLES;
    let raw: Vec<f64> = (0..n)
        .map(|j| {
            let x = j as f64 / n as f64;
            let phase = CHIRP_CENTER_CYCLES * x + CHIRP_SWEEP_CYCLES * (1.0 - (TAU * x).cos()) / TAU;
            (TAU * phase).sin()
        })
        .collect();
    let (lo, hi) = min_max(&raw);
    let mid = 0.5 * (lo + hi);
    let scale = CHIRP_PEAK_TO_PEAK / (hi - lo);
    let samples = raw.into_iter().map(|v| (v - mid) * scale).collect();
    PeriodicSignal::table(period, samples)
}

pub(crate) fn check_train_args(tau: f64, d: usize) -> Result<(), SignalError> {
    if d < 2 {
        return Err(SignalError::TrainTooShort(d));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(SignalError::InvalidTau(tau));
    }
    Ok(())
}

fn check_period(period: f64) -> Result<(), SignalError> {
    if period > 0.0 && period.is_finite() {
        Ok(())
    } else {
        Err(SignalError::InvalidPeriod(period))
    }
}

fn interpolate_cyclic(samples: &[f64], phase: f64) -> f64 {
    let n = samples.len();
    let pos = phase * n as f64;
    let i = (pos.floor() as usize).min(n - 1);
    let frac = pos - i as f64;
    let next = samples[(i + 1) % n];
    samples[i] + frac * (next - samples[i])
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}
