//! Synthetic point clouds of noisy sample trains.
//!
//! Each point is the train of the signal at a start time drawn uniformly from
//! one period, plus a radially symmetric noise vector. The noise level `σ` is
//! the *total* standard deviation of the noise vector: `E‖η‖² = σ²`, so for
//! the isotropic Gaussian profile every coordinate has variance `σ²/d`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::SamplerError;
use crate::signal::{check_train_args, PeriodicSignal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseProfile {
    #[default]
    GaussianIsotropic,
    UniformBall,
}

/// Radially symmetric additive noise with total variance `sigma²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma: f64,
    #[serde(default)]
    pub profile: NoiseProfile,
}

impl NoiseModel {
    pub fn gaussian(sigma: f64) -> Self {
        Self {
            sigma,
            profile: NoiseProfile::GaussianIsotropic,
        }
    }

    pub fn uniform_ball(sigma: f64) -> Self {
        Self {
            sigma,
            profile: NoiseProfile::UniformBall,
        }
    }

    pub fn none() -> Self {
        Self::gaussian(0.0)
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.sigma >= 0.0 && self.sigma.is_finite() {
            Ok(())
        } else {
            Err(SamplerError::InvalidNoise(self.sigma))
        }
    }

    /// Radius of the uniform ball whose total variance is `sigma²`.
    fn ball_radius(&self, d: usize) -> f64 {
        let d = d as f64;
        self.sigma * ((d + 2.0) / d).sqrt()
    }

    /// Normalizing constant `c_d` in `f_σ(x) = c_d σ^{-d} g(‖x‖/σ)`, where the
    /// radial shape is `g(ρ) = exp(−dρ²/2)` (Gaussian) or the indicator of
    /// `ρ ≤ √((d+2)/d)` (uniform ball).
    pub fn normalizer(&self, d: usize) -> f64 {
        let df = d as f64;
        match self.profile {
            NoiseProfile::GaussianIsotropic => (df / (2.0 * PI)).powf(df / 2.0),
            NoiseProfile::UniformBall => {
                1.0 / (unit_ball_volume(d) * ((df + 2.0) / df).powf(df / 2.0))
            }
        }
    }

    /// Probability density of the noise vector at `x`.
    pub fn density(&self, x: &[f64]) -> f64 {
        let d = x.len();
        let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt() / self.sigma;
        let shape = match self.profile {
            NoiseProfile::GaussianIsotropic => (-(d as f64) * rho * rho / 2.0).exp(),
            NoiseProfile::UniformBall => {
                if rho <= ((d as f64 + 2.0) / d as f64).sqrt() {
                    1.0
                } else {
                    0.0
                }
            }
        };
        self.normalizer(d) * self.sigma.powi(-(d as i32)) * shape
    }

    /// Adds one noise draw to `out`.
    pub fn perturb<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        if self.sigma == 0.0 {
            return;
        }
        let d = out.len();
        match self.profile {
            NoiseProfile::GaussianIsotropic => {
                let per_coord = self.sigma / (d as f64).sqrt();
                for v in out.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *v += per_coord * z;
                }
            }
            NoiseProfile::UniformBall => {
                let mut dir = vec![0.0; d];
                let norm = loop {
                    for v in dir.iter_mut() {
                        *v = rng.sample(StandardNormal);
                    }
                    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm > 0.0 {
                        break norm;
                    }
                };
                let u: f64 = rng.random();
                let radius = self.ball_radius(d) * u.powf(1.0 / d as f64);
                for (v, w) in out.iter_mut().zip(&dir) {
                    *v += radius * w / norm;
                }
            }
        }
    }
}

fn unit_ball_volume(d: usize) -> f64 {
    // V_d = 2π/d · V_{d-2}, V_0 = 1, V_1 = 2
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// `n` points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    pub tau: f64,
    pub seed: Option<u64>,
    pub quantization_step: f64,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>, tau: f64) -> Result<Self, SamplerError> {
        if dim == 0 || coords.is_empty() {
            return Err(SamplerError::EmptyCloud);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(SamplerError::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        Ok(Self {
            dim,
            coords,
            tau,
            seed: None,
            quantization_step: 0.0,
        })
    }

    pub fn from_points(points: &[Vec<f64>], tau: f64) -> Result<Self, SamplerError> {
        let dim = points.first().map(Vec::len).ok_or(SamplerError::EmptyCloud)?;
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(SamplerError::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::new(dim, coords, tau)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Same points in reverse order (metadata kept).
    pub fn reversed(&self) -> Self {
        let mut coords = Vec::with_capacity(self.coords.len());
        for p in self.coords.chunks_exact(self.dim).rev() {
            coords.extend_from_slice(p);
        }
        Self { coords, ..self.clone() }
    }
}

/// Non-fatal sampling conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplerWarning {
    /// `τ ≥ T/2`: the period can no longer be recovered unambiguously.
    TauTooLarge { tau: f64, period: f64 },
}

impl std::fmt::Display for SamplerWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SamplerWarning::TauTooLarge { tau, period } => write!(
                f,
                "tau = {tau} is not below half the period {period}; the period cannot be recovered"
            ),
        }
    }
}

/// Returns a warning when `tau` violates `τ < T/2`.
pub fn check_tau(signal: &PeriodicSignal, tau: f64) -> Option<SamplerWarning> {
    (tau >= signal.period() / 2.0).then_some(SamplerWarning::TauTooLarge {
        tau,
        period: signal.period(),
    })
}

/// A sampled cloud along with the start times that generated it.
#[derive(Debug, Clone)]
pub struct SampledCloud {
    pub cloud: PointCloud,
    pub start_times: Vec<f64>,
    pub warnings: Vec<SamplerWarning>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingPlan {
    pub tau: f64,
    pub d: usize,
    pub n: usize,
    pub noise: NoiseModel,
    pub quantization_step: f64,
    pub seed: u64,
}

/// Draws `n` noisy trains. See [`sample_cloud_detailed`].
pub fn sample_cloud(
    signal: &PeriodicSignal,
    tau: f64,
    d: usize,
    n: usize,
    noise: NoiseModel,
    quantization_step: f64,
    seed: u64,
) -> Result<PointCloud, SamplerError> {
    let plan = SamplingPlan {
        tau,
        d,
        n,
        noise,
        quantization_step,
        seed,
    };
    sample_cloud_detailed(signal, &plan).map(|s| s.cloud)
}

/// Draws `plan.n` trains at i.i.d. uniform start times in `[0, T)`, adds noise
/// and, for `quantization_step > 0`, rounds every coordinate to the nearest
/// multiple of the step. For each point the RNG stream is consumed as: start
/// time, then the noise vector. Identical plans give bit-identical clouds.
pub fn sample_cloud_detailed(
    signal: &PeriodicSignal,
    plan: &SamplingPlan,
) -> Result<SampledCloud, SamplerError> {
    check_train_args(plan.tau, plan.d)?;
    plan.noise.validate()?;
    if !(plan.quantization_step >= 0.0 && plan.quantization_step.is_finite()) {
        return Err(SamplerError::InvalidQuantization(plan.quantization_step));
    }
    if plan.n == 0 {
        return Err(SamplerError::EmptyCloud);
    }
    let warnings: Vec<_> = check_tau(signal, plan.tau).into_iter().collect();
    for w in &warnings {
        log::warn!("{w}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let period = signal.period();
    let step = plan.quantization_step;
    let mut coords = vec![0.0; plan.n * plan.d];
    let mut start_times = Vec::with_capacity(plan.n);
    for point in coords.chunks_exact_mut(plan.d) {
        let t = period * rng.random::<f64>();
        start_times.push(t);
        signal.fill_train(t, plan.tau, point);
        plan.noise.perturb(&mut rng, point);
        if step > 0.0 {
            for v in point.iter_mut() {
                *v = (*v / step).round() * step;
            }
        }
    }
    let mut cloud = PointCloud::new(plan.d, coords, plan.tau)?;
    cloud.seed = Some(plan.seed);
    cloud.quantization_step = step;
    Ok(SampledCloud {
        cloud,
        start_times,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn saw() -> PeriodicSignal {
        PeriodicSignal::sawtooth(1.0, 1024).unwrap()
    }

    #[test]
    fn noiseless_points_are_exact_trains() {
        let s = saw();
        let plan = SamplingPlan {
            tau: 0.25,
            d: 3,
            n: 3,
            noise: NoiseModel::none(),
            quantization_step: 0.0,
            seed: 11,
        };
        let out = sample_cloud_detailed(&s, &plan).unwrap();
        for (p, &t) in out.cloud.points().zip(&out.start_times) {
            let train = s.extract_train(t, 0.25, 3).unwrap();
            assert_eq!(p, train.values.as_slice());
        }
    }

    #[test]
    fn quantized_coordinates_are_multiples_of_step() {
        let s = PeriodicSignal::sine(1.0, 2.0).unwrap();
        let cloud = sample_cloud(&s, 0.39, 3, 500, NoiseModel::none(), 0.02, 5).unwrap();
        for v in cloud.coords() {
            let k = v / 0.02;
            assert!((k - k.round()).abs() < 1e-9, "{v}");
        }
        assert_eq!(cloud.quantization_step, 0.02);
    }

    #[test]
    fn identical_seeds_identical_clouds() {
        let s = PeriodicSignal::sine(1.0, 1.0).unwrap();
        let a = sample_cloud(&s, 0.3, 4, 200, NoiseModel::gaussian(0.1), 0.0, 99).unwrap();
        let b = sample_cloud(&s, 0.3, 4, 200, NoiseModel::gaussian(0.1), 0.0, 99).unwrap();
        let c = sample_cloud(&s, 0.3, 4, 200, NoiseModel::gaussian(0.1), 0.0, 98).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn tau_warning_and_noise_error() {
        let s = PeriodicSignal::sine(1.0, 1.0).unwrap();
        assert!(check_tau(&s, 0.49).is_none());
        assert!(matches!(
            check_tau(&s, 0.5),
            Some(SamplerWarning::TauTooLarge { .. })
        ));
        let plan = SamplingPlan {
            tau: 0.6,
            d: 2,
            n: 4,
            noise: NoiseModel::none(),
            quantization_step: 0.0,
            seed: 0,
        };
        assert_eq!(sample_cloud_detailed(&s, &plan).unwrap().warnings.len(), 1);
        assert!(matches!(
            sample_cloud(&s, 0.3, 2, 4, NoiseModel::gaussian(-1.0), 0.0, 0),
            Err(SamplerError::InvalidNoise(_))
        ));
    }

    #[test]
    fn noise_density_integrates_to_one_in_the_plane() {
        for noise in [NoiseModel::gaussian(0.5), NoiseModel::uniform_ball(0.5)] {
            let h = 0.005;
            let mut total = 0.0;
            let mut x = -3.0;
            while x < 3.0 {
                let mut y = -3.0;
                while y < 3.0 {
                    total += noise.density(&[x + h / 2.0, y + h / 2.0]) * h * h;
                    y += h;
                }
                x += h;
            }
            assert!((total - 1.0).abs() < 5e-3, "{noise:?}: {total}");
        }
    }

    #[test]
    fn total_variance_convention() {
        for noise in [NoiseModel::gaussian(0.3), NoiseModel::uniform_ball(0.3)] {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let n = 40_000;
            let d = 3;
            let mut sum_sq = 0.0;
            let mut mean = [0.0; 3];
            for _ in 0..n {
                let mut v = [0.0; 3];
                noise.perturb(&mut rng, &mut v);
                sum_sq += v.iter().map(|x| x * x).sum::<f64>();
                for k in 0..d {
                    mean[k] += v[k] / n as f64;
                }
            }
            let var = sum_sq / n as f64;
            assert!((var / 0.09 - 1.0).abs() < 0.03, "{noise:?}: {var}");
            assert!(mean.iter().all(|m| m.abs() < 0.01));
        }
    }
}
