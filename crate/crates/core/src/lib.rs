//! Reconstruction of an undersampled periodic signal, and of its period, from
//! unsynchronized trains of noisy samples.
//!
//! A train of `d` samples taken `τ` apart is a point in `R^d`. Trains started
//! at random times fill a closed curve traced by the signal; the curve, the
//! density of points along it and the step one sampling period induces on it
//! determine both the waveform and its period.
//!
//! ```
//! use trainrec::pipeline::{reconstruct, ReconstructOptions};
//! use trainrec::sampler::{sample_cloud, NoiseModel};
//! use trainrec::signal::PeriodicSignal;
//!
//! let signal = PeriodicSignal::sine(1.0, 1.0).unwrap();
//! let cloud = sample_cloud(&signal, 0.39, 3, 3000, NoiseModel::gaussian(0.01), 0.0, 7).unwrap();
//! let result = reconstruct(&cloud, 0.05, &ReconstructOptions::default()).unwrap();
//! assert!((result.period_estimate - 1.0).abs() < 1e-2);
//! ```

pub mod curve;
pub mod density;
pub mod error;
pub mod io;
pub mod kdtree;
pub mod metrics;
pub mod pipeline;
pub mod sampler;
pub mod signal;
pub mod solver;

pub use error::{ReconstructError, Stage};
pub use pipeline::{reconstruct, ReconstructOptions};
pub use sampler::{NoiseModel, PointCloud};
pub use signal::PeriodicSignal;
pub use solver::{Orientation, ReconstructionResult};
