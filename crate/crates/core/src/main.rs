use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use trainrec::io::{read_cloud_csv, write_cloud_csv};
use trainrec::metrics::{self, DEFAULT_SHIFT_GRID};
use trainrec::pipeline::{
    plot_data, reconstruct, results_csv, run_experiment, summary_csv, ExperimentConfig, ReconstructOptions,
};
use trainrec::sampler::{sample_cloud_detailed, NoiseModel, NoiseProfile, SamplingPlan};
use trainrec::signal::{make_chirp_like, PeriodicSignal};
use trainrec::solver::ResultDocument;

#[derive(Parser)]
#[command(name = "trainrec", version, about = "Recover a periodic waveform and its period from unsynchronized sample trains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a built-in test signal as JSON.
    Synth {
        #[arg(long, value_enum, default_value = "chirp")]
        kind: Kind,
        #[arg(long, default_value_t = 1.0)]
        period: f64,
        /// Amplitude of the sine; ignored for the chirp.
        #[arg(long, default_value_t = 2.0)]
        amplitude: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a cloud of noisy sample trains from a signal.
    Sample {
        /// Signal JSON written by `synth`.
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long)]
        n: usize,
        /// Total noise standard deviation.
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, value_enum, default_value = "gaussian")]
        noise: Noise,
        /// Quantization step, 0 for none.
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct period and waveform from a cloud file.
    Reconstruct {
        #[arg(long)]
        cloud: PathBuf,
        /// Overrides the sampling period stored in the cloud header.
        #[arg(long)]
        tau: Option<f64>,
        /// Neighbourhood radius R.
        #[arg(long)]
        radius: f64,
        /// Scan points of the offset search.
        #[arg(long, default_value_t = 2048)]
        grid: usize,
        /// Samples of the output waveform.
        #[arg(long, default_value_t = 2048)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a reconstruction with the reference signal.
    Evaluate {
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        /// Shift lattice size.
        #[arg(long, default_value_t = DEFAULT_SHIFT_GRID)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo sweep described by a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        /// Overrides the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Results CSV; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Summary CSV; overrides the config.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Turn a results CSV into long-format box-plot statistics.
    PlotData {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Chirp,
    Sine,
}

#[derive(Clone, Copy, ValueEnum)]
enum Noise {
    Gaussian,
    Uniform,
}

type BoxError = Box<dyn std::error::Error>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), BoxError> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, BoxError> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn run(cli: Cli) -> Result<(), BoxError> {
    match cli.command {
        Command::Synth {
            kind,
            period,
            amplitude,
            out,
        } => {
            let signal = match kind {
                Kind::Chirp => make_chirp_like(period)?,
                Kind::Sine => PeriodicSignal::sine(period, amplitude)?,
            };
            emit(out.as_deref(), &(signal.to_json() + "\n"))
        }
        Command::Sample {
            signal,
            tau,
            d,
            n,
            sigma,
            noise,
            delta,
            seed,
            out,
        } => {
            let signal = PeriodicSignal::from_json(&fs::read_to_string(signal)?)?;
            let profile = match noise {
                Noise::Gaussian => NoiseProfile::GaussianIsotropic,
                Noise::Uniform => NoiseProfile::UniformBall,
            };
            let plan = SamplingPlan {
                tau,
                d,
                n,
                noise: NoiseModel { sigma, profile },
                quantization_step: delta,
                seed,
            };
            let sampled = sample_cloud_detailed(&signal, &plan)?;
            for w in &sampled.warnings {
                eprintln!("warning: {w}");
            }
            let mut buf = Vec::new();
            write_cloud_csv(&sampled.cloud, &mut buf)?;
            emit(out.as_deref(), std::str::from_utf8(&buf)?)
        }
        Command::Reconstruct {
            cloud,
            tau,
            radius,
            grid,
            resolution,
            out,
        } => {
            let cloud = read_cloud_csv(BufReader::new(fs::File::open(cloud)?), tau)?;
            let options = ReconstructOptions {
                scan_points: grid,
                output_resolution: resolution,
                ..ReconstructOptions::default()
            };
            let result = reconstruct(&cloud, radius, &options)?;
            eprintln!(
                "T = {:.9}  x0 = {:.9}  ({})",
                result.period_estimate,
                result.offset.x0,
                result.offset.orientation.as_str()
            );
            emit(out.as_deref(), &to_json(&result.to_document())?)
        }
        Command::Evaluate {
            result,
            reference,
            grid,
            out,
        } => {
            let doc: ResultDocument = serde_json::from_str(&fs::read_to_string(result)?)?;
            let reference = PeriodicSignal::from_json(&fs::read_to_string(reference)?)?;
            let report = metrics::evaluate(&reference, &doc.signal_estimate()?, grid);
            emit(out.as_deref(), &to_json(&report)?)
        }
        Command::Experiment {
            config,
            trials,
            seed,
            out,
            summary,
        } => {
            let mut config = ExperimentConfig::from_json(&fs::read_to_string(config)?)?;
            if let Some(t) = trials {
                config.trials = t;
            }
            if let Some(s) = seed {
                config.master_seed = s;
            }
            if out.is_some() {
                config.output.results = out;
            }
            if summary.is_some() {
                config.output.summary = summary;
            }
            let output = run_experiment(&config)?;
            emit(config.output.results.as_deref(), &results_csv(&output.rows))?;
            if let Some(path) = &config.output.summary {
                fs::write(path, summary_csv(&output.summaries))?;
            }
            Ok(())
        }
        Command::PlotData { results, out } => {
            let table = plot_data(&fs::read_to_string(results)?)?;
            emit(out.as_deref(), &table)
        }
    }
}
