use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::wavelet::{Decompose, FilterKind, Image2D, Signal1D};

use super::{add_noise, mse, psnr_from_mse, signal_range, BenchError, Method, TestSignalSpec, IMAGE_RANGE};

pub const CSV_HEADER: &str = "method,signal,sigma,seed,psnr,mse,runtime_s,k_total";

/// The clean reference an experiment scores against.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalSource {
    Generated(TestSignalSpec),
    Samples { name: String, signal: Signal1D },
    /// Scored with a fixed range of 255.
    Image { name: String, image: Image2D },
}

impl SignalSource {
    pub fn name(&self) -> String {
        match self {
            SignalSource::Generated(spec) => spec.signal().name().to_string(),
            SignalSource::Samples { name, .. } | SignalSource::Image { name, .. } => name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub source: SignalSource,
    pub methods: Vec<Method>,
    /// Noise standard deviations, in signal units.
    pub sigmas: Vec<f64>,
    pub repetitions: usize,
    /// Repetition `r` uses seed `base_seed + r`.
    pub base_seed: u64,
    pub filter: FilterKind,
    /// Rescales a 1D reference to this sample standard deviation first.
    pub rescale_sd: Option<f64>,
    /// Give the baselines the true σ instead of their own estimate.
    pub known_sigma: bool,
    /// Measure wall-clock time; otherwise `runtime_s` is written as 0.
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn new(source: SignalSource, methods: Vec<Method>, sigmas: Vec<f64>) -> Self {
        Self {
            source,
            methods,
            sigmas,
            repetitions: 15,
            base_seed: 0,
            filter: FilterKind::D6,
            rescale_sd: None,
            known_sigma: false,
            timing: false,
        }
    }

    fn validate(&self) -> Result<(), BenchError> {
        if self.repetitions == 0 {
            return Err(BenchError::InvalidExperiment("repetitions must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(BenchError::InvalidExperiment("no methods given"));
        }
        if self.sigmas.is_empty() {
            return Err(BenchError::InvalidExperiment("no noise levels given"));
        }
        if let Some(&s) = self.sigmas.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(BenchError::InvalidSigma(s));
        }
        if let Some(sd) = self.rescale_sd {
            if !(sd.is_finite() && sd > 0.0) {
                return Err(BenchError::InvalidExperiment("rescale SD must be positive"));
            }
        }
        Ok(())
    }
}

/// One scored run.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub method: Method,
    pub signal: String,
    pub sigma: f64,
    pub seed: u64,
    pub psnr: f64,
    pub mse: f64,
    pub runtime_s: f64,
    /// Retained (MDL) or nonzero (baseline) coefficient count.
    pub k_total: usize,
    /// Set when the run failed; the numeric fields are then NaN.
    pub error: Option<String>,
}

/// Mean and sample SD over the successful repetitions of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub method: Method,
    pub signal: String,
    pub sigma: f64,
    pub count: usize,
    pub mean_psnr: f64,
    pub sd_psnr: f64,
    pub mean_mse: f64,
    pub sd_mse: f64,
    pub mean_runtime_s: f64,
    pub sd_runtime_s: f64,
    pub mean_k: f64,
    pub sd_k: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    /// In (method, σ, seed) order.
    pub records: Vec<BenchmarkRecord>,
    /// One per (method, σ) cell, in the same order.
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentReport {
    pub fn cell(&self, method: Method, sigma: f64) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.method == method && a.sigma == sigma)
    }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    (mean, sd)
}

/// Aggregates consecutive records of equal (method, σ).
pub fn aggregate(records: &[BenchmarkRecord]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for cell in records.chunk_by(|a, b| a.method == b.method && a.sigma == b.sigma && a.signal == b.signal) {
        let ok: Vec<&BenchmarkRecord> = cell.iter().filter(|r| r.error.is_none()).collect();
        let stat = |f: fn(&BenchmarkRecord) -> f64| mean_sd(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
        let (mean_psnr, sd_psnr) = stat(|r| r.psnr);
        let (mean_mse, sd_mse) = stat(|r| r.mse);
        let (mean_runtime_s, sd_runtime_s) = stat(|r| r.runtime_s);
        let (mean_k, sd_k) = stat(|r| r.k_total as f64);
        out.push(Aggregate {
            method: cell[0].method,
            signal: cell[0].signal.clone(),
            sigma: cell[0].sigma,
            count: ok.len(),
            mean_psnr,
            sd_psnr,
            mean_mse,
            sd_mse,
            mean_runtime_s,
            sd_runtime_s,
            mean_k,
            sd_k,
        });
    }
    out
}

fn rescaled(signal: &Signal1D, target_sd: f64) -> Result<Signal1D, BenchError> {
    let x = signal.samples();
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    if sd == 0.0 {
        return Err(BenchError::InvalidExperiment("cannot rescale a constant signal"));
    }
    Ok(Signal1D::new(x.iter().map(|v| v * target_sd / sd).collect())?)
}

struct Job {
    method: Method,
    sigma: f64,
    seed: u64,
}

fn score<T: Decompose + Sync>(
    clean: &T,
    range: f64,
    job: &Job,
    spec: &ExperimentSpec,
    name: &str,
) -> BenchmarkRecord {
    let attempt = || -> Result<(f64, f64, usize), BenchError> {
        let noisy = add_noise(clean, job.sigma, job.seed)?;
        let known = spec.known_sigma.then_some(job.sigma);
        let start = Instant::now();
        let (estimate, k) = job.method.run(&noisy, spec.filter, None, known)?;
        let runtime = if spec.timing { start.elapsed().as_secs_f64() } else { 0.0 };
        let err = mse(clean.values(), estimate.values())?;
        Ok((err, runtime, k))
    };
    let (mse, runtime_s, k_total, error) = match attempt() {
        Ok((m, t, k)) => (m, t, k, None),
        Err(e) => (f64::NAN, f64::NAN, 0, Some(e.to_string())),
    };
    BenchmarkRecord {
        method: job.method,
        signal: name.to_string(),
        sigma: job.sigma,
        seed: job.seed,
        psnr: if error.is_some() { f64::NAN } else { psnr_from_mse(range, mse) },
        mse,
        runtime_s,
        k_total,
        error,
    }
}

fn run_on<T: Decompose + Sync>(clean: &T, range: f64, spec: &ExperimentSpec) -> Vec<BenchmarkRecord> {
    let name = spec.source.name();
    let jobs: Vec<Job> = spec
        .methods
        .iter()
        .flat_map(|&method| {
            spec.sigmas.iter().flat_map(move |&sigma| {
                (0..spec.repetitions as u64).map(move |r| Job {
                    method,
                    sigma,
                    seed: spec.base_seed.wrapping_add(r),
                })
            })
        })
        .collect();
    jobs.par_iter()
        .map(|job| score(clean, range, job, spec, &name))
        .collect()
}

/// Runs every (method, σ, repetition) combination, in parallel, and returns
/// records in deterministic order. Failed runs are recorded, not fatal.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, BenchError> {
    spec.validate()?;
    let records = match &spec.source {
        SignalSource::Image { image, .. } => run_on(image, IMAGE_RANGE, spec),
        SignalSource::Generated(_) | SignalSource::Samples { .. } => {
            let base = match &spec.source {
                SignalSource::Generated(s) => super::generate_signal(s),
                SignalSource::Samples { signal, .. } => signal.clone(),
                SignalSource::Image { .. } => unreachable!(),
            };
            let clean = match spec.rescale_sd {
                Some(sd) => rescaled(&base, sd)?,
                None => base,
            };
            let range = signal_range(clean.samples());
            if range.is_nan() || range <= 0.0 {
                return Err(BenchError::ZeroRange);
            }
            run_on(&clean, range, spec)
        }
    };
    let aggregates = aggregate(&records);
    Ok(ExperimentReport { records, aggregates })
}

fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.6}")
    }
}

fn fmt_e(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.9e}")
    } else {
        fmt_f(v)
    }
}

/// Writes the header, then for each cell its records followed by a `mean`
/// and an `sd` row in the `seed` column.
pub fn write_csv<W: Write>(report: &ExperimentReport, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    let mut records = report.records.iter().peekable();
    for agg in &report.aggregates {
        while let Some(r) = records.next_if(|r| r.method == agg.method && r.sigma == agg.sigma && r.signal == agg.signal) {
            let k = if r.error.is_some() { String::new() } else { r.k_total.to_string() };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.method,
                r.signal,
                r.sigma,
                r.seed,
                fmt_f(r.psnr),
                fmt_e(r.mse),
                fmt_f(r.runtime_s),
                k
            )?;
        }
        for (label, psnr, mse, rt, k) in [
            ("mean", agg.mean_psnr, agg.mean_mse, agg.mean_runtime_s, agg.mean_k),
            ("sd", agg.sd_psnr, agg.sd_mse, agg.sd_runtime_s, agg.sd_k),
        ] {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                agg.method,
                agg.signal,
                agg.sigma,
                label,
                fmt_f(psnr),
                fmt_e(mse),
                fmt_f(rt),
                fmt_f(k)
            )?;
        }
    }
    Ok(())
}
