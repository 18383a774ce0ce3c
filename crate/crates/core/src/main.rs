use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use mdl_denoise::bench::io::{self as bio, Data};
use mdl_denoise::bench::{self, ExperimentSpec, Method, SignalSource, TestSignal, TestSignalSpec};
use mdl_denoise::wavelet::{Decompose, FilterKind, WaveletFilter};

#[derive(Parser)]
#[command(name = "mdl-denoise", version, about = "Wavelet denoising by minimum description length")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Denoise a 1D signal (text or raw f64) or a PGM image.
    Denoise {
        input: PathBuf,
        output: PathBuf,
        /// original, a, ab, abc, visu, visu-hard, sure or bayes
        #[arg(long, default_value = "abc")]
        method: Method,
        /// Known noise SD for the baselines (estimated from the data otherwise).
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value = "d6")]
        filter: FilterKind,
        #[arg(long)]
        levels: Option<usize>,
        /// 1D input and output are little-endian f64.
        #[arg(long)]
        raw: bool,
    },
    /// Run a seeded benchmark and write CSV.
    Bench {
        /// blocks, bumps, heavisine, doppler, or a data file.
        #[arg(long)]
        signal: String,
        #[arg(long, value_delimiter = ',', default_value = "original,a,ab,abc")]
        methods: Vec<Method>,
        #[arg(long, value_delimiter = ',', required = true)]
        sigmas: Vec<f64>,
        #[arg(long, default_value_t = 15)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Length of a generated test signal.
        #[arg(long, default_value_t = 2048)]
        n: usize,
        /// Rescale a 1D reference to this sample SD before adding noise.
        #[arg(long)]
        rescale_sd: Option<f64>,
        #[arg(long, default_value = "d6")]
        filter: FilterKind,
        /// Give the baselines the true noise SD.
        #[arg(long)]
        known_sigma: bool,
        /// Record wall-clock runtimes (makes the CSV nondeterministic).
        #[arg(long)]
        timing: bool,
        /// 1D signal file is little-endian f64.
        #[arg(long)]
        raw: bool,
    },
    /// Forward or inverse wavelet transform, for debugging.
    Transform {
        input: PathBuf,
        /// Read a coefficient file and reconstruct the signal.
        #[arg(long)]
        inverse: bool,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        filter: Option<FilterKind>,
        /// 1D samples are little-endian f64.
        #[arg(long)]
        raw: bool,
        /// Destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display())),
        None => io::stdout().write_all(bytes).context("cannot write to stdout"),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Denoise {
            input,
            output,
            method,
            sigma,
            filter,
            levels,
            raw,
        } => {
            let data = bio::read_data(&input, raw)?;
            let result = match &data {
                Data::Samples(s) => Data::Samples(method.run(s, filter, levels, sigma)?.0),
                Data::Image(img) => Data::Image(method.run(img, filter, levels, sigma)?.0),
            };
            bio::write_data(&output, &result, raw)?;
        }
        Command::Bench {
            signal,
            methods,
            sigmas,
            reps,
            seed,
            out,
            n,
            rescale_sd,
            filter,
            known_sigma,
            timing,
            raw,
        } => {
            let source = match signal.parse::<TestSignal>() {
                Ok(sig) => SignalSource::Generated(TestSignalSpec::new(sig, n)?),
                Err(_) => {
                    let path = Path::new(&signal);
                    if !path.exists() {
                        bail!("{signal:?} is neither a test signal (blocks, bumps, heavisine, doppler) nor an existing file");
                    }
                    let name = path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| signal.clone());
                    match bio::read_data(path, raw)? {
                        Data::Samples(s) => SignalSource::Samples { name, signal: s },
                        Data::Image(img) => {
                            if rescale_sd.is_some() {
                                bail!("--rescale-sd applies to 1D signals only");
                            }
                            SignalSource::Image { name, image: img }
                        }
                    }
                }
            };
            let spec = ExperimentSpec {
                repetitions: reps,
                base_seed: seed,
                filter,
                rescale_sd,
                known_sigma,
                timing,
                ..ExperimentSpec::new(source, methods, sigmas)
            };
            let report = bench::run_experiment(&spec)?;
            for r in report.records.iter().filter(|r| r.error.is_some()) {
                eprintln!(
                    "warning: {} sigma={} seed={} failed: {}",
                    r.method,
                    r.sigma,
                    r.seed,
                    r.error.as_deref().unwrap_or_default()
                );
            }
            match out {
                Some(path) => {
                    let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
                    let mut w = BufWriter::new(file);
                    bench::write_csv(&report, &mut w)?;
                    w.flush()?;
                }
                None => bench::write_csv(&report, io::stdout().lock())?,
            }
        }
        Command::Transform {
            input,
            inverse,
            levels,
            filter,
            raw,
            out,
        } => {
            if inverse {
                let (coeffs, stored) = bio::read_coefficients(&input)?;
                if let Some(f) = filter.filter(|&f| f != stored) {
                    bail!("--filter {f} conflicts with filter {stored} recorded in {}", input.display());
                }
                let wf = WaveletFilter::new(stored);
                let data = match coeffs.layout().extent() {
                    mdl_denoise::wavelet::Extent::OneD(_) => Data::Samples(Decompose::inverse(&coeffs, &wf)?),
                    mdl_denoise::wavelet::Extent::TwoD { .. } => Data::Image(Decompose::inverse(&coeffs, &wf)?),
                };
                match (&data, out.as_deref()) {
                    (Data::Samples(s), None) if raw => {
                        let bytes: Vec<u8> = s.samples().iter().flat_map(|v| v.to_le_bytes()).collect();
                        emit(None, &bytes)?;
                    }
                    (Data::Samples(s), None) => emit(None, bio::format_samples_text(s.samples()).as_bytes())?,
                    (Data::Image(img), None) => emit(None, &bio::encode_pgm(img))?,
                    (_, Some(path)) => bio::write_data(path, &data, raw)?,
                }
            } else {
                let kind = filter.unwrap_or_default();
                let wf = WaveletFilter::new(kind);
                let coeffs = match bio::read_data(&input, raw)? {
                    Data::Samples(s) => s.forward(&wf, levels.unwrap_or(s.max_levels()))?,
                    Data::Image(img) => img.forward(&wf, levels.unwrap_or(img.max_levels()))?,
                };
                emit(out.as_deref(), bio::format_coefficients(&coeffs, kind).as_bytes())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
