//! `bmc`: command-line front end for the memory-channel library.
//!
//! Exit codes: 0 success, 2 invalid request, 3 numerical failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bosonic_memory::capacity::{
    classical_bounds_from_blocks, classical_capacity_lower_amplifier, quantum_bounds_from_blocks, quantum_capacity,
    block_bounds_cached, waterfill_attenuator, EnergyConstraint, GaussianBoundVariant,
};
use bosonic_memory::forgetful::canonical_decay;
use bosonic_memory::output::{
    bounds_csv, bounds_json, decay_json_lines, fit_json_lines, fmt_sig9, spectrum_csv, spectrum_json, BoundsRow,
};
use bosonic_memory::quadrature::QuadratureSpec;
use bosonic_memory::spectra::{finite_spectrum_fit, SpectrumCache};
use bosonic_memory::sweep::{linspace, run_sweep, write_sweep_csv, Figure, Quantity, SweepSpec};
use bosonic_memory::{ChannelParams, Error};

#[derive(Parser)]
#[command(name = "bmc", version, about = "Capacities of bosonic Gaussian memory channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quantum capacity (qubits per use) at unbounded input energy.
    Qcap {
        #[command(flatten)]
        point: Point,
        #[arg(long)]
        quad_points: Option<usize>,
    },
    /// Classical capacity (κ <= 1) or its Gaussian lower bound (κ > 1).
    Ccap {
        #[command(flatten)]
        point: Point,
        #[arg(long)]
        mean_photon: f64,
        #[arg(long, value_enum, default_value_t = Variant::Printed)]
        variant: Variant,
        #[arg(long)]
        quad_points: Option<usize>,
    },
    /// Capacity map over a (μ, κ) grid, written as CSV.
    Sweep(SweepArgs),
    /// Eigenvalues of the n-use Gram matrix next to samples of η(z).
    Spectrum {
        #[command(flatten)]
        point: Point,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Block bounds on Q (and C for κ <= 1 when --mean-photon is set).
    Bounds {
        #[command(flatten)]
        point: Point,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
        blocks: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
        n_schedule: Vec<usize>,
        #[arg(long)]
        mean_photon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Decay of the memory's initial state over n = 1..=N uses (JSON lines).
    Forget {
        #[command(flatten)]
        point: Point,
        /// Largest number of uses.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Kolmogorov-Smirnov distance of finite spectra to the symbol (JSON lines).
    Fit {
        #[command(flatten)]
        point: Point,
        #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
        n_schedule: Vec<usize>,
        /// Eigenvalues dropped at threshold.
        #[arg(long)]
        trim: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Point {
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    kappa: f64,
}

#[derive(Args)]
struct SweepArgs {
    /// Preset grid and quantity of a published map.
    #[arg(long, value_enum)]
    figure: Option<FigureArg>,
    #[arg(long, value_enum)]
    quantity: Option<QuantityArg>,
    /// `start:stop:count`
    #[arg(long)]
    mu_range: Option<String>,
    /// `start:stop:count`
    #[arg(long)]
    kappa_range: Option<String>,
    #[arg(long)]
    mean_photon: Option<f64>,
    #[arg(long, value_enum, default_value_t = Variant::Printed)]
    variant: Variant,
    #[arg(long)]
    quad_points: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Printed,
    Standard,
}

impl From<Variant> for GaussianBoundVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Printed => GaussianBoundVariant::AsPrinted,
            Variant::Standard => GaussianBoundVariant::Standard,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureArg {
    Fig5,
    Fig6Att,
    Fig6Amp,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantityArg {
    Q,
    C,
    CLower,
    Spectrum,
}

enum Failure {
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn quad(points: Option<usize>) -> QuadratureSpec {
    points.map(QuadratureSpec::with_points).unwrap_or_default()
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_range(s: &str) -> Result<Vec<f64>, Error> {
    let bad = || Error::InvalidParams(format!("range {s:?} is not start:stop:count"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let a: f64 = a.parse().map_err(|_| bad())?;
    let b: f64 = b.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    Ok(linspace(a, b, n))
}

fn sweep_spec(args: &SweepArgs) -> Result<SweepSpec, Error> {
    let mut spec = match args.figure {
        Some(FigureArg::Fig5) => SweepSpec::figure(Figure::QuantumMap),
        Some(FigureArg::Fig6Att) => SweepSpec::figure(Figure::ClassicalAttenuatorMap),
        Some(FigureArg::Fig6Amp) => SweepSpec::figure(Figure::ClassicalAmplifierMap),
        None => SweepSpec::new(vec![], vec![], Quantity::QuantumCapacity),
    };
    if let Some(q) = args.quantity {
        spec.quantity = match q {
            QuantityArg::Q => Quantity::QuantumCapacity,
            QuantityArg::C => Quantity::ClassicalCapacity,
            QuantityArg::CLower => Quantity::ClassicalLowerBound,
            QuantityArg::Spectrum => Quantity::SpectrumSummary,
        };
    }
    if let Some(r) = &args.mu_range {
        spec.mu_grid = parse_range(r)?;
    }
    if let Some(r) = &args.kappa_range {
        spec.kappa_grid = parse_range(r)?;
    }
    if args.mean_photon.is_some() {
        spec.mean_photon = args.mean_photon;
    }
    spec.variant = args.variant.into();
    spec.quad = quad(args.quad_points);
    Ok(spec)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Qcap { point, quad_points } => {
            let q = quantum_capacity(point.mu, point.kappa, &quad(quad_points))?;
            println!("{}", fmt_sig9(q));
        }
        Command::Ccap {
            point,
            mean_photon,
            variant,
            quad_points,
        } => {
            let n = EnergyConstraint::new(mean_photon)?;
            let spec = quad(quad_points);
            let c = if point.kappa <= 1.0 {
                waterfill_attenuator(point.mu, point.kappa, n, &spec)?.capacity_value
            } else {
                classical_capacity_lower_amplifier(point.mu, point.kappa, n, variant.into(), &spec)?
            };
            println!("{}", fmt_sig9(c));
        }
        Command::Sweep(args) => {
            let spec = sweep_spec(&args)?;
            let points = run_sweep(&spec)?;
            let mut buf = Vec::new();
            write_sweep_csv(&mut buf, &points).expect("writing to memory");
            emit(&args.out, &String::from_utf8(buf).expect("ascii output"))?;
        }
        Command::Spectrum { point, n, out, format } => {
            let params = ChannelParams::new(point.mu, point.kappa, n)?;
            let text = match format {
                Format::Csv => spectrum_csv(&params)?,
                Format::Json => spectrum_json(&params)?,
            };
            emit(&out, &text)?;
        }
        Command::Bounds {
            point,
            blocks,
            n_schedule,
            mean_photon,
            out,
            format,
        } => {
            let photons = match mean_photon {
                Some(_) if point.kappa > 1.0 => {
                    return Err(Error::Unsupported("exact classical capacity unavailable for amplifier".into()).into())
                }
                Some(n) => Some(EnergyConstraint::new(n)?),
                None => None,
            };
            let cache = SpectrumCache::new(point.mu, point.kappa)?;
            let mut rows = Vec::with_capacity(blocks.len());
            for p in blocks {
                let b = block_bounds_cached(&cache, p, &n_schedule)?;
                rows.push(BoundsRow {
                    blocks: p,
                    quantum: quantum_bounds_from_blocks(&b, point.kappa),
                    classical: photons.map(|n| classical_bounds_from_blocks(&b, n)).transpose()?,
                });
            }
            let text = match format {
                Format::Json => bounds_json(&rows),
                Format::Csv => bounds_csv(&rows),
            };
            emit(&out, &text)?;
        }
        Command::Forget { point, n, out } => {
            let report = canonical_decay(point.mu, point.kappa, n)?;
            emit(&out, &decay_json_lines(&report))?;
        }
        Command::Fit {
            point,
            n_schedule,
            trim,
            out,
        } => {
            let report = finite_spectrum_fit(point.mu, point.kappa, &n_schedule, trim)?;
            emit(&out, &fit_json_lines(&report))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
