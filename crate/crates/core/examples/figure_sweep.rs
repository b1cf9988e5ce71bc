//! Capacity map over a (mu, kappa) grid, written as CSV.
//!
//! `cargo run --release --example figure_sweep -- [fig5|fig6-att|fig6-amp] [out.csv]`
//!
//! Without arguments a coarse 11 x 11 quantum-capacity map goes to stdout.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use bosonic_memory::sweep::{linspace, run_sweep, write_sweep_csv, Figure, Quantity, SweepSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let spec = match args.first().map(String::as_str) {
        Some("fig5") => SweepSpec::figure(Figure::QuantumMap),
        Some("fig6-att") => SweepSpec::figure(Figure::ClassicalAttenuatorMap),
        Some("fig6-amp") => SweepSpec::figure(Figure::ClassicalAmplifierMap),
        Some(other) => return Err(format!("unknown figure {other}").into()),
        None => SweepSpec::new(linspace(0.0, 0.9, 11), linspace(0.0, 3.0, 11), Quantity::QuantumCapacity),
    };
    let points = run_sweep(&spec)?;
    let mut out: Box<dyn Write> = match args.get(1) {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    write_sweep_csv(&mut out, &points)?;
    out.flush()?;
    Ok(())
}
