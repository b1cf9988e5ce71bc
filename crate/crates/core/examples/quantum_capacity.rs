//! Quantum capacity along a line crossing the threshold `mu kappa = 1`.
//!
//! `cargo run --release --example quantum_capacity`

use bosonic_memory::capacity::{quantum_capacity, quantum_capacity_bounds};
use bosonic_memory::quadrature::QuadratureSpec;

fn main() -> bosonic_memory::Result<()> {
    let quad = QuadratureSpec::default();
    let kappa = 1.25;
    println!("kappa = {kappa}; threshold at mu = {}", 1.0 / kappa);
    for i in 0..=10 {
        let mu = 0.7 + 0.02 * i as f64;
        println!("  mu = {mu:.2}  Q = {:.6}", quantum_capacity(mu, kappa, &quad)?);
    }

    let exact = quantum_capacity(0.5, 0.5, &quad)?;
    println!("\nmu = kappa = 0.5: Q = {exact:.6}");
    for blocks in [2, 4, 8, 16] {
        let b = quantum_capacity_bounds(0.5, 0.5, blocks, &[64, 128, 256])?;
        println!("  P = {blocks:>2}: {:.6} <= Q <= {:.6}", b.lower, b.upper);
    }
    Ok(())
}
