//! Lower and upper bounds from finite spectra, tightening with the number of
//! blocks.
//!
//! `cargo run --release --example block_bounds`

use bosonic_memory::capacity::{
    block_bounds_cached, classical_bounds_from_blocks, quantum_bounds_from_blocks, quantum_capacity,
    waterfill_attenuator, EnergyConstraint,
};
use bosonic_memory::quadrature::QuadratureSpec;
use bosonic_memory::spectra::SpectrumCache;

fn main() -> bosonic_memory::Result<()> {
    let (mu, kappa) = (0.5, 0.5);
    let n = EnergyConstraint::new(8.0)?;
    let quad = QuadratureSpec::default();
    let cache = SpectrumCache::new(mu, kappa)?;
    let schedule = [64, 128, 256, 512];

    let q = quantum_capacity(mu, kappa, &quad)?;
    let c = waterfill_attenuator(mu, kappa, n, &quad)?.capacity_value;
    println!("mu = kappa = 0.5: Q = {q:.6}, C(N = 8) = {c:.6}");
    for blocks in [2, 4, 8, 16, 32, 64] {
        let b = block_bounds_cached(&cache, blocks, &schedule)?;
        let qb = quantum_bounds_from_blocks(&b, kappa);
        let cb = classical_bounds_from_blocks(&b, n)?;
        println!(
            "  P = {blocks:>2}: Q in [{:.5}, {:.5}] width {:.4};  C in [{:.5}, {:.5}] width {:.4};  converged {}",
            qb.lower,
            qb.upper,
            qb.upper - qb.lower,
            cb.lower,
            cb.upper,
            cb.upper - cb.lower,
            b.converged
        );
    }
    Ok(())
}
