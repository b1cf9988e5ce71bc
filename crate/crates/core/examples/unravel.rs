//! Split 8 uses of a memory channel into 8 independent channels.
//!
//! `cargo run --example unravel`

use bosonic_memory::model::build_coupling_matrices;
use bosonic_memory::spectra::unravel;
use bosonic_memory::ChannelParams;

fn main() -> bosonic_memory::Result<()> {
    let params = ChannelParams::new(0.6, 0.7, 8)?;
    let mats = build_coupling_matrices(&params)?;
    let d = unravel(&mats)?;

    println!("mu = {}, kappa = {}, n = {}", params.mu(), params.kappa(), params.n());
    println!("regime: {:?}", params.regime());
    for (j, eta) in d.eta.iter().enumerate() {
        println!("  mode {j}: transmissivity {eta:.6}");
    }
    let err_a = (d.reconstruct_a() - &mats.a).norm() / mats.a.norm();
    let err_e = (d.reconstruct_e() - &mats.e).norm() / mats.e.norm();
    println!("relative reconstruction error: A {err_a:.1e}, E {err_e:.1e}");
    println!("encoding rotation O' (first row): {:.4}", d.o_prime.row(0));
    Ok(())
}
