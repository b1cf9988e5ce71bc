//! Above threshold one eigenvalue of the Gram matrix runs away; the rest
//! follow the symbol.
//!
//! `cargo run --example threshold_split`

use bosonic_memory::model::build_gram_matrix;
use bosonic_memory::spectra::{asymptotic_remainder, gram_spectrum, threshold_split};
use bosonic_memory::ChannelParams;

fn main() -> bosonic_memory::Result<()> {
    let (mu, kappa) = (0.9, 1.5);
    println!("mu = {mu}, kappa = {kappa}, mu kappa = {}", mu * kappa);
    for n in [5, 10, 20, 40] {
        let p = ChannelParams::new(mu, kappa, n)?;
        let split = threshold_split(&p)?;
        let m = build_gram_matrix(&p)?.matrix;
        let top = *gram_spectrum(&p)?.last().expect("non-empty spectrum");
        println!(
            "  n = {n:>2}: c = {:.4e}  top eigenvalue / c = {:.6}  reconstruction {:.1e}  commutator ratio {:.4}",
            split.c,
            top / split.c,
            (split.reconstruct() - &m).norm() / m.norm(),
            split.commutator_ratio()
        );
    }
    println!("limiting remainder entries by lag:");
    for lag in 0..4 {
        println!("  |j - k| = {lag}: {:.6}", asymptotic_remainder(mu, kappa, lag));
    }
    Ok(())
}
