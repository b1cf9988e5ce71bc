//! Finite spectra approach the distribution of the symbol eta(z).
//!
//! `cargo run --release --example spectrum_fit`

use bosonic_memory::spectra::{finite_spectrum_fit, AsymptoticSymbol};

fn main() -> bosonic_memory::Result<()> {
    for (mu, kappa, label) in [(0.5, 0.5, "below threshold"), (0.5, 2.0, "at threshold"), (0.9, 1.5, "above threshold")] {
        let symbol = AsymptoticSymbol::new(mu, kappa)?;
        let (lo, hi) = symbol.range();
        println!("{label}: mu = {mu}, kappa = {kappa}, eta(z) in [{lo:.4}, {hi:.4}]");
        let n_list: &[usize] = if mu * kappa > 1.0 { &[10, 20, 40] } else { &[50, 100, 200] };
        for row in finite_spectrum_fit(mu, kappa, n_list, None)?.rows {
            println!("  n = {:>3}: KS distance {:.5} ({} dropped)", row.n, row.ks_distance, row.trimmed_count);
        }
    }
    Ok(())
}
