//! The memory mode forgets a displaced, heated initial state at rate
//! `(mu kappa)^n`.
//!
//! `cargo run --example forgetfulness`

use bosonic_memory::forgetful::canonical_decay;

fn main() -> bosonic_memory::Result<()> {
    for (mu, kappa) in [(0.5, 0.5), (0.9, 0.9), (0.5, 1.62)] {
        let report = canonical_decay(mu, kappa, 30)?;
        println!(
            "mu = {mu}, kappa = {kappa}: variance rate {:.6} (ln mu kappa = {:.6}), mean rate {:.6}",
            report.variance_rate.unwrap_or(f64::NAN),
            (mu * kappa as f64).ln(),
            report.mean_rate.unwrap_or(f64::NAN)
        );
        for row in report.rows.iter().step_by(10) {
            println!("  n = {:>2}: |d mean| = {:.3e}, |d var| = {:.3e}", row.n, row.delta_mean, row.delta_var);
        }
    }
    match canonical_decay(0.8, 1.5, 10) {
        Err(e) => println!("mu = 0.8, kappa = 1.5: {e}"),
        Ok(_) => unreachable!("above-threshold channels are rejected"),
    }
    Ok(())
}
