//! Classical capacity of the attenuator (water-filling) and the Gaussian
//! lower bound for the amplifier.
//!
//! `cargo run --release --example classical_capacity`

use bosonic_memory::capacity::{
    classical_capacity_lower_amplifier, g_of_x, waterfill_attenuator, EnergyConstraint, GaussianBoundVariant,
};
use bosonic_memory::quadrature::QuadratureSpec;

fn main() -> bosonic_memory::Result<()> {
    let quad = QuadratureSpec::default();
    let n = EnergyConstraint::new(8.0)?;

    println!("attenuator, kappa = 0.5, N = 8 (memoryless: {:.6})", g_of_x(4.0)?);
    for mu in [0.0, 0.2, 0.4, 0.6, 0.8, 0.95] {
        let s = waterfill_attenuator(mu, 0.5, n, &quad)?;
        let (lo, hi) = s
            .n_of_z
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        println!(
            "  mu = {mu:.2}: C = {:.6}  L = {:.4}  N(z) in [{lo:.3}, {hi:.3}]",
            s.capacity_value, s.multiplier
        );
    }

    println!("\namplifier, kappa = 1.5, N = 8");
    for mu in [0.0, 0.3, 0.6, 0.9] {
        let printed = classical_capacity_lower_amplifier(mu, 1.5, n, GaussianBoundVariant::AsPrinted, &quad)?;
        let standard = classical_capacity_lower_amplifier(mu, 1.5, n, GaussianBoundVariant::Standard, &quad)?;
        println!("  mu = {mu:.1}: g(eta(N+1)+1) form {printed:.6}, g(eta(N+1)-1) form {standard:.6}");
    }
    Ok(())
}
