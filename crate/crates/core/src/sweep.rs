//! Capacity maps over `(μ, κ)` grids.
//!
//! Points are evaluated in parallel and gathered by grid index, so the output
//! is identical from run to run and independent of the thread count.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::capacity::{
    classical_capacity_lower_amplifier, quantum_capacity, waterfill_attenuator, EnergyConstraint,
    GaussianBoundVariant,
};
use crate::error::{Error, Result};
use crate::output::fmt_sig9;
use crate::quadrature::QuadratureSpec;
use crate::spectra::AsymptoticSymbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Quantum capacity at unbounded energy.
    QuantumCapacity,
    /// Attenuator classical capacity (`κ <= 1`, needs `N`).
    ClassicalCapacity,
    /// Amplifier Gaussian lower bound (`κ > 1`, needs `N`).
    ClassicalLowerBound,
    /// Mean of the symbol, `(1/2π) ∫ η(z) dz` (`κ^(∞)` below threshold).
    SpectrumSummary,
}

/// Axis ranges of the published capacity maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Quantum capacity, `μ ∈ [0, 0.99]`, `κ ∈ [0, 3]`.
    QuantumMap,
    /// Attenuator classical capacity at `N = 8`, `μ, κ ∈ [0, 1]`.
    ClassicalAttenuatorMap,
    /// Amplifier lower bound at `N = 8`, `μ ∈ [0, 1]`, `κ ∈ (1, 3]`.
    ClassicalAmplifierMap,
}

pub const FIGURE_GRID_POINTS: usize = 101;
pub const FIGURE_MEAN_PHOTON: f64 = 8.0;

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub mu_grid: Vec<f64>,
    pub kappa_grid: Vec<f64>,
    pub mean_photon: Option<f64>,
    pub quantity: Quantity,
    pub variant: GaussianBoundVariant,
    pub quad: QuadratureSpec,
}

impl SweepSpec {
    pub fn new(mu_grid: Vec<f64>, kappa_grid: Vec<f64>, quantity: Quantity) -> Self {
        SweepSpec {
            mu_grid,
            kappa_grid,
            mean_photon: None,
            quantity,
            variant: GaussianBoundVariant::default(),
            quad: QuadratureSpec::default(),
        }
    }

    pub fn with_mean_photon(mut self, n: f64) -> Self {
        self.mean_photon = Some(n);
        self
    }

    pub fn figure(figure: Figure) -> Self {
        let n = FIGURE_GRID_POINTS;
        match figure {
            Figure::QuantumMap => SweepSpec::new(linspace(0.0, 0.99, n), linspace(0.0, 3.0, n), Quantity::QuantumCapacity),
            Figure::ClassicalAttenuatorMap => {
                SweepSpec::new(linspace(0.0, 1.0, n), linspace(0.0, 1.0, n), Quantity::ClassicalCapacity)
                    .with_mean_photon(FIGURE_MEAN_PHOTON)
            }
            Figure::ClassicalAmplifierMap => {
                let kappa = (1..=n).map(|i| 1.0 + 2.0 * i as f64 / n as f64).collect();
                SweepSpec::new(linspace(0.0, 1.0, n), kappa, Quantity::ClassicalLowerBound)
                    .with_mean_photon(FIGURE_MEAN_PHOTON)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, grid) in [("mu", &self.mu_grid), ("kappa", &self.kappa_grid)] {
            if grid.is_empty() {
                return Err(Error::InvalidParams(format!("{name} grid is empty")));
            }
            if grid.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::InvalidParams(format!("{name} grid must be strictly increasing")));
            }
        }
        if self.mu_grid[0] < 0.0 || self.mu_grid[self.mu_grid.len() - 1] > 1.0 {
            return Err(Error::InvalidParams("mu grid leaves [0, 1]".into()));
        }
        if !(self.kappa_grid[0] >= 0.0) || !self.kappa_grid.iter().all(|k| k.is_finite()) {
            return Err(Error::InvalidParams("kappa grid must be finite and >= 0".into()));
        }
        let needs_photons = matches!(self.quantity, Quantity::ClassicalCapacity | Quantity::ClassicalLowerBound);
        if needs_photons {
            EnergyConstraint::new(self.mean_photon.ok_or_else(|| {
                Error::InvalidParams("classical capacities need a mean photon number".into())
            })?)?;
        }
        let kmax = self.kappa_grid[self.kappa_grid.len() - 1];
        match self.quantity {
            Quantity::ClassicalCapacity if kmax > 1.0 => Err(Error::InvalidParams(
                "attenuator classical capacity needs kappa <= 1 on the whole grid".into(),
            )),
            Quantity::ClassicalLowerBound if self.kappa_grid[0] <= 1.0 => Err(Error::InvalidParams(
                "amplifier lower bound needs kappa > 1 on the whole grid".into(),
            )),
            _ => Ok(()),
        }
    }

    fn evaluate(&self, mu: f64, kappa: f64) -> Result<f64> {
        let photons = || EnergyConstraint::new(self.mean_photon.unwrap_or(0.0));
        let value = match self.quantity {
            Quantity::QuantumCapacity => quantum_capacity(mu, kappa, &self.quad),
            Quantity::ClassicalCapacity => waterfill_attenuator(mu, kappa, photons()?, &self.quad).map(|s| s.capacity_value),
            Quantity::ClassicalLowerBound => {
                classical_capacity_lower_amplifier(mu, kappa, photons()?, self.variant, &self.quad)
            }
            Quantity::SpectrumSummary => Ok(AsymptoticSymbol::new(mu, kappa)?.mean()),
        };
        match value {
            Err(Error::Divergent(_)) => Ok(f64::INFINITY),
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub mu: f64,
    pub kappa: f64,
    pub value: f64,
}

/// Evaluate every grid point, `μ` in the outer loop.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepPoint>> {
    spec.validate()?;
    let nk = spec.kappa_grid.len();
    (0..spec.mu_grid.len() * nk)
        .into_par_iter()
        .map(|i| {
            let (mu, kappa) = (spec.mu_grid[i / nk], spec.kappa_grid[i % nk]);
            Ok(SweepPoint {
                mu,
                kappa,
                value: spec.evaluate(mu, kappa)?,
            })
        })
        .collect()
}

/// CSV with header `mu,kappa,value`.
pub fn write_sweep_csv<W: Write>(out: &mut W, points: &[SweepPoint]) -> io::Result<()> {
    writeln!(out, "mu,kappa,value")?;
    for p in points {
        writeln!(out, "{},{},{}", fmt_sig9(p.mu), fmt_sig9(p.kappa), fmt_sig9(p.value))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::g_of_x;

    #[test]
    fn linspace_ends() {
        assert_eq!(linspace(0.0, 1.0, 5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(linspace(2.0, 3.0, 1), vec![2.0]);
    }

    #[test]
    fn figure_grids_avoid_divergent_lines() {
        let s = SweepSpec::figure(Figure::QuantumMap);
        assert!(s.mu_grid.iter().all(|&m| m != 1.0));
        assert!(s.kappa_grid.iter().all(|&k| k != 1.0));
        assert_eq!(s.mu_grid.len() * s.kappa_grid.len(), 101 * 101);
        let s = SweepSpec::figure(Figure::ClassicalAmplifierMap);
        assert!(s.kappa_grid[0] > 1.0 && s.kappa_grid[100] == 3.0);
        for f in [Figure::QuantumMap, Figure::ClassicalAttenuatorMap, Figure::ClassicalAmplifierMap] {
            SweepSpec::figure(f).validate().unwrap();
        }
    }

    #[test]
    fn incompatible_specs_rejected() {
        let s = SweepSpec::new(vec![0.5], vec![0.5, 1.5], Quantity::ClassicalCapacity).with_mean_photon(8.0);
        assert!(s.validate().is_err());
        let s = SweepSpec::new(vec![0.5], vec![1.0, 1.5], Quantity::ClassicalLowerBound).with_mean_photon(8.0);
        assert!(s.validate().is_err());
        let s = SweepSpec::new(vec![0.5], vec![0.5], Quantity::ClassicalCapacity);
        assert!(s.validate().is_err());
        let s = SweepSpec::new(vec![0.6, 0.5], vec![0.5], Quantity::QuantumCapacity);
        assert!(s.validate().is_err());
    }

    #[test]
    fn small_sweep_values_and_order() {
        let s = SweepSpec::new(vec![0.0, 1.0], vec![0.0, 0.5, 1.0], Quantity::ClassicalCapacity).with_mean_photon(8.0);
        let pts = run_sweep(&s).unwrap();
        let want = [
            g_of_x(0.0).unwrap(),
            g_of_x(4.0).unwrap(),
            g_of_x(8.0).unwrap(),
            g_of_x(8.0).unwrap(),
            g_of_x(8.0).unwrap(),
            g_of_x(8.0).unwrap(),
        ];
        for (p, w) in pts.iter().zip(want) {
            assert!((p.value - w).abs() < 1e-12, "{p:?}");
        }
        assert_eq!((pts[1].mu, pts[1].kappa), (0.0, 0.5));
        let q = run_sweep(&SweepSpec::new(vec![0.0, 1.0], vec![0.5], Quantity::QuantumCapacity)).unwrap();
        assert_eq!(q[1].value, f64::INFINITY);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &[SweepPoint { mu: 0.0, kappa: 0.5, value: f64::INFINITY }]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "mu,kappa,value\n0,0.5,inf\n");
    }
}
