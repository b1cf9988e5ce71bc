//! How fast the channel forgets its initial memory state.
//!
//! After `n` uses the outgoing memory mode is
//!
//! ```text
//! m'_n = (√(μκ))ⁿ m_1 + Σ_j X_j a_j + Σ_j Y_j e_j
//! ```
//!
//! (with `a_j†` in place of `a_j` for the amplifier), so below threshold any
//! trace of `m_1` in the first two moments decays like `(μκ)^{n/2}` for means
//! and `(μκ)ⁿ` for variances. Moments are tracked for a single quadrature.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{memory_power, ChannelKind, ChannelParams, Threshold};

/// Quadrature variance of the vacuum.
pub const VACUUM_VARIANCE: f64 = 0.5;

/// First and second moments of the initial memory, the inputs and the
/// environment.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMemoryScenario {
    pub mean_m: Complex64,
    pub mean_a: Vec<Complex64>,
    pub mean_e: Vec<Complex64>,
    pub var_m: f64,
    /// Memory/input covariances.
    pub c: DVector<f64>,
    /// Memory/environment covariances.
    pub d: DVector<f64>,
    pub var_a: DMatrix<f64>,
    pub var_e: DMatrix<f64>,
}

impl GaussianMemoryScenario {
    /// Everything in the vacuum, over `n` uses.
    pub fn vacuum(n: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        GaussianMemoryScenario {
            mean_m: zero,
            mean_a: vec![zero; n],
            mean_e: vec![zero; n],
            var_m: VACUUM_VARIANCE,
            c: DVector::zeros(n),
            d: DVector::zeros(n),
            var_a: DMatrix::identity(n, n) * VACUUM_VARIANCE,
            var_e: DMatrix::identity(n, n) * VACUUM_VARIANCE,
        }
    }

    /// Vacuum inputs and environment; the memory starts displaced by one and
    /// with one extra unit of variance.
    pub fn displaced_heated_memory(n: usize) -> Self {
        GaussianMemoryScenario {
            mean_m: Complex64::new(1.0, 0.0),
            var_m: VACUUM_VARIANCE + 1.0,
            ..Self::vacuum(n)
        }
    }

    pub fn n(&self) -> usize {
        self.mean_a.len()
    }

    /// The same scenario restricted to the first `n` uses.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        self.check_dims()?;
        if n > self.n() {
            return Err(Error::DimensionMismatch {
                what: "scenario shorter than requested number of uses",
                expected: n,
                got: self.n(),
            });
        }
        Ok(GaussianMemoryScenario {
            mean_m: self.mean_m,
            mean_a: self.mean_a[..n].to_vec(),
            mean_e: self.mean_e[..n].to_vec(),
            var_m: self.var_m,
            c: self.c.rows(0, n).into_owned(),
            d: self.d.rows(0, n).into_owned(),
            var_a: self.var_a.view((0, 0), (n, n)).into_owned(),
            var_e: self.var_e.view((0, 0), (n, n)).into_owned(),
        })
    }

    fn check_dims(&self) -> Result<()> {
        let n = self.n();
        let dims = [
            ("mean_e length", self.mean_e.len()),
            ("C length", self.c.len()),
            ("D length", self.d.len()),
            ("V_a rows", self.var_a.nrows()),
            ("V_a columns", self.var_a.ncols()),
            ("V_e rows", self.var_e.nrows()),
            ("V_e columns", self.var_e.ncols()),
        ];
        for (what, got) in dims {
            if got != n {
                return Err(Error::DimensionMismatch { what, expected: n, got });
            }
        }
        Ok(())
    }

    /// Joint covariance of `(m_1, a, e)`; inputs and environment are taken
    /// uncorrelated with each other.
    pub fn covariance(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut cov = DMatrix::zeros(2 * n + 1, 2 * n + 1);
        cov[(0, 0)] = self.var_m;
        for j in 0..n {
            cov[(0, 1 + j)] = self.c[j];
            cov[(1 + j, 0)] = self.c[j];
            cov[(0, 1 + n + j)] = self.d[j];
            cov[(1 + n + j, 0)] = self.d[j];
        }
        cov.view_mut((1, 1), (n, n)).copy_from(&self.var_a);
        cov.view_mut((1 + n, 1 + n), (n, n)).copy_from(&self.var_e);
        cov
    }

    /// Dimensions agree and the joint covariance is symmetric and positive
    /// semidefinite (smallest eigenvalue `>= -1e-10`).
    pub fn validate(&self) -> Result<()> {
        self.check_dims()?;
        let cov = self.covariance();
        if (&cov - cov.transpose()).abs().max() > 1e-12 * cov.norm().max(1.0) {
            return Err(Error::InvalidParams("covariance is not symmetric".into()));
        }
        let smallest = SymmetricEigen::new(cov).eigenvalues.min();
        if smallest < -1e-10 {
            return Err(Error::InvalidParams(format!(
                "covariance is not positive semidefinite (smallest eigenvalue {smallest:e})"
            )));
        }
        Ok(())
    }
}

/// Weights of the inputs (`X`) and the environment (`Y`) in the memory mode
/// after `n` uses: `X_j = √|1 - κ| rⁿ⁻ʲ`, `Y_j = √((1 - μ)κ) rⁿ⁻ʲ`.
pub fn memory_coupling_vectors(params: &ChannelParams) -> (DVector<f64>, DVector<f64>) {
    let (mu, kappa, n) = (params.mu(), params.kappa(), params.n());
    let r = (mu * kappa).sqrt();
    let x0 = (1.0 - kappa).abs().sqrt();
    let y0 = ((1.0 - mu) * kappa).sqrt();
    let powers = DVector::from_iterator(n, (1..=n).map(|j| memory_power(r, n - j)));
    (&powers * x0, powers * y0)
}

/// First two moments of the outgoing memory mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryMomentResult {
    pub mean_out: Complex64,
    pub var_out: f64,
}

pub fn propagate_memory_moments(scenario: &GaussianMemoryScenario, params: &ChannelParams) -> Result<MemoryMomentResult> {
    scenario.check_dims()?;
    let n = params.n();
    if scenario.n() != n {
        return Err(Error::DimensionMismatch {
            what: "scenario length vs number of uses",
            expected: n,
            got: scenario.n(),
        });
    }
    let (x, y) = memory_coupling_vectors(params);
    let r_n = memory_power(params.product().sqrt(), n);
    let amplifier = params.regime().kind == ChannelKind::Amplifying;

    let mut mean_out = scenario.mean_m * r_n;
    for j in 0..n {
        let a = if amplifier { scenario.mean_a[j].conj() } else { scenario.mean_a[j] };
        mean_out += a * x[j] + scenario.mean_e[j] * y[j];
    }

    let (cross_a, cross_e) = (x.dot(&scenario.c), y.dot(&scenario.d));
    let cross = if amplifier {
        cross_a.abs() + cross_e.abs()
    } else {
        cross_a + cross_e
    };
    let var_out = memory_power(params.product(), n) * scenario.var_m
        + 2.0 * r_n * cross
        + x.dot(&(&scenario.var_a * &x))
        + y.dot(&(&scenario.var_e * &y));
    Ok(MemoryMomentResult { mean_out, var_out })
}

/// One line of a decay report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRow {
    pub n: usize,
    pub delta_mean: f64,
    pub delta_var: f64,
    /// Least-squares slope of `ln delta_var` against `n` over the rows so
    /// far; `None` until two positive points exist.
    pub fitted_rate: Option<f64>,
}

impl DecayRow {
    /// `|Δmean| + |ΔV|`.
    pub fn distance(&self) -> f64 {
        self.delta_mean + self.delta_var
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    /// Fitted decay rate of the variance difference (expected `ln(μκ)`).
    pub variance_rate: Option<f64>,
    /// Fitted decay rate of the mean difference (expected `ln(μκ)/2`).
    pub mean_rate: Option<f64>,
}

/// Slope of the least-squares line through `(n, ln d)` for positive `d`.
fn log_slope(points: impl Iterator<Item = (usize, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .filter(|&(_, d)| d > 0.0 && d.is_finite())
        .map(|(n, d)| (n as f64, d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Distance between the memory outputs of two scenarios as `n` grows.
///
/// Both scenarios must cover the largest `n` in `n_range`; shorter runs use
/// their first `n` uses.
pub fn forgetfulness_decay(
    mu: f64,
    kappa: f64,
    a: &GaussianMemoryScenario,
    b: &GaussianMemoryScenario,
    n_range: &[usize],
) -> Result<DecayReport> {
    let probe = ChannelParams::new(mu, kappa, 1)?;
    if probe.regime().threshold != Threshold::Below {
        return Err(Error::AboveThreshold(format!(
            "mu kappa = {} >= 1: the initial memory state is not forgotten but exponentially enhanced",
            probe.product()
        )));
    }
    a.validate()?;
    b.validate()?;
    let mut rows: Vec<DecayRow> = Vec::with_capacity(n_range.len());
    for &n in n_range {
        let params = probe.with_n(n)?;
        let out_a = propagate_memory_moments(&a.truncated(n)?, &params)?;
        let out_b = propagate_memory_moments(&b.truncated(n)?, &params)?;
        let delta_var = (out_a.var_out - out_b.var_out).abs();
        let fitted_rate = log_slope(
            rows.iter()
                .map(|r| (r.n, r.delta_var))
                .chain(std::iter::once((n, delta_var))),
        );
        rows.push(DecayRow {
            n,
            delta_mean: (out_a.mean_out - out_b.mean_out).norm(),
            delta_var,
            fitted_rate,
        });
    }
    Ok(DecayReport {
        variance_rate: log_slope(rows.iter().map(|r| (r.n, r.delta_var))),
        mean_rate: log_slope(rows.iter().map(|r| (r.n, r.delta_mean))),
        rows,
    })
}

/// Decay of the vacuum against a displaced, heated memory over `n = 1..=n_max`.
pub fn canonical_decay(mu: f64, kappa: f64, n_max: usize) -> Result<DecayReport> {
    if n_max == 0 {
        return Err(Error::InvalidParams("n_max must be at least 1".into()));
    }
    let n_range: Vec<usize> = (1..=n_max).collect();
    forgetfulness_decay(
        mu,
        kappa,
        &GaussianMemoryScenario::vacuum(n_max),
        &GaussianMemoryScenario::displaced_heated_memory(n_max),
        &n_range,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(mu: f64, kappa: f64, n: usize) -> ChannelParams {
        ChannelParams::new(mu, kappa, n).unwrap()
    }

    #[test]
    fn coupling_vectors() {
        let (x, _) = memory_coupling_vectors(&params(0.5, 0.5, 3));
        let s = 0.5f64.sqrt();
        for (got, want) in x.iter().zip([0.25 * s, 0.5 * s, s]) {
            assert!((got - want).abs() < 1e-15);
        }
        let (x, _) = memory_coupling_vectors(&params(0.0, 0.4, 4));
        assert_eq!(&x.as_slice()[..3], &[0.0; 3]);
        assert!((x[3] - 0.6f64.sqrt()).abs() < 1e-15);
        let (x, _) = memory_coupling_vectors(&params(0.7, 1.0, 5));
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vectors_match_iterated_memory_row() {
        // push the memory row of one step through n uses by hand
        for &(mu, kappa) in &[(0.5, 0.5), (0.3, 1.7)] {
            let p = params(mu, kappa, 6);
            let step = crate::model::elementary_step(&p);
            let [rm, ra, re] = step.memory_row();
            let (x, y) = memory_coupling_vectors(&p);
            let (mut wx, mut wy) = (vec![0.0; 6], vec![0.0; 6]);
            for j in 0..6 {
                for k in 0..j {
                    wx[k] *= rm;
                    wy[k] *= rm;
                }
                wx[j] = ra;
                wy[j] = re;
            }
            for j in 0..6 {
                assert!((x[j] - wx[j]).abs() < 1e-14 && (y[j] - wy[j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn vacuum_stays_vacuum_for_attenuator() {
        let p = params(0.5, 0.5, 10);
        let out = propagate_memory_moments(&GaussianMemoryScenario::vacuum(10), &p).unwrap();
        assert_eq!(out.mean_out, Complex64::new(0.0, 0.0));
        // passive optics keep the vacuum
        assert!((out.var_out - VACUUM_VARIANCE).abs() < 1e-14);
    }

    #[test]
    fn displaced_memory_mean() {
        let p = params(0.5, 0.5, 10);
        let out = propagate_memory_moments(&GaussianMemoryScenario::displaced_heated_memory(10), &p).unwrap();
        assert!((out.mean_out.re - 0.25f64.powi(5)).abs() < 1e-18);
    }

    #[test]
    fn means_are_linear() {
        let p = params(0.6, 1.4, 5);
        let mut s1 = GaussianMemoryScenario::vacuum(5);
        s1.mean_a[2] = Complex64::new(0.3, -0.2);
        s1.mean_e[4] = Complex64::new(-1.0, 0.5);
        let mut s2 = GaussianMemoryScenario::vacuum(5);
        s2.mean_m = Complex64::new(0.7, 0.1);
        s2.mean_a[0] = Complex64::new(0.0, 2.0);
        let mut sum = s1.clone();
        sum.mean_m += s2.mean_m;
        for j in 0..5 {
            sum.mean_a[j] += s2.mean_a[j];
            sum.mean_e[j] += s2.mean_e[j];
        }
        let o1 = propagate_memory_moments(&s1, &p).unwrap().mean_out;
        let o2 = propagate_memory_moments(&s2, &p).unwrap().mean_out;
        let o = propagate_memory_moments(&sum, &p).unwrap().mean_out;
        assert!((o - o1 - o2).norm() < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        let p = params(0.5, 0.5, 4);
        assert!(matches!(
            propagate_memory_moments(&GaussianMemoryScenario::vacuum(3), &p),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut s = GaussianMemoryScenario::vacuum(4);
        s.c = DVector::zeros(3);
        assert!(propagate_memory_moments(&s, &p).is_err());
    }

    #[test]
    fn validate_rejects_unphysical() {
        let mut s = GaussianMemoryScenario::vacuum(3);
        s.c[1] = 2.0;
        assert!(s.validate().is_err());
        assert!(GaussianMemoryScenario::displaced_heated_memory(3).validate().is_ok());
    }

    #[test]
    fn variance_difference_is_geometric() {
        let vac = GaussianMemoryScenario::vacuum(20);
        let hot = GaussianMemoryScenario::displaced_heated_memory(20);
        let rep = forgetfulness_decay(0.5, 0.5, &vac, &hot, &[5, 10, 20]).unwrap();
        for (row, k) in rep.rows.iter().zip([5, 10, 20]) {
            assert!((row.delta_var - 0.25f64.powi(k)).abs() < 1e-15 * 0.25f64.powi(k).max(1e-300));
        }
        assert!((rep.variance_rate.unwrap() - 0.25f64.ln()).abs() < 1e-10);
        assert!((rep.mean_rate.unwrap() - 0.5 * 0.25f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn identical_scenarios_do_not_differ() {
        let s = GaussianMemoryScenario::displaced_heated_memory(8);
        let rep = forgetfulness_decay(0.5, 0.5, &s, &s, &[1, 4, 8]).unwrap();
        assert!(rep.rows.iter().all(|r| r.distance() == 0.0));
        assert_eq!(rep.variance_rate, None);
    }

    #[test]
    fn memoryless_forgets_at_once() {
        let rep = canonical_decay(0.0, 0.5, 5).unwrap();
        assert!(rep.rows.iter().all(|r| r.distance() == 0.0));
    }

    #[test]
    fn rejects_threshold_and_above() {
        assert!(matches!(canonical_decay(0.8, 1.5, 5), Err(Error::AboveThreshold(_))));
        assert!(matches!(canonical_decay(0.5, 2.0, 5), Err(Error::AboveThreshold(_))));
    }

    #[test]
    fn amplifier_below_threshold_decays() {
        let rep = canonical_decay(0.5, 1.62, 30).unwrap();
        let rate = rep.variance_rate.unwrap();
        assert!((rate - 0.81f64.ln()).abs() < 1e-10);
    }
}
