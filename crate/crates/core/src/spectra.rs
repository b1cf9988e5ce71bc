//! Spectra of the Gram matrix and the memory unraveling.
//!
//! For every `n` the couplings factor as `A = O diag(√η) O'` and
//! `E = O diag(√|η - 1|) O''`, which turns `n` correlated uses into `n`
//! independent single-mode channels with transmissivities (gains) `η_j`.
//! For large `n` the `η_j` distribute like the Toeplitz symbol
//!
//! ```text
//! η(z) = (μ + κ - 2√(μκ) cos(z/2)) / (1 + μκ - 2√(μκ) cos(z/2)),   z ∈ [0, 2π]
//! ```
//!
//! below threshold. Above threshold one eigenvalue diverges and the rest still
//! follow `η(z)`; [`threshold_split`] makes that explicit.

use nalgebra::{DMatrix, DVector, RowDVector, SymmetricEigen};
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::model::{build_gram_matrix, check_mu_kappa, ChannelParams, ModeCouplingMatrices, Threshold};

/// Residual bound for eigenpairs, relative to `‖M‖_F`.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;

/// Ascending eigenvalues with matching orthonormal eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Symmetric eigendecomposition with a residual check on every pair.
///
/// Eigenvalues come back ascending, ties broken by solver order. Each
/// eigenvector is signed so that its largest-magnitude entry is positive.
pub fn eigen_spectrum(m: &DMatrix<f64>) -> Result<EigenDecomposition> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "eigen_spectrum expects a square matrix",
            expected: n,
            got: m.ncols(),
        });
    }
    let norm = m.norm();
    let asym = (m - m.transpose()).abs().max();
    if asym > 1e-12 * norm.max(1.0) {
        return Err(Error::InvalidParams(format!(
            "matrix is not symmetric (max asymmetry {asym:e})"
        )));
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 1000 * n.max(1)).ok_or_else(|| {
        Error::Eigen {
            reason: "no convergence within the iteration cap".into(),
            residual: f64::NAN,
        }
    })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));

    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            v = -v;
        }
        values.push(eig.eigenvalues[i]);
        vectors.set_column(k, &v);
    }

    let scale = norm.max(f64::MIN_POSITIVE);
    for (k, &lambda) in values.iter().enumerate() {
        let v = vectors.column(k);
        let residual = (m * v - v * lambda).norm();
        if residual > EIGEN_RESIDUAL_TOL * scale {
            return Err(Error::Eigen {
                reason: format!("eigenpair {k} misses the residual bound"),
                residual: residual / scale,
            });
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Sorted eigenvalues `η⁽ⁿ⁾_j` of the closed-form Gram matrix.
pub fn gram_spectrum(params: &ChannelParams) -> Result<Vec<f64>> {
    let gram = build_gram_matrix(params)?;
    Ok(eigen_spectrum(&gram.matrix)?.values)
}

/// Memoized Gram spectra of one channel at several `n`.
#[derive(Debug)]
pub struct SpectrumCache {
    mu: f64,
    kappa: f64,
    spectra: Mutex<HashMap<usize, Arc<Vec<f64>>>>,
}

impl SpectrumCache {
    pub fn new(mu: f64, kappa: f64) -> Result<Self> {
        check_mu_kappa(mu, kappa)?;
        Ok(SpectrumCache {
            mu,
            kappa,
            spectra: Mutex::new(HashMap::new()),
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Ascending eigenvalues of `M` at `n` uses.
    pub fn spectrum(&self, n: usize) -> Result<Arc<Vec<f64>>> {
        if let Some(s) = self.spectra.lock().expect("spectrum cache poisoned").get(&n) {
            return Ok(Arc::clone(s));
        }
        let s = Arc::new(gram_spectrum(&ChannelParams::new(self.mu, self.kappa, n)?)?);
        self.spectra
            .lock()
            .expect("spectrum cache poisoned")
            .insert(n, Arc::clone(&s));
        Ok(s)
    }
}

/// Normal-mode decomposition of `n` channel uses.
#[derive(Debug, Clone)]
pub struct SpectrumDecomposition {
    /// Transmissivities (gains), ascending.
    pub eta: Vec<f64>,
    /// Output rotation, `n × n`; column `j` belongs to `eta[j]`.
    pub o: DMatrix<f64>,
    /// Input rotation (the encoding), `n × n`.
    pub o_prime: DMatrix<f64>,
    /// Environment rotation, `n × (n + 1)` with orthonormal rows.
    pub o_double_prime: DMatrix<f64>,
}

impl SpectrumDecomposition {
    /// `O diag(√η) O'`.
    pub fn reconstruct_a(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            self.eta.len(),
            self.eta.iter().map(|e| e.sqrt()),
        ));
        &self.o * d * &self.o_prime
    }

    /// `O diag(√|η - 1|) O''`.
    pub fn reconstruct_e(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            self.eta.len(),
            self.eta.iter().map(|e| (e - 1.0).abs().sqrt()),
        ));
        &self.o * d * &self.o_double_prime
    }
}

/// Unravel the memory: joint rotations of inputs, outputs and environment
/// that diagonalize the `n`-use channel.
pub fn unravel(mats: &ModeCouplingMatrices) -> Result<SpectrumDecomposition> {
    let n = mats.a.nrows();
    let eig = eigen_spectrum(&mats.gram())?;
    let o = eig.vectors;

    let a_rows: Vec<RowDVector<f64>> = (0..n).map(|j| o.column(j).transpose() * &mats.a).collect();
    let e_rows: Vec<RowDVector<f64>> = (0..n).map(|j| o.column(j).transpose() * &mats.e).collect();
    // read η off the rotated rows rather than the eigenvalues: the squared
    // norms agree with them to rounding and keep relative accuracy where
    // η or |η - 1| is tiny
    let amplifier = mats.params.kappa() > 1.0;
    let eta: Vec<f64> = a_rows
        .iter()
        .zip(&e_rows)
        .map(|(a, e)| {
            let (s2, t2) = (a.norm_squared(), e.norm_squared());
            if amplifier {
                1.0 + t2
            } else if s2 <= 0.5 {
                s2
            } else {
                1.0 - t2
            }
        })
        .collect();

    let o_prime = orthonormal_rows(a_rows, n);
    let o_double_prime = orthonormal_rows(e_rows, n + 1);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eta[i].total_cmp(&eta[j]).then(i.cmp(&j)));
    let mut out = SpectrumDecomposition {
        eta: Vec::with_capacity(n),
        o: DMatrix::zeros(n, n),
        o_prime: DMatrix::zeros(n, n),
        o_double_prime: DMatrix::zeros(n, n + 1),
    };
    for (k, &i) in order.iter().enumerate() {
        out.eta.push(eta[i]);
        out.o.set_column(k, &o.column(i));
        out.o_prime.set_row(k, &o_prime.row(i));
        out.o_double_prime.set_row(k, &o_double_prime.row(i));
    }
    Ok(out)
}

/// Normalize `rows` into an orthonormal set in `R^dim`. Rows that vanish (or
/// collapse under re-orthogonalization) are replaced by completions drawn
/// from the standard basis.
fn orthonormal_rows(rows: Vec<RowDVector<f64>>, dim: usize) -> DMatrix<f64> {
    let n = rows.len();
    let norms: Vec<f64> = rows.iter().map(|r| r.norm()).collect();
    let cutoff = 1e-13 * norms.iter().copied().fold(1.0, f64::max);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let mut basis: Vec<RowDVector<f64>> = Vec::with_capacity(n);
    let mut out = DMatrix::zeros(n, dim);
    let mut missing = Vec::new();
    for &i in &order {
        if norms[i] <= cutoff {
            missing.push(i);
            continue;
        }
        let mut v = &rows[i] / norms[i];
        project_out(&mut v, &basis);
        let len = v.norm();
        if len < 0.5 {
            missing.push(i);
            continue;
        }
        v /= len;
        out.set_row(i, &v);
        basis.push(v);
    }

    let floor = (0.5 / dim as f64).sqrt();
    let mut next = 0;
    for i in missing {
        while next < dim {
            let mut v = RowDVector::zeros(dim);
            v[next] = 1.0;
            next += 1;
            project_out(&mut v, &basis);
            let len = v.norm();
            if len >= floor {
                v /= len;
                out.set_row(i, &v);
                basis.push(v);
                break;
            }
        }
    }
    out
}

fn project_out(v: &mut RowDVector<f64>, basis: &[RowDVector<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let d = v.dot(b);
            *v -= b * d;
        }
    }
}

/// The Toeplitz symbol `η(z)` of the infinite Gram matrix.
///
/// The half angle `θ = z/2` is the natural variable: `η` is monotone in
/// `θ ∈ [0, π]`, increasing for the attenuator and decreasing for the
/// amplifier. At `μκ = 1` the symbol has a pole at `z = 0`, reported as
/// `+∞`. When `μ ∈ {0, 1}` or `κ ∈ {0, 1}` the symbol is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticSymbol {
    mu: f64,
    kappa: f64,
    r: f64,
    flat: Option<f64>,
}

impl AsymptoticSymbol {
    pub fn new(mu: f64, kappa: f64) -> Result<Self> {
        check_mu_kappa(mu, kappa)?;
        let flat = if mu == 1.0 || kappa == 1.0 {
            Some(1.0)
        } else if mu == 0.0 {
            Some(kappa)
        } else if kappa == 0.0 {
            Some(mu)
        } else {
            None
        };
        Ok(AsymptoticSymbol {
            mu,
            kappa,
            r: (mu * kappa).sqrt(),
            flat,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// The constant value when the symbol does not depend on `z`.
    pub fn flat_value(&self) -> Option<f64> {
        self.flat
    }

    /// `η(z)` for `z ∈ [0, 2π]`.
    pub fn eval(&self, z: f64) -> f64 {
        self.at_half_angle(0.5 * z)
    }

    pub fn at_half_angle(&self, theta: f64) -> f64 {
        if let Some(v) = self.flat {
            return v;
        }
        let s = (0.5 * theta).sin();
        let bump = 4.0 * self.r * s * s;
        let num = (self.mu.sqrt() - self.kappa.sqrt()).powi(2) + bump;
        let den = (1.0 - self.r).powi(2) + bump;
        if den == 0.0 {
            f64::INFINITY
        } else {
            num / den
        }
    }

    /// `(κ - 1)(1 - μ)`: the symbol is `1 + excess / den(θ)`.
    fn excess(&self) -> f64 {
        (self.kappa - 1.0) * (1.0 - self.mu)
    }

    /// `θ ∈ [0, π]` with `η(2θ) = value`, if the symbol attains it.
    pub fn half_angle_preimage(&self, value: f64) -> Option<f64> {
        if self.flat.is_some() || value == 1.0 || !value.is_finite() {
            return None;
        }
        let den = self.excess() / (value - 1.0);
        if den <= 0.0 {
            return None;
        }
        let s2 = (den - (1.0 - self.r).powi(2)) / (4.0 * self.r);
        if !(0.0..=1.0).contains(&s2) {
            return None;
        }
        Some(2.0 * s2.sqrt().asin())
    }

    /// Half-width in `θ` of the peak at `z = 0`, `|1 - √(μκ)| / (μκ)^{1/4}`;
    /// zero for flat symbols and exactly at threshold.
    pub fn peak_width(&self) -> f64 {
        if self.flat.is_some() {
            return 0.0;
        }
        (1.0 - self.r).abs() / self.r.sqrt()
    }

    /// Closed-form `(1/2π) ∫ η(z) dz = 1 + (κ - 1)(1 - μ) / |1 - μκ|`
    /// (equal to `κ^(∞)` below threshold, `+∞` at threshold).
    pub fn mean(&self) -> f64 {
        if let Some(v) = self.flat {
            return v;
        }
        let gap = (1.0 - self.r * self.r).abs();
        if gap == 0.0 {
            f64::INFINITY
        } else {
            1.0 + self.excess() / gap
        }
    }

    /// Smallest and largest value on `[0, 2π]`.
    pub fn range(&self) -> (f64, f64) {
        let (a, b) = (self.at_half_angle(0.0), self.at_half_angle(PI));
        (a.min(b), a.max(b))
    }

    /// `P(η(z) ≤ t)` for `z` uniform on `[0, 2π]`.
    pub fn cdf(&self, t: f64) -> f64 {
        if let Some(v) = self.flat {
            return if t >= v { 1.0 } else { 0.0 };
        }
        let (lo, hi) = self.range();
        if t < lo {
            return 0.0;
        }
        if t >= hi {
            return 1.0;
        }
        let theta = self.half_angle_preimage(t).unwrap_or(if self.excess() < 0.0 { PI } else { 0.0 });
        if self.excess() < 0.0 {
            theta / PI
        } else {
            1.0 - theta / PI
        }
    }
}

/// Standalone `η(z)`.
pub fn symbol_eval(mu: f64, kappa: f64, z: f64) -> Result<f64> {
    Ok(AsymptoticSymbol::new(mu, kappa)?.eval(z))
}

/// Rank-one plus remainder split of the above-threshold Gram matrix,
/// `M = c ψψᵀ + ΔM`, with `‖ψ‖ = 1` and `c` growing like `(μκ)ⁿ`.
///
/// With `r = √(μκ)`:
///
/// ```text
/// ψ_j ∝ α r^j - δ r^{-j},   α = (κ-1)/√(κ(μκ-1)),   δ = (1-μ)√(κ/(μκ-1))
/// ΔM_jk = δ_jk + a r^{-|j-k|} - δ² r^{-(j+k)},       a = (1-μ)(κ-1)/(μκ-1)
/// ```
///
/// `ΔM` tends to the Toeplitz matrix `I + a r^{-|j-k|}`, whose symbol is
/// `η(z)` continued above threshold.
#[derive(Debug, Clone)]
pub struct ThresholdSplit {
    pub c: f64,
    pub psi: DVector<f64>,
    pub delta_m: DMatrix<f64>,
}

impl ThresholdSplit {
    pub fn projector(&self) -> DMatrix<f64> {
        &self.psi * self.psi.transpose()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.projector() * self.c + &self.delta_m
    }

    /// `‖[ψψᵀ, ΔM]‖_F / ‖ΔM‖_F`.
    pub fn commutator_ratio(&self) -> f64 {
        let p = self.projector();
        let comm = &p * &self.delta_m - &self.delta_m * &p;
        comm.norm() / self.delta_m.norm()
    }
}

pub fn threshold_split(params: &ChannelParams) -> Result<ThresholdSplit> {
    if params.regime().threshold != Threshold::Above {
        return Err(Error::InvalidParams(format!(
            "threshold split needs mu kappa > 1, got {}",
            params.product()
        )));
    }
    // representability is the same as for M itself
    build_gram_matrix(&params.with_n(1)?)?;
    if params.n() as f64 * params.product().ln() > crate::model::MAX_LOG_SCALE {
        return Err(Error::Overflow {
            n: params.n(),
            product: params.product(),
        });
    }
    let (mu, kappa, n) = (params.mu(), params.kappa(), params.n());
    let x = mu * kappa;
    let r = x.sqrt();
    let alpha = (kappa - 1.0) / (kappa * (x - 1.0)).sqrt();
    let delta = (1.0 - mu) * (kappa / (x - 1.0)).sqrt();
    let a = (1.0 - mu) * (kappa - 1.0) / (x - 1.0);

    let up: Vec<f64> = (1..=n).map(|j| crate::model::memory_power(r, j)).collect();
    let down: Vec<f64> = (1..=n).map(|j| crate::model::memory_power(1.0 / r, j)).collect();
    let v = DVector::from_iterator(n, (0..n).map(|j| alpha * up[j] - delta * down[j]));
    let c = v.norm_squared();
    let psi = v / c.sqrt();
    let delta_m = DMatrix::from_fn(n, n, |j, k| {
        let diag = if j == k { 1.0 } else { 0.0 };
        let toeplitz = if j == k { 1.0 } else { down[j.abs_diff(k) - 1] };
        diag + a * toeplitz - delta * delta * down[j] * down[k]
    });
    Ok(ThresholdSplit { c, psi, delta_m })
}

/// Entry of the limiting remainder `ΔM^(∞)` at lag `d`.
pub fn asymptotic_remainder(mu: f64, kappa: f64, lag: usize) -> f64 {
    let x = mu * kappa;
    let a = (1.0 - mu) * (kappa - 1.0) / (x - 1.0);
    let diag = if lag == 0 { 1.0 } else { 0.0 };
    diag + a * x.sqrt().powi(-(lag as i32))
}

/// One line of a spectrum fit: how far the finite eigenvalues at `n` are
/// from the symbol's distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitRow {
    pub n: usize,
    pub ks_distance: f64,
    pub trimmed_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub rows: Vec<FitRow>,
}

impl FitReport {
    /// Distances never grow by more than `slack` from one `n` to the next.
    pub fn is_non_increasing(&self, slack: f64) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].ks_distance <= w[0].ks_distance + slack)
    }
}

/// Kolmogorov-Smirnov distance between a sample and the symbol distribution.
pub fn ks_distance(sample: &[f64], symbol: &AsymptoticSymbol) -> f64 {
    let m = sample.len();
    if m == 0 {
        return 0.0;
    }
    if let Some(v) = symbol.flat_value() {
        let tol = 1e-9 * v.abs().max(1.0);
        let off = sample.iter().filter(|s| (*s - v).abs() > tol).count();
        return off as f64 / m as f64;
    }
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = symbol.cdf(x);
            let above = (i + 1) as f64 / m as f64 - f;
            let below = f - i as f64 / m as f64;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Compare finite-`n` spectra with the symbol.
///
/// The largest eigenvalues are dropped before comparison: none below
/// threshold, one above (the diverging eigenvalue), and `at_threshold_trim`
/// (default 1) at threshold.
pub fn finite_spectrum_fit(
    mu: f64,
    kappa: f64,
    n_list: &[usize],
    at_threshold_trim: Option<usize>,
) -> Result<FitReport> {
    let symbol = AsymptoticSymbol::new(mu, kappa)?;
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("n_list must be strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let params = ChannelParams::new(mu, kappa, n)?;
        let trim = match params.regime().threshold {
            Threshold::Below => 0,
            Threshold::Above => 1,
            Threshold::At => at_threshold_trim.unwrap_or(1),
        }
        .min(n);
        let eta = gram_spectrum(&params)?;
        let kept = &eta[..n - trim];
        rows.push(FitRow {
            n,
            ks_distance: ks_distance(kept, &symbol),
            trimmed_count: trim,
        });
    }
    Ok(FitReport { rows })
}
