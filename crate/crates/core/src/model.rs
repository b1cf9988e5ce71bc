//! Linear-optics description of the memory channel.
//!
//! A single use couples the input mode `a`, the memory mode `m` and a local
//! vacuum environment `e` through a beam splitter of transmissivity `mu`
//! (memory/environment) followed by either a second beam splitter of
//! transmissivity `kappa <= 1` or a linear amplifier of gain `kappa > 1`
//! (memory/input). Chaining `n` uses, with the outgoing memory of use `j`
//! fed into use `j + 1`, gives outputs
//!
//! ```text
//! b = A a - E e      (kappa <= 1)
//! b = A a + E e^†    (kappa > 1)
//! ```
//!
//! where the environment vector is `(m_1, e_1, ..., e_n)`, so `E` has one
//! more column than `A`. Both matrices are lower triangular (a use only
//! influences later outputs) and satisfy `A Aᵀ ± E Eᵀ = I`.

use nalgebra::{DMatrix, Matrix3};

use crate::error::{Error, Result};

/// Largest number of uses accepted by the matrix builders.
pub const N_MAX: usize = 2048;

/// Relative tolerance on `|mu kappa - 1|` for the at-threshold classification.
pub const THRESHOLD_TOLERANCE: f64 = 1e-12;

/// `(mu kappa)^n` must stay below `e^MAX_LOG_SCALE` for the matrices to be
/// representable.
pub const MAX_LOG_SCALE: f64 = 700.0;

/// Attenuation or amplification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum ChannelKind {
    Attenuating,
    Amplifying,
}

/// Position of `mu kappa` relative to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Threshold {
    Below,
    At,
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct Regime {
    pub kind: ChannelKind,
    pub threshold: Threshold,
}

/// Memory parameter, transmissivity/gain and number of channel uses.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ChannelParams {
    mu: f64,
    kappa: f64,
    n: usize,
}

impl ChannelParams {
    pub fn new(mu: f64, kappa: f64, n: usize) -> Result<Self> {
        check_mu_kappa(mu, kappa)?;
        if n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        Ok(ChannelParams { mu, kappa, n })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Same channel, different number of uses.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        ChannelParams::new(self.mu, self.kappa, n)
    }

    /// The threshold product `mu kappa`.
    pub fn product(&self) -> f64 {
        self.mu * self.kappa
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self)
    }
}

pub(crate) fn check_mu_kappa(mu: f64, kappa: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::InvalidParams(format!("mu = {mu} outside [0, 1]")));
    }
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParams(format!("kappa = {kappa} must be finite and >= 0")));
    }
    Ok(())
}

pub fn classify_regime(params: &ChannelParams) -> Regime {
    regime_of(params.mu, params.kappa)
}

pub(crate) fn regime_of(mu: f64, kappa: f64) -> Regime {
    let kind = if kappa <= 1.0 {
        ChannelKind::Attenuating
    } else {
        ChannelKind::Amplifying
    };
    let x = mu * kappa;
    let threshold = if (x - 1.0).abs() <= THRESHOLD_TOLERANCE {
        Threshold::At
    } else if x < 1.0 {
        Threshold::Below
    } else {
        Threshold::Above
    };
    Regime { kind, threshold }
}

/// Coefficients of one channel use.
///
/// Rows are the outgoing memory `m'`, the output `b` and the outgoing
/// environment `e'`; columns are the incoming `m`, `a`, `e`. For the
/// attenuator the map acts on `(m, a, e)` and is orthogonal. For the
/// amplifier the input and output signal enter conjugated, i.e. the map acts
/// on `(m, a†, e) -> (m', b†, e')` and preserves `diag(1, -1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementaryStep {
    pub kind: ChannelKind,
    pub coefficients: Matrix3<f64>,
}

impl ElementaryStep {
    pub fn memory_row(&self) -> [f64; 3] {
        row(&self.coefficients, 0)
    }

    pub fn output_row(&self) -> [f64; 3] {
        row(&self.coefficients, 1)
    }
}

fn row(m: &Matrix3<f64>, i: usize) -> [f64; 3] {
    [m[(i, 0)], m[(i, 1)], m[(i, 2)]]
}

pub fn elementary_step(params: &ChannelParams) -> ElementaryStep {
    let (mu, kappa) = (params.mu, params.kappa);
    let r = (mu * kappa).sqrt();
    let env_out = [-(1.0 - mu).sqrt(), 0.0, mu.sqrt()];
    if kappa <= 1.0 {
        let loss = 1.0 - kappa;
        ElementaryStep {
            kind: ChannelKind::Attenuating,
            coefficients: Matrix3::new(
                r,
                loss.sqrt(),
                ((1.0 - mu) * kappa).sqrt(),
                -(mu * loss).sqrt(),
                kappa.sqrt(),
                -((1.0 - mu) * loss).sqrt(),
                env_out[0],
                env_out[1],
                env_out[2],
            ),
        }
    } else {
        let gain = kappa - 1.0;
        ElementaryStep {
            kind: ChannelKind::Amplifying,
            coefficients: Matrix3::new(
                r,
                gain.sqrt(),
                ((1.0 - mu) * kappa).sqrt(),
                (mu * gain).sqrt(),
                kappa.sqrt(),
                ((1.0 - mu) * gain).sqrt(),
                env_out[0],
                env_out[1],
                env_out[2],
            ),
        }
    }
}

/// `sqrt(mu kappa)^k`, in log space for large exponents above threshold.
pub(crate) fn memory_power(r: f64, k: usize) -> f64 {
    if r > 1.0 && k > 50 {
        (k as f64 * r.ln()).exp()
    } else {
        r.powi(k as i32)
    }
}

fn check_size(params: &ChannelParams) -> Result<()> {
    if params.n > N_MAX {
        return Err(Error::TooManyUses {
            n: params.n,
            max: N_MAX,
        });
    }
    let x = params.product();
    if x > 1.0 && params.n as f64 * x.ln() > MAX_LOG_SCALE {
        return Err(Error::Overflow {
            n: params.n,
            product: x,
        });
    }
    Ok(())
}

/// Input and environment couplings of `n` uses.
///
/// `e` column 0 is the initial memory mode. Entries are stored with positive
/// prefactors; the attenuator's output subtracts the environment term.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCouplingMatrices {
    pub params: ChannelParams,
    pub a: DMatrix<f64>,
    pub e: DMatrix<f64>,
}

impl ModeCouplingMatrices {
    /// `A Aᵀ + E Eᵀ` for the attenuator, `A Aᵀ - E Eᵀ` for the amplifier.
    pub fn commutator(&self) -> DMatrix<f64> {
        let aat = &self.a * self.a.transpose();
        let eet = &self.e * self.e.transpose();
        match self.params.regime().kind {
            ChannelKind::Attenuating => aat + eet,
            ChannelKind::Amplifying => aat - eet,
        }
    }

    pub fn gram(&self) -> DMatrix<f64> {
        &self.a * self.a.transpose()
    }
}

pub fn build_coupling_matrices(params: &ChannelParams) -> Result<ModeCouplingMatrices> {
    check_size(params)?;
    let n = params.n;
    let (mu, kappa) = (params.mu, params.kappa);
    let r = (mu * kappa).sqrt();
    let noise = (1.0 - kappa).abs();

    let diag = kappa.sqrt();
    let feed = mu.sqrt() * (kappa - 1.0);
    let a = DMatrix::from_fn(n, n, |j, h| match j.cmp(&h) {
        std::cmp::Ordering::Equal => diag,
        std::cmp::Ordering::Greater => feed * memory_power(r, j - h - 1),
        std::cmp::Ordering::Less => 0.0,
    });

    let memory = (mu * noise).sqrt();
    let local = ((1.0 - mu) * noise).sqrt();
    // column h >= 1 is e_h; row j is b_{j+1}
    let e = DMatrix::from_fn(n, n + 1, |j, h| {
        if h == 0 {
            memory * memory_power(r, j)
        } else if h <= j + 1 {
            local * memory_power(r, j + 1 - h)
        } else {
            0.0
        }
    });

    Ok(ModeCouplingMatrices {
        params: *params,
        a,
        e,
    })
}

/// The Gram matrix `M = A Aᵀ` whose eigenvalues are the transmissivities
/// (or gains) of the unraveled channels.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub params: ChannelParams,
    pub matrix: DMatrix<f64>,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn trace_per_use(&self) -> f64 {
        self.matrix.trace() / self.params.n as f64
    }
}

/// Closed-form `M` built entry by entry, without forming `A`.
pub fn build_gram_matrix(params: &ChannelParams) -> Result<GramMatrix> {
    check_size(params)?;
    let n = params.n;
    let (mu, kappa) = (params.mu, params.kappa);

    if params.regime().threshold == Threshold::At {
        if mu == 0.0 {
            return Err(Error::InvalidParams(
                "at-threshold Gram matrix needs mu > 0".into(),
            ));
        }
        let base = 1.0 - mu;
        let slope = (1.0 - mu) * (1.0 - mu) / mu;
        let matrix = DMatrix::from_fn(n, n, |j, h| {
            let delta = if j == h { 1.0 } else { 0.0 };
            delta + base + slope * (j.min(h) + 1) as f64
        });
        return Ok(GramMatrix {
            params: *params,
            matrix,
        });
    }

    let x = mu * kappa;
    let r = x.sqrt();
    // partial[m-1] = sum_{t=0}^{m-2} x^t for m = 1..n
    let mut partial = vec![0.0; n];
    let mut term = 1.0;
    for m in 1..n {
        partial[m] = partial[m - 1] + term;
        term *= x;
    }
    let excess = mu * (kappa - 1.0) * (kappa - 1.0);
    let powers: Vec<f64> = (0..n).map(|k| memory_power(r, k)).collect();

    let matrix = DMatrix::from_fn(n, n, |j, h| {
        let delta = if j == h { 1.0 } else { 0.0 };
        let kappa_jh = kappa + excess * partial[j.min(h)];
        delta + (kappa_jh - 1.0) * powers[j.abs_diff(h)]
    });
    Ok(GramMatrix {
        params: *params,
        matrix,
    })
}

/// `kappa^(inf) = kappa + mu (kappa - 1)^2 / (1 - mu kappa)`, the limiting
/// diagonal of `M` below threshold.
pub fn asymptotic_diagonal(mu: f64, kappa: f64) -> f64 {
    kappa + mu * (kappa - 1.0) * (kappa - 1.0) / (1.0 - mu * kappa)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(mu: f64, kappa: f64, n: usize) -> ChannelParams {
        ChannelParams::new(mu, kappa, n).unwrap()
    }

    /// Propagate unit amplitudes through `n` elementary steps and read off the
    /// output couplings. Independent of the closed-form builders.
    fn iterate_steps(p: &ChannelParams) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = p.n();
        let step = elementary_step(p);
        let [mm, ma, me] = step.memory_row();
        let [bm, ba, be] = step.output_row();
        // memory amplitude over (a_1..a_n, m_1, e_1..e_n)
        let width = 2 * n + 1;
        let mut memory = vec![0.0; width];
        memory[n] = 1.0;
        let mut a = DMatrix::zeros(n, n);
        let mut e = DMatrix::zeros(n, n + 1);
        // attenuator comes out as -E (the output subtracts the environment)
        for j in 0..n {
            let mut out = vec![0.0; width];
            for k in 0..width {
                out[k] = bm * memory[k];
            }
            out[j] += ba;
            out[n + 1 + j] += be;
            for h in 0..n {
                a[(j, h)] = out[h];
            }
            for h in 0..=n {
                e[(j, h)] = out[n + h];
            }
            let mut next = vec![0.0; width];
            for k in 0..width {
                next[k] = mm * memory[k];
            }
            next[j] += ma;
            next[n + 1 + j] += me;
            memory = next;
        }
        (a, e)
    }

    #[test]
    fn regime_examples() {
        let r = params(0.5, 0.5, 1).regime();
        assert_eq!(r.kind, ChannelKind::Attenuating);
        assert_eq!(r.threshold, Threshold::Below);
        let r = params(0.5, 2.0, 1).regime();
        assert_eq!(r.kind, ChannelKind::Amplifying);
        assert_eq!(r.threshold, Threshold::At);
        let r = params(0.9, 1.5, 1).regime();
        assert_eq!(r.kind, ChannelKind::Amplifying);
        assert_eq!(r.threshold, Threshold::Above);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ChannelParams::new(-0.1, 0.5, 1).is_err());
        assert!(ChannelParams::new(1.1, 0.5, 1).is_err());
        assert!(ChannelParams::new(0.5, -1.0, 1).is_err());
        assert!(ChannelParams::new(0.5, f64::NAN, 1).is_err());
        assert!(ChannelParams::new(0.5, 0.5, 0).is_err());
        let big = params(0.5, 0.5, N_MAX + 1);
        assert!(matches!(
            build_coupling_matrices(&big),
            Err(Error::TooManyUses { .. })
        ));
        let huge = params(1.0, 4.0, 1024);
        assert!(matches!(
            build_gram_matrix(&huge),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn elementary_identity_wiring() {
        let s = elementary_step(&params(1.0, 1.0, 1));
        assert_eq!(s.memory_row(), [1.0, 0.0, 0.0]);
        assert_eq!(s.output_row(), [-0.0, 1.0, -0.0]);
    }

    #[test]
    fn elementary_attenuator_values() {
        let s = elementary_step(&params(0.5, 0.5, 1));
        let m = s.memory_row();
        assert!((m[0] - 0.5).abs() < 1e-15);
        assert!((m[1] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((m[2] - 0.5).abs() < 1e-15);
        let c = s.coefficients;
        assert!((c * c.transpose() - Matrix3::identity()).abs().max() < 1e-15);
    }

    #[test]
    fn elementary_amplifier_values() {
        let s = elementary_step(&params(0.5, 2.0, 1));
        let [m, a, e] = s.output_row();
        assert!((a - 2f64.sqrt()).abs() < 1e-15);
        assert!((e - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((m - 0.5f64.sqrt()).abs() < 1e-15);
        let c = s.coefficients;
        let g = Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, -1.0, 1.0));
        assert!((c * g * c.transpose() - g).abs().max() < 1e-14);
    }

    #[test]
    fn single_use_matrices() {
        for &mu in &[0.0, 0.3, 1.0] {
            let m = build_coupling_matrices(&params(mu, 0.5, 1)).unwrap();
            assert!((m.a[(0, 0)] - 0.5f64.sqrt()).abs() < 1e-15);
            let sum = m.a[(0, 0)].powi(2) + m.e.row(0).iter().map(|v| v * v).sum::<f64>();
            assert!((sum - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_use_attenuator_matrix() {
        let m = build_coupling_matrices(&params(0.5, 0.5, 2)).unwrap();
        assert!((m.a[(0, 0)] - 0.707_106_781_186_547_5).abs() < 1e-15);
        assert_eq!(m.a[(0, 1)], 0.0);
        // sqrt(mu) (kappa - 1) = -0.353553...
        assert!((m.a[(1, 0)] + 0.353_553_390_593_273_8).abs() < 1e-15);
        assert!((m.a[(1, 1)] - 0.707_106_781_186_547_5).abs() < 1e-15);
        let (a, e) = iterate_steps(&params(0.5, 0.5, 2));
        assert!((&a - &m.a).abs().max() < 1e-15);
        assert!((&e + &m.e).abs().max() < 1e-15);
    }

    #[test]
    fn memoryless_limit() {
        let m = build_coupling_matrices(&params(0.0, 0.7, 6)).unwrap();
        assert!((&m.a - DMatrix::identity(6, 6) * 0.7f64.sqrt()).abs().max() < 1e-15);
        assert!(m.e.column(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_iterated_steps() {
        for &(mu, kappa) in &[(0.3, 0.6), (0.9, 0.2), (0.4, 1.7), (0.9, 1.5), (0.5, 2.0), (0.0, 0.0)] {
            let p = params(mu, kappa, 9);
            let m = build_coupling_matrices(&p).unwrap();
            let (a, e) = iterate_steps(&p);
            assert!((&a - &m.a).abs().max() < 1e-13, "A at {mu},{kappa}");
            let e_ref = if p.regime().kind == ChannelKind::Attenuating { -e } else { e };
            assert!((&e_ref - &m.e).abs().max() < 1e-13, "E at {mu},{kappa}");
        }
    }

    #[test]
    fn causal_structure() {
        let m = build_coupling_matrices(&params(0.6, 1.3, 12)).unwrap();
        for j in 0..12 {
            for h in j + 1..12 {
                assert_eq!(m.a[(j, h)], 0.0);
            }
            for h in j + 2..13 {
                assert_eq!(m.e[(j, h)], 0.0);
            }
        }
    }

    #[test]
    fn gram_small_examples() {
        let g = build_gram_matrix(&params(0.5, 0.5, 2)).unwrap().matrix;
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, -0.25, -0.25, 0.625]);
        assert!((&g - &expected).abs().max() < 1e-15);

        for &kappa in &[0.0, 0.3, 1.0, 2.5] {
            let g = build_gram_matrix(&params(0.4, kappa, 1)).unwrap().matrix;
            assert!((g[(0, 0)] - kappa).abs() < 1e-15);
        }

        let g = build_gram_matrix(&params(0.5, 2.0, 2)).unwrap().matrix;
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.5]);
        assert!((&g - &expected).abs().max() < 1e-15);
    }

    #[test]
    fn threshold_branch_is_limit_of_general_form() {
        // evaluate the general closed form at kappa = 1/mu by hand
        for &mu in &[0.25, 0.5, 0.8] {
            let kappa = 1.0 / mu;
            let n = 7;
            let at = build_gram_matrix(&params(mu, kappa, n)).unwrap().matrix;
            for j in 0..n {
                for h in 0..n {
                    let m = j.min(h) + 1;
                    let kjh = kappa + mu * (kappa - 1.0).powi(2) * (m as f64 - 1.0);
                    let delta = if j == h { 1.0 } else { 0.0 };
                    let general = delta + (kjh - 1.0);
                    assert!((at[(j, h)] - general).abs() < 1e-12 * general.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn gram_equals_a_at() {
        for &(mu, kappa) in &[(0.5, 0.5), (0.9, 0.95), (0.2, 3.0), (0.9, 1.5), (0.5, 2.0)] {
            let p = params(mu, kappa, 40);
            let g = build_gram_matrix(&p).unwrap().matrix;
            let aat = build_coupling_matrices(&p).unwrap().gram();
            assert!((&g - &aat).norm() / aat.norm() < 1e-12, "{mu},{kappa}");
        }
    }

    #[test]
    fn trace_converges_to_asymptotic_diagonal() {
        let target = asymptotic_diagonal(0.5, 0.5);
        assert!((target - 2.0 / 3.0).abs() < 1e-15);
        let mut last = f64::INFINITY;
        for &n in &[8, 16, 32, 64, 128] {
            let t = build_gram_matrix(&params(0.5, 0.5, n)).unwrap().trace_per_use();
            let gap = (t - target).abs();
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 2e-3);
    }

    #[test]
    fn log_space_power_agrees() {
        let r = 1.35f64.sqrt();
        for k in [51usize, 80, 200] {
            let direct = r.powi(k as i32);
            assert!((memory_power(r, k) / direct - 1.0).abs() < 1e-13);
        }
    }
}
