//! Capacities of the memory channel in bits per use.
//!
//! Every quantity is an average of a single-mode formula over the unraveled
//! transmissivities: exactly over the symbol `η(z)` for `n → ∞`, or over
//! block-wise extremes of finite spectra for rigorous bounds.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::quadrature::{refine, QuadratureSpec, SymbolGrid};
use crate::spectra::{AsymptoticSymbol, SpectrumCache};

/// Single-mode quantum capacity `max{0, log₂ η - log₂|η - 1|}`.
///
/// `q(1) = +∞`; `q(+∞) = 0`.
pub fn q_of_eta(eta: f64) -> Result<f64> {
    if eta.is_nan() || eta < 0.0 {
        return Err(Error::InvalidParams(format!("eta = {eta} must be >= 0")));
    }
    Ok(q(eta))
}

pub(crate) fn q(eta: f64) -> f64 {
    if eta <= 0.5 {
        0.0
    } else if eta < 1.0 {
        (eta.ln() - (-eta).ln_1p()) / LN_2
    } else if eta == 1.0 {
        f64::INFINITY
    } else if eta.is_infinite() {
        0.0
    } else {
        -(-1.0 / eta).ln_1p() / LN_2
    }
}

/// Entropy of a thermal state with mean photon number `x`,
/// `(x + 1) log₂(x + 1) - x log₂ x`.
pub fn g_of_x(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidParams(format!("x = {x} must be >= 0")));
    }
    Ok(g(x))
}

pub(crate) fn g(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        f64::INFINITY
    } else {
        (x.ln_1p() + x * (1.0 / x).ln_1p()) / LN_2
    }
}

/// Mean photon number per mode, averaged over the `n` uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyConstraint {
    mean_photon: f64,
}

impl EnergyConstraint {
    pub fn new(mean_photon: f64) -> Result<Self> {
        if !(mean_photon > 0.0 && mean_photon.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "mean photon number {mean_photon} must be positive and finite"
            )));
        }
        Ok(EnergyConstraint { mean_photon })
    }

    pub fn mean_photon(&self) -> f64 {
        self.mean_photon
    }
}

/// Quantum capacity in the limit of unbounded input energy,
/// `(1/2π) ∫ q(η(z)) dz`.
///
/// Above threshold the diverging eigenvalue carries no weight in the
/// average; its `q` tends to zero anyway.
pub fn quantum_capacity(mu: f64, kappa: f64, quad: &QuadratureSpec) -> Result<f64> {
    if mu == 1.0 || kappa == 1.0 {
        return Err(Error::Divergent(format!(
            "quantum capacity is infinite at mu = {mu}, kappa = {kappa}"
        )));
    }
    let kinks: &[f64] = if kappa < 1.0 { &[0.5] } else { &[] };
    let r = crate::quadrature::szego_average(q, mu, kappa, kinks, quad)?;
    if !r.converged {
        return Err(Error::Quadrature {
            value: r.value,
            error: r.error_estimate,
        });
    }
    Ok(r.value)
}

/// Block-wise extremes of finite spectra.
///
/// The ascending spectrum at each `n` is cut into `blocks` runs of `n/blocks`
/// eigenvalues. `eta_lower[p]` is the smallest value seen in run `p` over all
/// `n` of the schedule, `eta_upper[p]` the largest.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockBounds {
    pub blocks: usize,
    pub eta_lower: Vec<f64>,
    pub eta_upper: Vec<f64>,
    pub n_used: Vec<usize>,
    /// The last `n` of the schedule moved no bound by `1e-6` or more.
    pub converged: bool,
}

pub const BLOCK_CONVERGENCE_TOL: f64 = 1e-6;

pub fn block_bounds(mu: f64, kappa: f64, blocks: usize, n_schedule: &[usize]) -> Result<BlockBounds> {
    block_bounds_cached(&SpectrumCache::new(mu, kappa)?, blocks, n_schedule)
}

/// [`block_bounds`] drawing spectra from a shared cache.
pub fn block_bounds_cached(cache: &SpectrumCache, blocks: usize, n_schedule: &[usize]) -> Result<BlockBounds> {
    if blocks == 0 {
        return Err(Error::InvalidParams("block count must be positive".into()));
    }
    if n_schedule.is_empty() {
        return Err(Error::InvalidParams("n schedule is empty".into()));
    }
    if let Some(&n) = n_schedule.iter().find(|&&n| n % blocks != 0) {
        return Err(Error::InvalidParams(format!(
            "block count {blocks} does not divide n = {n}"
        )));
    }

    let mut lower = vec![f64::INFINITY; blocks];
    let mut upper = vec![f64::NEG_INFINITY; blocks];
    let mut shift = 0.0f64;
    for (i, &n) in n_schedule.iter().enumerate() {
        let spectrum = cache.spectrum(n)?;
        let len = n / blocks;
        let last = i + 1 == n_schedule.len();
        for p in 0..blocks {
            let run = &spectrum[p * len..(p + 1) * len];
            let (lo, hi) = (run[0].max(0.0), run[len - 1].max(0.0));
            if last && i > 0 {
                shift = shift.max(lower[p] - lower[p].min(lo)).max(upper[p].max(hi) - upper[p]);
            }
            lower[p] = lower[p].min(lo);
            upper[p] = upper[p].max(hi);
        }
    }
    Ok(BlockBounds {
        blocks,
        eta_lower: lower,
        eta_upper: upper,
        n_used: n_schedule.to_vec(),
        converged: n_schedule.len() >= 2 && shift < BLOCK_CONVERGENCE_TOL,
    })
}

/// A lower and an upper bound on a capacity, in bits per use.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CapacityBounds {
    pub lower: f64,
    pub upper: f64,
    pub converged: bool,
}

pub fn quantum_capacity_bounds(mu: f64, kappa: f64, blocks: usize, n_schedule: &[usize]) -> Result<CapacityBounds> {
    Ok(quantum_bounds_from_blocks(&block_bounds(mu, kappa, blocks, n_schedule)?, kappa))
}

/// `(1/P) Σ q(η_p)` over both block extremes. `q` grows with `η` for the
/// attenuator and shrinks for the amplifier, so the roles swap at `κ = 1`.
pub fn quantum_bounds_from_blocks(b: &BlockBounds, kappa: f64) -> CapacityBounds {
    let mean_q = |etas: &[f64]| etas.iter().map(|&e| q(e)).sum::<f64>() / etas.len() as f64;
    let (from_lower, from_upper) = (mean_q(&b.eta_lower), mean_q(&b.eta_upper));
    let (lower, upper) = if kappa <= 1.0 {
        (from_lower, from_upper)
    } else {
        (from_upper, from_lower)
    };
    CapacityBounds {
        lower,
        upper,
        converged: b.converged,
    }
}

/// Optimal photon allocation over the unraveled modes.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterFillingSolution {
    /// Lagrange multiplier `L` (`+∞` when no mode transmits).
    pub multiplier: f64,
    /// Sample points `z` of the quadrature grid.
    pub z: Vec<f64>,
    /// Photon number `N(z)` at the sample points.
    pub n_of_z: Vec<f64>,
    pub achieved_mean: f64,
    /// Bits per channel use.
    pub capacity_value: f64,
}

const BRACKET_LO: f64 = 1e-12;
const BRACKET_HI_MAX: f64 = 1e12;
const MULTIPLIER_RTOL: f64 = 1e-12;

/// Root of a non-increasing `constraint(L) = target` by geometric bisection.
///
/// Without a hint the bracket starts at `[1e-12, 1]` and the upper end
/// doubles until the constraint drops below the target.
fn solve_multiplier(constraint: impl Fn(f64) -> f64, target: f64, hint: Option<f64>) -> Result<f64> {
    let (mut lo, mut hi) = match hint {
        Some(h) if h.is_finite() && h > 0.0 => (h * (1.0 - 1e-4), h * (1.0 + 1e-4)),
        _ => (BRACKET_LO, 1.0),
    };
    while constraint(lo) < target {
        if lo <= BRACKET_LO {
            return Err(Error::Bracket { lo, hi });
        }
        lo = (lo * 0.25).max(BRACKET_LO);
    }
    while constraint(hi) > target {
        if hi >= BRACKET_HI_MAX {
            return Err(Error::Bracket { lo, hi });
        }
        hi *= 2.0;
    }
    while hi / lo - 1.0 > MULTIPLIER_RTOL {
        let mid = (lo * hi).sqrt();
        if constraint(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// `N = 1/(η (2^{L/η} - 1))`, the attenuator allocation.
fn attenuator_photons(eta: f64, l: f64) -> f64 {
    if eta <= 0.0 {
        0.0
    } else {
        1.0 / (eta * (l * LN_2 / eta).exp_m1())
    }
}

fn weighted_sum(eta: &[f64], w: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    eta.iter().zip(w).map(|(&e, &w)| w * f(e)).sum()
}

/// Water-filling on a discrete set of attenuator modes with weights summing
/// to one. Returns the multiplier and the allocation.
fn waterfill_discrete_attenuator(eta: &[f64], w: &[f64], mean: f64, hint: Option<f64>) -> Result<(f64, Vec<f64>)> {
    if eta.iter().all(|&e| e <= 0.0) {
        return Ok((f64::INFINITY, vec![0.0; eta.len()]));
    }
    let l = solve_multiplier(|l| weighted_sum(eta, w, |e| attenuator_photons(e, l)), mean, hint)?;
    Ok((l, eta.iter().map(|&e| attenuator_photons(e, l)).collect()))
}

fn check_attenuator(mu: f64, kappa: f64) -> Result<()> {
    crate::model::check_mu_kappa(mu, kappa)?;
    if kappa > 1.0 {
        return Err(Error::InvalidParams(format!(
            "attenuator water-filling needs kappa <= 1, got {kappa}"
        )));
    }
    Ok(())
}

fn unconverged<T>(r: &crate::quadrature::Refined<T>) -> Error {
    Error::Quadrature {
        value: r.value,
        error: r.error,
    }
}

/// Classical capacity of the attenuating memory channel with coherent-state
/// encoding and optimal photon allocation,
/// `(1/2π) ∫ g(η(z) N(z)) dz` subject to `(1/2π) ∫ N(z) dz = N`.
pub fn waterfill_attenuator(
    mu: f64,
    kappa: f64,
    constraint: EnergyConstraint,
    quad: &QuadratureSpec,
) -> Result<WaterFillingSolution> {
    check_attenuator(mu, kappa)?;
    let mean = constraint.mean_photon();
    let symbol = AsymptoticSymbol::new(mu, kappa)?;

    if let Some(eta) = symbol.flat_value() {
        let multiplier = if eta > 0.0 {
            eta * (1.0 / (eta * mean)).ln_1p() / LN_2
        } else {
            f64::INFINITY
        };
        return Ok(WaterFillingSolution {
            multiplier,
            z: vec![0.0],
            n_of_z: vec![mean],
            achieved_mean: mean,
            capacity_value: g(eta * mean),
        });
    }

    let mut hint = None;
    let out = refine(quad, |nodes| {
        let grid = SymbolGrid::new(&symbol, &[], nodes);
        let (l, photons) = waterfill_discrete_attenuator(grid.eta(), grid.weights(), mean, hint)?;
        hint = Some(l);
        let c = grid
            .eta()
            .iter()
            .zip(&photons)
            .zip(grid.weights())
            .map(|((&e, &n), &w)| w * g(e * n))
            .sum();
        Ok((c, (l, grid, photons)))
    })?;
    if !out.converged {
        return Err(unconverged(&out));
    }
    let (multiplier, grid, n_of_z) = out.extra;
    Ok(WaterFillingSolution {
        multiplier,
        achieved_mean: weighted_sum(&n_of_z, grid.weights(), |n| n),
        z: grid.z().collect(),
        n_of_z,
        capacity_value: out.value,
    })
}

/// Attenuator classical-capacity bounds from block extremes: water-filling
/// over `{η_lower}` and over `{η_upper}` with `(1/P) Σ N_p = N`.
pub fn classical_capacity_bounds_attenuator(
    mu: f64,
    kappa: f64,
    blocks: usize,
    n_schedule: &[usize],
    constraint: EnergyConstraint,
) -> Result<CapacityBounds> {
    check_attenuator(mu, kappa)?;
    classical_bounds_from_blocks(&block_bounds(mu, kappa, blocks, n_schedule)?, constraint)
}

pub fn classical_bounds_from_blocks(b: &BlockBounds, constraint: EnergyConstraint) -> Result<CapacityBounds> {
    let mean = constraint.mean_photon();
    let w = vec![1.0 / b.blocks as f64; b.blocks];
    let capacity = |etas: &[f64]| -> Result<f64> {
        if let Some(&e) = etas.first().filter(|&&e| etas.iter().all(|&x| x == e)) {
            return Ok(g(e * mean));
        }
        let (_, photons) = waterfill_discrete_attenuator(etas, &w, mean, None)?;
        Ok(etas.iter().zip(&photons).map(|(&e, &n)| g(e * n)).sum::<f64>() / etas.len() as f64)
    };
    Ok(CapacityBounds {
        lower: capacity(&b.eta_lower)?,
        upper: capacity(&b.eta_upper)?,
        converged: b.converged,
    })
}

/// Which single-mode formula the amplifier bound averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GaussianBoundVariant {
    /// `g(η(N+1) + 1) - g(η - 1)`.
    #[default]
    AsPrinted,
    /// `g(η(N+1) - 1) - g(η - 1)`, the usual Gaussian-encoding rate of a
    /// single-mode amplifier.
    Standard,
}

/// `η (1 - 2^{-L/η})`, with its `η → ∞` limit `L ln 2`.
fn amplifier_h(eta: f64, l: f64) -> f64 {
    if eta.is_infinite() {
        l * LN_2
    } else {
        -eta * (-l * LN_2 / eta).exp_m1()
    }
}

/// `N = 1/(η(1 - 2^{-L/η})) - 1`, clamped at zero.
fn amplifier_photons(eta: f64, l: f64) -> f64 {
    (1.0 / amplifier_h(eta, l) - 1.0).max(0.0)
}

/// Gain above which the allocation is clamped to zero, if any.
fn amplifier_clamp_point(l: f64) -> Option<f64> {
    if l * LN_2 <= 1.0 {
        return None;
    }
    // h increases in η from h(1) < 1 toward L ln 2 > 1
    let (mut lo, mut hi) = (1.0, 2.0);
    while amplifier_h(hi, l) < 1.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if amplifier_h(mid, l) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

fn amplifier_rate(eta: f64, photons: f64, variant: GaussianBoundVariant) -> f64 {
    if eta.is_infinite() {
        return (photons + 1.0).log2();
    }
    let shift = match variant {
        GaussianBoundVariant::AsPrinted => 1.0,
        GaussianBoundVariant::Standard => -1.0,
    };
    g(eta * (photons + 1.0) + shift) - g(eta - 1.0)
}

/// Gaussian-encoding lower bound on the classical capacity of the amplifying
/// memory channel, with the photon allocation chosen by water-filling.
pub fn waterfill_amplifier(
    mu: f64,
    kappa: f64,
    constraint: EnergyConstraint,
    variant: GaussianBoundVariant,
    quad: &QuadratureSpec,
) -> Result<WaterFillingSolution> {
    crate::model::check_mu_kappa(mu, kappa)?;
    if kappa <= 1.0 {
        return Err(Error::InvalidParams(format!(
            "amplifier bound needs kappa > 1, got {kappa}"
        )));
    }
    let mean = constraint.mean_photon();
    let symbol = AsymptoticSymbol::new(mu, kappa)?;

    if let Some(eta) = symbol.flat_value() {
        return Ok(WaterFillingSolution {
            multiplier: -eta * (-1.0 / (eta * (mean + 1.0))).ln_1p() / LN_2,
            z: vec![0.0],
            n_of_z: vec![mean],
            achieved_mean: mean,
            capacity_value: amplifier_rate(eta, mean, variant),
        });
    }

    let mut hint = None;
    let out = refine(quad, |nodes| {
        let solve = |grid: &SymbolGrid, hint| {
            solve_multiplier(
                |l| weighted_sum(grid.eta(), grid.weights(), |e| amplifier_photons(e, l)),
                mean,
                hint,
            )
        };
        let mut grid = SymbolGrid::new(&symbol, &[], nodes);
        let mut l = solve(&grid, hint)?;
        let mut kink: Option<f64> = None;
        // the clamp point moves with L; re-cut the panels until it settles
        for _ in 0..4 {
            let next = amplifier_clamp_point(l);
            let settled = match (kink, next) {
                (Some(a), Some(b)) => (a - b).abs() <= 1e-12 * b,
                (None, None) => true,
                _ => false,
            };
            if settled {
                break;
            }
            kink = next;
            grid = SymbolGrid::new(&symbol, kink.as_slice(), nodes);
            l = solve(&grid, Some(l))?;
        }
        hint = Some(l);
        let photons: Vec<f64> = grid.eta().iter().map(|&e| amplifier_photons(e, l)).collect();
        let c = grid
            .eta()
            .iter()
            .zip(&photons)
            .zip(grid.weights())
            .map(|((&e, &n), &w)| w * amplifier_rate(e, n, variant))
            .sum();
        Ok((c, (l, grid, photons)))
    })?;
    if !out.converged {
        return Err(unconverged(&out));
    }
    let (multiplier, grid, n_of_z) = out.extra;
    Ok(WaterFillingSolution {
        multiplier,
        achieved_mean: weighted_sum(&n_of_z, grid.weights(), |n| n),
        z: grid.z().collect(),
        n_of_z,
        capacity_value: out.value,
    })
}

pub fn classical_capacity_lower_amplifier(
    mu: f64,
    kappa: f64,
    constraint: EnergyConstraint,
    variant: GaussianBoundVariant,
    quad: &QuadratureSpec,
) -> Result<f64> {
    Ok(waterfill_amplifier(mu, kappa, constraint, variant, quad)?.capacity_value)
}
