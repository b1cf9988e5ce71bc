//! Averages over the asymptotic symbol, `(1/2π) ∫ F(η(z)) dz`.
//!
//! Integration runs in the half angle `θ = z/2 ∈ [0, π]` with weight `dθ/π`.
//! The interval is cut at the preimages of caller-declared kinks of `F` (in
//! η-space) and, close to threshold, at a geometric ladder toward `θ = 0`
//! where the symbol develops a narrow peak. Each segment gets uniform
//! 8-point Gauss-Legendre panels; the node budget doubles until two
//! successive levels agree to `tol`.

use crate::error::Result;
use crate::spectra::AsymptoticSymbol;
use std::f64::consts::PI;

const PANEL_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Node budget of the reference level.
    pub points: usize,
    /// Absolute agreement required between successive levels.
    pub tol: f64,
    /// Number of doublings allowed past the reference level.
    pub max_levels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            points: 4096,
            tol: 1e-9,
            max_levels: 8,
        }
    }
}

impl QuadratureSpec {
    pub fn with_points(points: usize) -> Self {
        QuadratureSpec {
            points,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
    pub nodes: usize,
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Symbol sampled on a composite Gauss-Legendre grid over `θ ∈ [0, π]`.
#[derive(Debug, Clone)]
pub struct SymbolGrid {
    theta: Vec<f64>,
    weight: Vec<f64>,
    eta: Vec<f64>,
}

impl SymbolGrid {
    pub fn new(symbol: &AsymptoticSymbol, kinks: &[f64], nodes: usize) -> Self {
        let breaks = breakpoints(symbol, kinks);
        let (gx, gw) = gauss_legendre(PANEL_ORDER);
        let panels_total = (nodes / PANEL_ORDER).max(1) as f64;
        let mut theta = Vec::with_capacity(nodes + 8 * breaks.len());
        let mut weight = Vec::with_capacity(theta.capacity());
        for seg in breaks.windows(2) {
            let (lo, hi) = (seg[0], seg[1]);
            let panels = ((hi - lo) / PI * panels_total).ceil().max(1.0) as usize;
            let h = (hi - lo) / panels as f64;
            for p in 0..panels {
                let a = lo + p as f64 * h;
                for (x, w) in gx.iter().zip(&gw) {
                    theta.push(a + 0.5 * h * (x + 1.0));
                    weight.push(0.5 * h * w / PI);
                }
            }
        }
        let eta = theta.iter().map(|&t| symbol.at_half_angle(t)).collect();
        SymbolGrid { theta, weight, eta }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// Sample positions in the `z ∈ [0, 2π]` convention.
    pub fn z(&self) -> impl Iterator<Item = f64> + '_ {
        self.theta.iter().map(|t| 2.0 * t)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    /// `Σ w_i F(η_i)`, an approximation of `(1/2π) ∫ F(η(z)) dz`.
    pub fn mean<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.eta
            .iter()
            .zip(&self.weight)
            .map(|(&e, &w)| w * f(e))
            .sum()
    }
}

fn breakpoints(symbol: &AsymptoticSymbol, kinks: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0, PI];
    for &k in kinks {
        if let Some(t) = symbol.half_angle_preimage(k) {
            b.push(t);
        }
    }
    let width = symbol.peak_width();
    if width > 0.0 && width < 0.05 {
        let mut t = 0.25 * width;
        while t < PI / 8.0 {
            b.push(t);
            t *= 2.0;
        }
    }
    b.retain(|t| (0.0..=PI).contains(t));
    b.sort_by(f64::total_cmp);
    b.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    b
}

/// Outcome of a dyadic refinement run.
#[derive(Debug, Clone)]
pub(crate) struct Refined<T> {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    pub extra: T,
}

/// Evaluate at half the reference budget, then at the reference budget, then
/// keep doubling until successive values agree to `spec.tol`.
pub(crate) fn refine<T>(
    spec: &QuadratureSpec,
    mut eval: impl FnMut(usize) -> Result<(f64, T)>,
) -> Result<Refined<T>> {
    let mut nodes = (spec.points / 2).max(2 * PANEL_ORDER);
    let (mut prev, _) = eval(nodes)?;
    for level in 0..=spec.max_levels {
        nodes *= 2;
        let (value, extra) = eval(nodes)?;
        let error = (value - prev).abs();
        let converged = error <= spec.tol || (value.is_infinite() && value == prev);
        if converged || level == spec.max_levels {
            return Ok(Refined {
                value,
                error,
                converged,
                extra,
            });
        }
        prev = value;
    }
    unreachable!()
}

/// `(1/2π) ∫₀^{2π} F(η(z)) dz`, with panels split at the preimages of the
/// declared `kinks` (values of η where `F` is not smooth).
///
/// A result that missed the tolerance comes back with `converged = false`.
pub fn szego_average<F: Fn(f64) -> f64>(
    f: F,
    mu: f64,
    kappa: f64,
    kinks: &[f64],
    quad: &QuadratureSpec,
) -> Result<QuadResult> {
    let symbol = AsymptoticSymbol::new(mu, kappa)?;
    if let Some(v) = symbol.flat_value() {
        return Ok(QuadResult {
            value: f(v),
            error_estimate: 0.0,
            converged: true,
            nodes: 1,
        });
    }
    let out = refine(quad, |nodes| {
        let grid = SymbolGrid::new(&symbol, kinks, nodes);
        Ok((grid.mean(&f), grid.len()))
    })?;
    Ok(QuadResult {
        value: out.value,
        error_estimate: out.error,
        converged: out.converged,
        nodes: out.extra,
    })
}
