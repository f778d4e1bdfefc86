//! Fourier transforms of rapidly decaying activations by quadrature, the
//! decay-ratio test, and lower bounds for trigonometric sums.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{derivative_tapes, uniform_grid, Compiled, EvalError, ScalarExpr};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FourierError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("|f| = {value:e} at the window edge {edge}; widen the window")]
    InsufficientDecay { edge: f64, value: f64 },
    #[error("denominator vanishes on {skipped} of {total} ladder points")]
    Inconclusive { skipped: usize, total: usize },
    #[error("need 0 < w_small < w_large, got {small} and {large}")]
    BadWeights { small: f64, large: f64 },
    #[error("frequencies must be distinct and positive")]
    BadFrequencies,
}

/// Quadrature layout for `f̂(ξ) = ∫ f(z) e^{−iξz} dz` on `[−X, X]`.
#[derive(Debug, Clone, Serialize)]
pub struct FtConfig {
    /// Expected exponential decay rate; the window is `X = 40/λ` unless set.
    pub decay_rate: f64,
    pub half_width: Option<f64>,
    pub panel_width: f64,
    pub panel_nodes: usize,
    /// Largest `|f(±X)|` accepted.
    pub edge_tol: f64,
}

impl Default for FtConfig {
    fn default() -> Self {
        FtConfig { decay_rate: 1.0, half_width: None, panel_width: 0.5, panel_nodes: 20, edge_tol: 1e-14 }
    }
}

impl FtConfig {
    pub fn window(&self) -> f64 {
        self.half_width.unwrap_or(40.0 / self.decay_rate)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FtResult {
    pub xi: Vec<f64>,
    #[serde(skip)]
    pub values: Vec<Complex64>,
    /// Bound on `|∫_{|z|>X} f|` from an exponential tail model at the edges.
    pub tail_bound: f64,
}

/// Samples of `f` on a composite Gauss–Legendre rule, reusable across `ξ`.
#[derive(Debug, Clone)]
pub struct SampledTransform {
    nodes: Vec<f64>,
    weighted: Vec<f64>,
    pub half_width: f64,
    pub tail_bound: f64,
}

impl SampledTransform {
    pub fn new(f: &ScalarExpr, cfg: &FtConfig) -> Result<Self, FourierError> {
        Self::from_compiled(&f.compile(), cfg)
    }

    pub fn from_compiled(f: &Compiled, cfg: &FtConfig) -> Result<Self, FourierError> {
        let x = cfg.window();
        let mut tail = 0.0;
        for edge in [-x, x] {
            let v = f.eval(edge)?.abs();
            if v > cfg.edge_tol {
                return Err(FourierError::InsufficientDecay { edge, value: v });
            }
            // local log-slope gives the exponential tail model ∫ v e^{−μ t} dt = v/μ
            let inner = f.eval(edge - edge.signum() * 0.5)?.abs();
            let mu = if v > 0.0 && inner > v { 2.0 * (inner / v).ln() } else { f64::INFINITY };
            tail += if v == 0.0 { 0.0 } else if mu.is_finite() { v / mu } else { v };
        }
        let panels = ((2.0 * x / cfg.panel_width).ceil() as usize).max(1);
        let q = GaussLegendre::composite(panels, cfg.panel_nodes, -x, x);
        let mut weighted = Vec::with_capacity(q.nodes.len());
        for (&z, &w) in q.nodes.iter().zip(&q.weights) {
            weighted.push(w * f.eval(z)?);
        }
        Ok(SampledTransform { nodes: q.nodes, weighted, half_width: x, tail_bound: tail })
    }

    pub fn at(&self, xi: f64) -> Complex64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (&z, &fw) in self.nodes.iter().zip(&self.weighted) {
            let (s, c) = (xi * z).sin_cos();
            re += fw * c;
            im -= fw * s;
        }
        Complex64::new(re, im)
    }
}

/// `f̂` at each `ξ`, with the tail estimate of the truncated window.
pub fn fourier_transform(f: &ScalarExpr, xi: &[f64], cfg: &FtConfig) -> Result<FtResult, FourierError> {
    let t = SampledTransform::new(f, cfg)?;
    Ok(FtResult { xi: xi.to_vec(), values: xi.iter().map(|&k| t.at(k)).collect(), tail_bound: t.tail_bound })
}

/// `∫ e^{−z²} e^{−iξz} dz = √π e^{−ξ²/4}`.
pub fn gaussian_transform(xi: f64) -> f64 {
    std::f64::consts::PI.sqrt() * (-0.25 * xi * xi).exp()
}

/// `∫ sech(z) e^{−iξz} dz = π sech(πξ/2)`.
pub fn sech_transform(xi: f64) -> f64 {
    std::f64::consts::PI / (0.5 * std::f64::consts::PI * xi).cosh()
}

/// Ratios `|f̂(wξ)/f̂(w̃ξ)|` along a ladder and the decay verdict.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub xi: Vec<f64>,
    /// `None` where the denominator was skipped as numerically zero.
    pub ratios: Vec<Option<f64>>,
    pub monotone: bool,
    pub final_ratio: f64,
    pub passed: bool,
}

/// Threshold the ratio must fall below for the decay test to pass.
pub const DECAY_THRESHOLD: f64 = 1e-6;

/// `f̂(wξ) = o(f̂(w̃ξ))` checked as: the ratio decreases along the ladder
/// and ends below [`DECAY_THRESHOLD`].
pub fn ft_decay_test(f: &ScalarExpr, w_small: f64, w_large: f64, ladder: &[f64], cfg: &FtConfig) -> Result<DecayReport, FourierError> {
    if !(0.0 < w_small && w_small < w_large) {
        return Err(FourierError::BadWeights { small: w_small, large: w_large });
    }
    let t = SampledTransform::new(f, cfg)?;
    let den: Vec<f64> = ladder.iter().map(|&k| t.at(w_small * k).norm()).collect();
    let num: Vec<f64> = ladder.iter().map(|&k| t.at(w_large * k).norm()).collect();
    let scale = den.iter().chain(&num).cloned().fold(0.0, f64::max);
    // quadrature roundoff floor: anything below it is indistinguishable from 0
    let floor = 1e-14 * scale.max(t.tail_bound);
    let ratios: Vec<Option<f64>> = den.iter().zip(&num).map(|(&d, &n)| (d > floor).then(|| n / d)).collect();
    let skipped = ratios.iter().filter(|r| r.is_none()).count();
    if skipped * 5 > ladder.len() {
        return Err(FourierError::Inconclusive { skipped, total: ladder.len() });
    }
    let kept: Vec<f64> = ratios.iter().flatten().cloned().collect();
    let monotone = kept.windows(2).all(|p| p[1] <= p[0]);
    let final_ratio = kept.last().cloned().unwrap_or(f64::NAN);
    Ok(DecayReport { xi: ladder.to_vec(), ratios, monotone, final_ratio, passed: monotone && final_ratio < DECAY_THRESHOLD })
}

/// Window maxima of `|Σ a_k e^{i b_k z}|`.
#[derive(Debug, Clone, Serialize)]
pub struct TrigScan {
    pub window_starts: Vec<f64>,
    pub window_maxima: Vec<f64>,
    /// Smallest window maximum: a lower estimate of the lim sup.
    pub lower_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrigScanConfig {
    pub start: f64,
    pub windows: usize,
    pub window_len: f64,
    pub step: f64,
}

impl Default for TrigScanConfig {
    fn default() -> Self {
        TrigScanConfig { start: 1000.0, windows: 8, window_len: 200.0, step: 0.05 }
    }
}

pub fn trig_sum_abs(a: &[f64], b: &[f64], z: f64) -> f64 {
    let s: Complex64 = a.iter().zip(b).map(|(&ak, &bk)| Complex64::from_polar(ak, bk * z)).sum();
    s.norm()
}

/// Scan late windows for the peaks of `|Σ a_k e^{i b_k z}|`, refining each
/// window's best grid point by golden-section search.
pub fn trig_sum_lower(a: &[f64], b: &[f64], cfg: &TrigScanConfig) -> Result<TrigScan, FourierError> {
    if a.len() != b.len() || b.iter().any(|&v| !(v > 0.0)) {
        return Err(FourierError::BadFrequencies);
    }
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            if b[i] == b[j] {
                return Err(FourierError::BadFrequencies);
            }
        }
    }
    let f = |z: f64| trig_sum_abs(a, b, z);
    let mut starts = Vec::with_capacity(cfg.windows);
    let mut maxima = Vec::with_capacity(cfg.windows);
    let n = (cfg.window_len / cfg.step).ceil() as usize;
    for w in 0..cfg.windows {
        let z0 = cfg.start + w as f64 * cfg.window_len;
        let (mut best_z, mut best) = (z0, f(z0));
        for i in 1..=n {
            let z = z0 + i as f64 * cfg.step;
            let v = f(z);
            if v > best {
                best = v;
                best_z = z;
            }
        }
        let (mut lo, mut hi) = (best_z - cfg.step, best_z + cfg.step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let m1 = hi - g * (hi - lo);
            let m2 = lo + g * (hi - lo);
            if f(m1) < f(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        starts.push(z0);
        maxima.push(best.max(f(0.5 * (lo + hi))));
    }
    let lower_bound = maxima.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(TrigScan { window_starts: starts, window_maxima: maxima, lower_bound })
}

/// Per-order outcome of [`even_schwartz_check`].
#[derive(Debug, Clone, Serialize)]
pub struct OrderFlags {
    pub order: usize,
    pub even: bool,
    pub rapid_decay: bool,
    pub nonvanishing: bool,
    pub max_odd_part: f64,
    /// Slope of `−log|f|` against `|x|` fitted on the outer half of the grid.
    pub fitted_rate: f64,
    pub min_abs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchwartzFlags {
    pub even: bool,
    pub rapid_decay: bool,
    pub nonvanishing: bool,
    pub orders: Vec<OrderFlags>,
}

/// Evenness, exponential decay at rate about `λ`, and absence of zeros
/// (no zero sample, no sign change between neighbours) for
/// `f, f′, …, f^{(S)}` on the symmetric grid `[−h, h]`.
///
/// Decay passes when the fitted rate is at least `0.9λ`, which admits
/// polynomial prefactors such as `x e^{−|x|}`.
pub fn even_schwartz_check(f: &ScalarExpr, order: usize, half_width: f64, points: usize, rate: f64) -> Result<SchwartzFlags, FourierError> {
    let grid = uniform_grid(0.0, half_width, points);
    let tapes = derivative_tapes(f, order);
    let mut orders = Vec::with_capacity(order + 1);
    for (s, t) in tapes.iter().enumerate() {
        let mut max_odd = 0.0f64;
        let mut scale = 0.0f64;
        let mut min_abs = f64::INFINITY;
        let mut tail = Vec::new();
        let mut sign_change = false;
        let mut prev: Option<(f64, f64)> = None;
        for &x in &grid {
            let (p, m) = (t.eval(x)?, t.eval(-x)?);
            if let Some((pp, pm)) = prev {
                sign_change |= pp * p < 0.0 || pm * m < 0.0;
            }
            prev = Some((p, m));
            max_odd = max_odd.max((p - m).abs());
            scale = scale.max(p.abs()).max(m.abs());
            min_abs = min_abs.min(p.abs()).min(m.abs());
            if x >= 0.5 * half_width {
                let v = 0.5 * (p.abs() + m.abs());
                if v > 0.0 {
                    tail.push((x, v.ln()));
                }
            }
        }
        let fitted_rate = -least_squares_slope(&tail);
        orders.push(OrderFlags {
            order: s,
            even: max_odd < 1e-10 * scale.max(1.0),
            rapid_decay: fitted_rate >= 0.9 * rate,
            nonvanishing: min_abs > 0.0 && !sign_change,
            max_odd_part: max_odd,
            fitted_rate,
            min_abs,
        });
    }
    Ok(SchwartzFlags {
        even: orders.iter().all(|o| o.even),
        rapid_decay: orders.iter().all(|o| o.rapid_decay),
        nonvanishing: orders.iter().all(|o| o.nonvanishing),
        orders,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        // underflowed tail: faster than any exponential on this grid
        return f64::NEG_INFINITY;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// `(∫|f|², (1/2π)∫|f̂|²)`, the second integral taken over `[−Ξ, Ξ]`.
pub fn plancherel(f: &ScalarExpr, xi_max: f64, cfg: &FtConfig) -> Result<(f64, f64), FourierError> {
    let t = SampledTransform::new(f, cfg)?;
    let c = f.compile();
    let x = cfg.window();
    let panels = ((2.0 * x / cfg.panel_width).ceil() as usize).max(1);
    let q = GaussLegendre::composite(panels, cfg.panel_nodes, -x, x);
    let mut lhs = 0.0;
    for (&z, &w) in q.nodes.iter().zip(&q.weights) {
        let v = c.eval(z)?;
        lhs += w * v * v;
    }
    let panels = ((2.0 * xi_max / cfg.panel_width).ceil() as usize).max(1);
    let qx = GaussLegendre::composite(panels, cfg.panel_nodes, -xi_max, xi_max);
    let rhs = qx.integrate(|k| t.at(k).norm_sqr()) / (2.0 * std::f64::consts::PI);
    Ok((lhs, rhs))
}

/// `ξ = 0.25, 0.5, …, 5`.
pub fn default_ladder() -> Vec<f64> {
    (1..=20).map(|k| 0.25 * k as f64).collect()
}
