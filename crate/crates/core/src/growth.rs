//! Curves, arclength, sampled growth classification, and the neuron order
//! predicted for activations with ordered growth.

use std::cmp::Ordering;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{differentiate, Compiled, EvalError, ScalarExpr, SignedLogValue};
use crate::quadrature::{integrate_adaptive, QuadError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GrowthError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("t = {t} lies outside the curve domain [{t0}, {t_max}]")]
    OutsideDomain { t: f64, t0: f64, t_max: f64 },
    #[error("non-finite velocity at t = {t}")]
    NonFiniteVelocity { t: f64 },
    #[error("gaps must be strictly positive")]
    BadGap,
    #[error("need at least two functions")]
    TooFew,
    #[error("functions {i} and {j} do not separate along the ladder")]
    Tie { i: usize, j: usize },
    #[error("function {index} vanishes on the ladder tail")]
    ZeroAlongCurve { index: usize },
    #[error("no point reaches arclength gap {gap} from t = {t}")]
    GapUnreachable { t: f64, gap: f64 },
}

type PointFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A curve `γ: [t0, t_max] → ℂ`, truncating `[t0, ∞)`.
#[derive(Clone)]
pub struct Curve {
    pub t0: f64,
    pub t_max: f64,
    point: PointFn,
    velocity: Option<PointFn>,
    /// The curve stays on the real axis; functions use real log-domain evaluation.
    pub real: bool,
    /// `l_γ(∞)` when the curve has finite length.
    pub total_length: Option<f64>,
    unit_speed: bool,
}

impl std::fmt::Debug for Curve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Curve")
            .field("t0", &self.t0)
            .field("t_max", &self.t_max)
            .field("real", &self.real)
            .field("total_length", &self.total_length)
            .finish()
    }
}

impl Curve {
    pub fn new<P>(t0: f64, t_max: f64, point: P) -> Self
    where
        P: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Curve { t0, t_max, point: Arc::new(point), velocity: None, real: false, total_length: None, unit_speed: false }
    }

    pub fn with_velocity<V>(mut self, v: V) -> Self
    where
        V: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        self.velocity = Some(Arc::new(v));
        self
    }

    pub fn with_total_length(mut self, l: f64) -> Self {
        self.total_length = Some(l);
        self
    }

    /// `γ(t) = t`.
    pub fn identity(t0: f64, t_max: f64) -> Self {
        let mut c = Curve::new(t0, t_max, |t| Complex64::new(t, 0.0)).with_velocity(|_| Complex64::new(1.0, 0.0));
        c.real = true;
        c.unit_speed = true;
        c
    }

    /// `γ(t) = t + ic`.
    pub fn horizontal(c: f64, t0: f64, t_max: f64) -> Self {
        let mut out = Curve::new(t0, t_max, move |t| Complex64::new(t, c)).with_velocity(|_| Complex64::new(1.0, 0.0));
        out.real = c == 0.0;
        out.unit_speed = true;
        out
    }

    /// `γ(t) = e^{it}`.
    pub fn unit_circle(t_max: f64) -> Self {
        Curve::new(0.0, t_max, |t| Complex64::from_polar(1.0, t)).with_velocity(|t| Complex64::new(-t.sin(), t.cos()))
    }

    pub fn point(&self, t: f64) -> Complex64 {
        (self.point)(t)
    }

    /// `γ′(t)`, by central differences when no derivative map was given.
    pub fn velocity(&self, t: f64) -> Complex64 {
        match &self.velocity {
            Some(v) => v(t),
            None => {
                let h = 1e-6 * t.abs().max(1.0);
                (self.point(t + h) - self.point(t - h)) / (2.0 * h)
            }
        }
    }

    pub fn speed(&self, t: f64) -> f64 {
        self.velocity(t).norm()
    }

    fn check(&self, t: f64) -> Result<(), GrowthError> {
        if t < self.t0 || t > self.t_max {
            return Err(GrowthError::OutsideDomain { t, t0: self.t0, t_max: self.t_max });
        }
        Ok(())
    }

    /// `∫_a^b |γ′|`, unchecked against the domain.
    fn length_between(&self, a: f64, b: f64) -> Result<f64, GrowthError> {
        if self.unit_speed {
            return Ok(b - a);
        }
        let mut bad = None;
        let v = integrate_adaptive(
            |s| {
                let v = self.speed(s);
                if !v.is_finite() && bad.is_none() {
                    bad = Some(s);
                }
                v
            },
            a,
            b,
            1e-10,
        );
        if let Some(t) = bad {
            return Err(GrowthError::NonFiniteVelocity { t });
        }
        Ok(v?)
    }

    /// `l_γ(t) = ∫_{t0}^t |γ′(s)| ds`.
    pub fn arclength(&self, t: f64) -> Result<f64, GrowthError> {
        self.check(t)?;
        self.length_between(self.t0, t)
    }

    /// Length coordinate used for gaps: `l_γ(t)` for infinite curves,
    /// `1/(l_γ(∞) − l_γ(t))` for finite ones.
    pub fn gap_coordinate(&self, length: f64) -> f64 {
        match self.total_length {
            Some(total) => 1.0 / (total - length),
            None => length,
        }
    }
}

/// `f(γ(t))` in log-domain form; for complex curves the real part is used.
pub fn value_along(f: &Compiled, curve: &Curve, t: f64) -> Result<SignedLogValue, EvalError> {
    if curve.real {
        f.eval_log(curve.point(t).re)
    } else {
        Ok(SignedLogValue::from_f64(f.eval_complex(curve.point(t))?.re))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthConfig {
    pub ladder_points: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub eps_ratio: f64,
    /// Trailing ladder points that must show monotone behaviour.
    pub tail: usize,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig { ladder_points: 32, t_min: 1.0, t_max: 100.0, eps_ratio: 1e-3, tail: 8 }
    }
}

impl GrowthConfig {
    pub fn with_t_max(t_max: f64) -> Self {
        GrowthConfig { t_max, ..GrowthConfig::default() }
    }
}

/// Geometric ladder of `n` points on `[lo, hi]`.
pub fn geometric_ladder(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let r = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo * (r * i as f64).exp() }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthClass {
    HyperExponential,
    HyperPolynomialOnly,
    Neither,
    DivergenceNotDetected,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvidenceRow {
    pub t: f64,
    pub length: f64,
    pub log_mag: f64,
    /// `log |Re f(γ(t)) / Re f(γ(t′))|` with `t′` one fixed gap further along.
    pub fixed_gap_log_ratios: Vec<f64>,
    /// Same, with the gap `√(gap coordinate)` growing along the ladder.
    pub growing_gap_log_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthVerdict {
    pub class: GrowthClass,
    pub diverges: bool,
    pub hyper_exponential: bool,
    pub hyper_polynomial: bool,
    pub gaps: Vec<f64>,
    pub evidence: Vec<EvidenceRow>,
}

/// Parameter `t′ ≥ t` whose gap coordinate exceeds that of `t` by `gap`.
fn advance(curve: &Curve, t: f64, length: f64, gap: f64) -> Result<f64, GrowthError> {
    if curve.unit_speed && curve.total_length.is_none() {
        return Ok(t + gap);
    }
    let target = curve.gap_coordinate(length) + gap;
    let coord = |s: f64| -> Result<f64, GrowthError> { Ok(curve.gap_coordinate(length + curve.length_between(t, s)?)) };
    let mut hi = t.max(1.0) * 2.0;
    let mut n = 0;
    while coord(hi)? < target {
        hi *= 2.0;
        n += 1;
        if n > 60 {
            return Err(GrowthError::GapUnreachable { t, gap });
        }
    }
    let mut lo = t;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if coord(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(hi)
}

fn log_ratio(a: SignedLogValue, b: SignedLogValue) -> f64 {
    a.log_mag - b.log_mag
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|p| p[1] < p[0])
}

/// Sampled classification of the growth of `Re f(γ(t))`.
///
/// Hyper-exponential: for every fixed gap the log-ratio decreases over the
/// last `tail` ladder points and ends below `ln ε_ratio`. Hyper-polynomial:
/// the same for a gap growing like the square root of the gap coordinate.
/// Both are empirical at ladder resolution.
pub fn classify_growth(f: &ScalarExpr, curve: &Curve, gaps: &[f64], cfg: &GrowthConfig) -> Result<GrowthVerdict, GrowthError> {
    if gaps.iter().any(|&g| !(g > 0.0)) {
        return Err(GrowthError::BadGap);
    }
    let tape = f.compile();
    let lo = cfg.t_min.max(curve.t0);
    let ladder = geometric_ladder(lo, cfg.t_max.min(curve.t_max), cfg.ladder_points);
    let mut evidence = Vec::with_capacity(ladder.len());
    let mut length = curve.arclength(ladder[0])?;
    let mut prev = ladder[0];
    for &t in &ladder {
        length += curve.length_between(prev, t)?;
        prev = t;
        let v = value_along(&tape, curve, t)?;
        let mut fixed = Vec::with_capacity(gaps.len());
        for &g in gaps {
            let t2 = advance(curve, t, length, g)?;
            fixed.push(log_ratio(v, value_along(&tape, curve, t2)?));
        }
        let grow = (curve.gap_coordinate(length) - curve.gap_coordinate(0.0)).abs().sqrt().max(1.0);
        let t2 = advance(curve, t, length, grow)?;
        let growing = log_ratio(v, value_along(&tape, curve, t2)?);
        evidence.push(EvidenceRow { t, length, log_mag: v.log_mag, fixed_gap_log_ratios: fixed, growing_gap_log_ratio: growing });
    }
    let tail = &evidence[evidence.len().saturating_sub(cfg.tail)..];
    let floor = cfg.eps_ratio.ln();
    let mags: Vec<f64> = tail.iter().map(|r| r.log_mag).collect();
    let diverges = mags.windows(2).all(|p| p[1] > p[0])
        && evidence.last().unwrap().log_mag - evidence[0].log_mag > -floor;
    let vanishes = |series: Vec<f64>| strictly_decreasing(&series) && *series.last().unwrap() < floor;
    let hyper_exponential =
        diverges && (0..gaps.len()).all(|g| vanishes(tail.iter().map(|r| r.fixed_gap_log_ratios[g]).collect()));
    let hyper_polynomial = diverges && vanishes(tail.iter().map(|r| r.growing_gap_log_ratio).collect());
    let class = if !diverges {
        GrowthClass::DivergenceNotDetected
    } else if hyper_exponential {
        GrowthClass::HyperExponential
    } else if hyper_polynomial {
        GrowthClass::HyperPolynomialOnly
    } else {
        GrowthClass::Neither
    };
    Ok(GrowthVerdict { class, diverges, hyper_exponential, hyper_polynomial, gaps: gaps.to_vec(), evidence })
}

/// Log-magnitudes of each function on the ladder: rows are ladder points.
pub fn log_profile(fs: &[ScalarExpr], curve: &Curve, ladder: &[f64]) -> Result<Vec<Vec<f64>>, GrowthError> {
    let tapes: Vec<Compiled> = fs.iter().map(|f| f.compile()).collect();
    ladder
        .iter()
        .map(|&t| tapes.iter().map(|c| Ok(value_along(c, curve, t)?.log_mag)).collect())
        .collect()
}

/// Fastest-first permutation with every consecutive log-gap diverging over
/// the last `tail` ladder points. Zeros earlier on the ladder are ignored.
pub fn order_by_growth(fs: &[ScalarExpr], curve: &Curve, cfg: &GrowthConfig) -> Result<Vec<usize>, GrowthError> {
    if fs.len() < 2 {
        return Err(GrowthError::TooFew);
    }
    let ladder = geometric_ladder(cfg.t_min.max(curve.t0), cfg.t_max.min(curve.t_max), cfg.ladder_points);
    let prof = log_profile(fs, curve, &ladder)?;
    let tail = &prof[prof.len().saturating_sub(cfg.tail)..];
    for i in 0..fs.len() {
        if tail.iter().any(|row| row[i] == f64::NEG_INFINITY) {
            return Err(GrowthError::ZeroAlongCurve { index: i });
        }
    }
    let last = prof.last().unwrap();
    let mut order: Vec<usize> = (0..fs.len()).collect();
    order.sort_by(|&a, &b| last[b].total_cmp(&last[a]).then(a.cmp(&b)));
    let floor = -cfg.eps_ratio.ln();
    for w in order.windows(2) {
        let (a, b) = (w[0], w[1]);
        let d: Vec<f64> = tail.iter().map(|r| r[a] - r[b]).collect();
        let separates = d.windows(2).all(|p| p[1] > p[0]) && *d.last().unwrap() > floor;
        if !separates {
            return Err(GrowthError::Tie { i: a.min(b), j: a.max(b) });
        }
    }
    Ok(order)
}

/// Which proposition's comparison rule to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    /// Hyper-polynomial activation, no bias: rows must be distinct and nonzero.
    I,
    /// Hyper-exponential activation with bias: `(w, b)` distinct, `w ≠ 0`.
    II,
    /// As II, also ordering the derivatives in `b` and each `w_k`.
    III,
}

/// Which side of the activation dominates when leading weights differ in sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    /// `σ(w̃ f_fast) = o(σ(w f_slow))` for `w > 0 > w̃`.
    PositiveDominates,
    NegativeDominates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Part {
    Value,
    BiasDerivative,
    /// `∂H/∂w_k` for inner function `k` (original indexing).
    WeightDerivative { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NeuronTerm {
    pub neuron: usize,
    pub part: Part,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
pub enum NotOrdered {
    #[error("neurons {i} and {j} share their parameters")]
    Duplicate { i: usize, j: usize },
    #[error("neuron {index} has zero weights")]
    ZeroWeights { index: usize },
    #[error("inner order is not a permutation of 0..{m}")]
    BadInnerOrder { m: usize },
    #[error("rows must all have length {m}")]
    Shape { m: usize },
}

/// Sort key: neurons compare lexicographically on (side, signed weights in
/// inner order, signed bias), larger meaning faster growth.
fn neuron_cmp(a: &(i8, Vec<f64>, f64), b: &(i8, Vec<f64>, f64)) -> Ordering {
    a.0.cmp(&b.0)
        .then_with(|| {
            a.1.iter().zip(&b.1).map(|(x, y)| x.total_cmp(y)).find(|o| *o != Ordering::Equal).unwrap_or(Ordering::Equal)
        })
        .then_with(|| a.2.total_cmp(&b.2))
}

/// Total order (fastest first) of `H_j = σ(Σ_k w_jk f_k + b_j)`, and for
/// variant III of their parameter derivatives, given the inner functions'
/// order `inner_order` (fastest first).
pub fn predict_neuron_order(
    inner_order: &[usize],
    rows: &[Vec<f64>],
    biases: Option<&[f64]>,
    variant: Variant,
    orientation: Orientation,
) -> Result<Vec<NeuronTerm>, NotOrdered> {
    let m = inner_order.len();
    let mut seen = vec![false; m];
    for &k in inner_order {
        if k >= m || seen[k] {
            return Err(NotOrdered::BadInnerOrder { m });
        }
        seen[k] = true;
    }
    if rows.iter().any(|r| r.len() != m) || biases.is_some_and(|b| b.len() != rows.len()) {
        return Err(NotOrdered::Shape { m });
    }
    let bias = |j: usize| if variant == Variant::I { 0.0 } else { biases.map_or(0.0, |b| b[j]) };
    let mut keys = Vec::with_capacity(rows.len());
    for (j, row) in rows.iter().enumerate() {
        let lead = inner_order.iter().map(|&k| row[k]).find(|v| *v != 0.0).ok_or(NotOrdered::ZeroWeights { index: j })?;
        let s = if lead > 0.0 { 1.0 } else { -1.0 };
        let side: i8 = match (lead > 0.0, orientation) {
            (true, Orientation::PositiveDominates) | (false, Orientation::NegativeDominates) => 1,
            _ => 0,
        };
        keys.push((side, inner_order.iter().map(|&k| s * row[k]).collect::<Vec<f64>>(), s * bias(j)));
    }
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            if rows[i] == rows[j] && bias(i) == bias(j) {
                return Err(NotOrdered::Duplicate { i, j });
            }
        }
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| neuron_cmp(&keys[b], &keys[a]));
    let mut out = Vec::new();
    for j in order {
        if variant == Variant::III {
            for &k in inner_order {
                out.push(NeuronTerm { neuron: j, part: Part::WeightDerivative { k } });
            }
            out.push(NeuronTerm { neuron: j, part: Part::BiasDerivative });
        }
        out.push(NeuronTerm { neuron: j, part: Part::Value });
    }
    Ok(out)
}

/// `σ(Σ_k w_k f_k + b)` and, on request, its derivatives in `b` and `w_k`.
pub fn neuron_term_expr(sigma: &ScalarExpr, inner: &[ScalarExpr], row: &[f64], bias: f64, part: Part) -> ScalarExpr {
    let mut pre = ScalarExpr::constant(bias);
    for (w, f) in row.iter().zip(inner) {
        if *w != 0.0 {
            pre = pre.add(&f.scale(*w));
        }
    }
    match part {
        Part::Value => sigma.compose(&pre),
        Part::BiasDerivative => differentiate(sigma, 1).compose(&pre),
        Part::WeightDerivative { k } => differentiate(sigma, 1).compose(&pre).mul(&inner[k]),
    }
}

/// `e^{z³} + e^{−z}`: hyper-polynomial on both sides, faster on the right.
pub fn ordered_growth_activation_i() -> ScalarExpr {
    crate::expr::named::exp_pair(3, 1)
}

/// `e^{z⁷} + e^{−z³}`: hyper-exponential on both sides.
pub fn ordered_growth_activation_ii() -> ScalarExpr {
    crate::expr::named::exp_pair(7, 3)
}
