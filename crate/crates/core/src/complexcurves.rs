//! Sigmoid pole lattices, blow-up curves approaching a chosen pole, and
//! complex decay profiles of neuron sums along those curves.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::expr::named::{c, x};
use crate::expr::{complex_sigmoid, Compiled, EvalError, ScalarExpr};
use crate::growth::Curve;

/// Closest a profile sample may come to a bystander pole.
pub const POLE_GUARD: f64 = 1e-8;
/// Bystanders must stay below this modulus on the residual disk.
pub const BYSTANDER_BOUND: f64 = 1e6;
const MAX_SHIFT_DOUBLINGS: u32 = 40;
const DISK_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("neuron {index} has zero weight")]
    ZeroWeight { index: usize },
    #[error("neurons {i} and {j} share (w, b)")]
    Duplicate { i: usize, j: usize },
    #[error("index {index} out of range for {len} neurons")]
    BadIndex { index: usize, len: usize },
    #[error("neuron {bystander} has a pole at the limit point of the curve")]
    CoincidentPole { bystander: usize },
    #[error("no shift up to 2^{doublings} keeps the bystanders bounded")]
    ShiftNotFound { doublings: u32 },
    #[error("function {function} is within {distance:e} of a pole at t = {t}")]
    NearPole { function: usize, t: f64, distance: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Poles `(i(2q+1)π − b)/w` of `z ↦ σ(wz + b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleLattice {
    pub w: f64,
    pub b: f64,
}

impl PoleLattice {
    pub fn new(w: f64, b: f64) -> Result<Self, CurveError> {
        if w == 0.0 {
            return Err(CurveError::ZeroWeight { index: 0 });
        }
        Ok(PoleLattice { w, b })
    }

    pub fn pole(&self, q: i64) -> Complex64 {
        Complex64::new(-self.b, (2 * q + 1) as f64 * PI) / self.w
    }

    /// Index and distance of the lattice point closest to `z`.
    pub fn nearest(&self, z: Complex64) -> (i64, f64) {
        let u = z * self.w + self.b;
        let q = ((u.im / PI - 1.0) / 2.0).round() as i64;
        (q, (z - self.pole(q)).norm())
    }

    /// `σ(wz + b)`; `None` on a pole.
    pub fn neuron(&self, z: Complex64) -> Option<Complex64> {
        complex_sigmoid(z * self.w + self.b)
    }
}

pub fn sigmoid_pole(w: f64, b: f64, q: i64) -> Result<Complex64, CurveError> {
    Ok(PoleLattice::new(w, b)?.pole(q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// Target neuron tends to `+∞`.
    Plus,
    /// Target neuron tends to `−∞`.
    Minus,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// `γ(t) = (1/w_k)(±1/(t + T + 1) − b_k + iπ)`, along which `σ(w_k γ + b_k)`
/// equals `1/(1 − e^{∓1/(t+T+1)})`.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupCurve {
    pub target: PoleLattice,
    pub index: usize,
    pub side: Side,
    pub shift: f64,
    pub limit: Complex64,
    /// Radius of the disk around `limit` that the curve stays inside.
    pub radius: f64,
    /// Largest bystander modulus seen on that disk.
    pub bystander_max: f64,
    #[serde(skip)]
    pub bystanders: Vec<(usize, PoleLattice)>,
}

impl BlowupCurve {
    pub fn point(&self, t: f64) -> Complex64 {
        let s = self.side.sign() / (t + self.shift + 1.0);
        Complex64::new(s - self.target.b, PI) / self.target.w
    }

    /// Closed-form value of the target neuron along the curve.
    pub fn target_value(&self, t: f64) -> f64 {
        1.0 / (1.0 - (-self.side.sign() / (t + self.shift + 1.0)).exp())
    }

    pub fn curve(&self, t_max: f64) -> Curve {
        let (w, b, shift, sign) = (self.target.w, self.target.b, self.shift, self.side.sign());
        Curve::new(0.0, t_max, move |t| Complex64::new(sign / (t + shift + 1.0) - b, PI) / w)
            .with_velocity(move |t| Complex64::new(-sign / ((t + shift + 1.0).powi(2) * w), 0.0))
            .with_total_length(self.radius)
    }
}

fn bystanders_ok(center: Complex64, radius: f64, others: &[(usize, PoleLattice)]) -> Option<f64> {
    let mut worst = 0.0f64;
    for (_, lat) in others {
        if lat.nearest(center).1 <= radius * (1.0 + 1e-9) {
            return None;
        }
        for i in 0..=DISK_SAMPLES {
            let z = if i == DISK_SAMPLES {
                center
            } else {
                center + Complex64::from_polar(radius, 2.0 * PI * i as f64 / DISK_SAMPLES as f64)
            };
            worst = worst.max(lat.neuron(z)?.norm());
        }
    }
    (worst <= BYSTANDER_BOUND).then_some(worst)
}

/// Blow-up curve for neuron `k` of the sigmoid family `σ(w_j z + b_j)`.
///
/// The shift `T` starts at 0 and doubles until every other neuron is
/// analytic and bounded by [`BYSTANDER_BOUND`] on the disk the curve lives in.
/// Negative `w_k` is allowed: the same formula approaches the pole from the
/// reflected direction and the target values are unchanged.
pub fn blowup_curve(params: &[(f64, f64)], k: usize, side: Side) -> Result<BlowupCurve, CurveError> {
    if k >= params.len() {
        return Err(CurveError::BadIndex { index: k, len: params.len() });
    }
    for (i, &(w, _)) in params.iter().enumerate() {
        if w == 0.0 {
            return Err(CurveError::ZeroWeight { index: i });
        }
    }
    for i in 0..params.len() {
        for j in i + 1..params.len() {
            if params[i] == params[j] {
                return Err(CurveError::Duplicate { i, j });
            }
        }
    }
    let target = PoleLattice::new(params[k].0, params[k].1)?;
    let limit = target.pole(0);
    let others: Vec<(usize, PoleLattice)> =
        params.iter().enumerate().filter(|(i, _)| *i != k).map(|(i, &(w, b))| (i, PoleLattice { w, b })).collect();
    for (i, lat) in &others {
        if lat.nearest(limit).1 <= 1e-12 * limit.norm().max(1.0) {
            return Err(CurveError::CoincidentPole { bystander: *i });
        }
    }
    let mut shift = 0.0;
    for n in 0..=MAX_SHIFT_DOUBLINGS + 1 {
        let radius = 1.0 / (target.w.abs() * (shift + 1.0));
        if let Some(worst) = bystanders_ok(limit, radius, &others) {
            return Ok(BlowupCurve { target, index: k, side, shift, limit, radius, bystander_max: worst, bystanders: others });
        }
        shift = if n == 0 { 1.0 } else { shift * 2.0 };
    }
    Err(CurveError::ShiftNotFound { doublings: MAX_SHIFT_DOUBLINGS })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayProfile {
    pub t: Vec<f64>,
    /// `log|f_i(γ(t))|`, one row per `t`.
    pub log_mag: Vec<Vec<f64>>,
    /// Largest `|Im f_i(γ(t))|` over the grid, per function.
    pub max_imag: Vec<f64>,
}

/// Evaluate each function along `curve`, refusing samples within
/// [`POLE_GUARD`] of a pole of any lattice in `guard`.
pub fn curve_decay_profile(fns: &[ScalarExpr], curve: &Curve, ts: &[f64], guard: &[PoleLattice]) -> Result<DecayProfile, CurveError> {
    let tapes: Vec<Compiled> = fns.iter().map(|f| f.compile()).collect();
    let mut log_mag = Vec::with_capacity(ts.len());
    let mut max_imag = vec![0.0f64; fns.len()];
    for &t in ts {
        let z = curve.point(t);
        for (i, lat) in guard.iter().enumerate() {
            let d = lat.nearest(z).1;
            if d < POLE_GUARD {
                return Err(CurveError::NearPole { function: i, t, distance: d });
            }
        }
        let mut row = Vec::with_capacity(fns.len());
        for (i, tape) in tapes.iter().enumerate() {
            let v = tape.eval_complex(z)?;
            max_imag[i] = max_imag[i].max(v.im.abs());
            row.push(v.norm().ln());
        }
        log_mag.push(row);
    }
    Ok(DecayProfile { t: ts.to_vec(), log_mag, max_imag })
}

/// Least-squares slope of `ys` against `xs`.
pub fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// `Σ_j a_j / (1 + λ_j e^{w f})` with constant `λ_j`.
pub fn saturating_block(f: &ScalarExpr, w: f64, coeffs: &[f64], lambdas: &[f64]) -> ScalarExpr {
    let mut sum = c(0.0);
    for (a, l) in coeffs.iter().zip(lambdas) {
        // 1/(1 + λ e^{u}) = σ(−u − ln λ)
        let term = x().sigmoid().compose(&f.scale(-w).add(&c(-l.ln())));
        sum = sum.add(&term.scale(*a));
    }
    sum
}

#[derive(Debug, Clone, PartialEq, Serialize, Error)]
pub enum HypothesisViolation {
    #[error("first-layer neuron {index} has zero weight")]
    ZeroInner { index: usize },
    #[error("first-layer neurons {i} and {j} agree up to sign")]
    InnerCollision { i: usize, j: usize },
    #[error("outer neuron {index} has zero weights")]
    ZeroOuter { index: usize },
    #[error("outer neurons {i} and {j} agree up to sign")]
    OuterCollision { i: usize, j: usize },
}

fn pm_collision(rows: &[Vec<f64>]) -> Option<(usize, usize)> {
    let tol = 1e-12;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let s = rows[i].iter().chain(&rows[j]).fold(1.0f64, |m, v| m.max(v.abs()));
            let minus = rows[i].iter().zip(&rows[j]).all(|(a, b)| (a - b).abs() <= tol * s);
            let plus = rows[i].iter().zip(&rows[j]).all(|(a, b)| (a + b).abs() <= tol * s);
            if minus || plus {
                return Some((i, j));
            }
        }
    }
    None
}

/// Sufficient condition for independence of three-layer sigmoid or tanh
/// neurons `σ(Σ_k W2_{jk} σ(w_k·x + b_k) + b2_j)`: nonzero weights and no two
/// parameter rows equal up to sign, in both layers.
pub fn three_layer_sigmoid_hypotheses(w1: &[Vec<f64>], b1: &[f64], w2: &[Vec<f64>], b2: &[f64]) -> Result<(), HypothesisViolation> {
    for (k, w) in w1.iter().enumerate() {
        if w.iter().all(|v| *v == 0.0) {
            return Err(HypothesisViolation::ZeroInner { index: k });
        }
    }
    let inner: Vec<Vec<f64>> = w1.iter().zip(b1).map(|(w, b)| w.iter().copied().chain([*b]).collect()).collect();
    if let Some((i, j)) = pm_collision(&inner) {
        return Err(HypothesisViolation::InnerCollision { i, j });
    }
    for (j, w) in w2.iter().enumerate() {
        if w.iter().all(|v| *v == 0.0) {
            return Err(HypothesisViolation::ZeroOuter { index: j });
        }
    }
    let outer: Vec<Vec<f64>> = w2.iter().zip(b2).map(|(w, b)| w.iter().copied().chain([*b]).collect()).collect();
    if let Some((i, j)) = pm_collision(&outer) {
        return Err(HypothesisViolation::OuterCollision { i, j });
    }
    Ok(())
}

/// Scalar-input three-layer sigmoid neurons along direction `v`.
pub fn three_layer_sigmoid_neurons(w1: &[Vec<f64>], b1: &[f64], w2: &[Vec<f64>], b2: &[f64], v: &[f64]) -> Vec<ScalarExpr> {
    let hidden: Vec<ScalarExpr> =
        w1.iter().zip(b1).map(|(w, b)| x().sigmoid().affine_arg(crate::indep::dot(w, v), *b)).collect();
    w2.iter()
        .zip(b2)
        .map(|(row, b)| {
            let mut pre = c(*b);
            for (wk, h) in row.iter().zip(&hidden) {
                pre = pre.add(&h.scale(*wk));
            }
            pre.sigmoid()
        })
        .collect()
}
