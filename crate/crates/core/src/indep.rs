//! Numeric linear-independence oracle and the random projection used to
//! reduce multi-dimensional weights to one dimension.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Compiled, EvalError, ScalarExpr, SignedLogValue};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndepError {
    #[error("empty function family")]
    Empty,
    #[error("function {index} could not be sampled: {source}")]
    Sample { index: usize, source: EvalError },
    #[error("function {index} is not finite after rescaling")]
    NonFinite { index: usize },
    #[error("weights {i} and {j} coincide")]
    DuplicateWeights { i: usize, j: usize },
    #[error("no separating direction found in {attempts} attempts")]
    Exhausted { attempts: usize },
    #[error("weights have inconsistent dimensions")]
    Dimension,
}

/// Something that can be sampled as sign and log-magnitude.
pub trait SampledFunction {
    fn sample_log(&self, xs: &[f64]) -> Result<Vec<SignedLogValue>, EvalError>;
}

impl SampledFunction for Compiled {
    fn sample_log(&self, xs: &[f64]) -> Result<Vec<SignedLogValue>, EvalError> {
        xs.iter().map(|&x| self.eval_log(x)).collect()
    }
}

impl SampledFunction for ScalarExpr {
    fn sample_log(&self, xs: &[f64]) -> Result<Vec<SignedLogValue>, EvalError> {
        self.compile().sample_log(xs)
    }
}

/// A plain `f64` function; non-finite samples are reported as overflow.
pub struct FnSampled<F>(pub F);

impl<F: Fn(f64) -> f64> SampledFunction for FnSampled<F> {
    fn sample_log(&self, xs: &[f64]) -> Result<Vec<SignedLogValue>, EvalError> {
        xs.iter()
            .map(|&x| {
                let v = (self.0)(x);
                if v.is_finite() {
                    Ok(SignedLogValue::from_f64(v))
                } else {
                    Err(EvalError::Overflow { x })
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleConfig {
    pub lo: f64,
    pub hi: f64,
    pub nodes: usize,
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { lo: -2.0, hi: 2.0, nodes: 201, tol: 1e-8 }
    }
}

impl OracleConfig {
    pub fn on(lo: f64, hi: f64) -> Self {
        OracleConfig { lo, hi, ..Default::default() }
    }

    pub fn quadrature(&self) -> GaussLegendre {
        GaussLegendre::new(self.nodes, self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub independent: bool,
    pub min_singular_value: f64,
    /// Gram singular values in decreasing order.
    pub singular_values: Vec<f64>,
    /// First function whose rescaled norm is below `tol²`.
    pub zero_function: Option<usize>,
}

/// Gram-matrix test of the normalized functions on Gauss–Legendre nodes.
///
/// Each function is first divided by its largest sampled magnitude in log
/// form, so families mixing exp-tower sizes are compared on equal footing.
pub fn numeric_independent(fns: &[&dyn SampledFunction], cfg: &OracleConfig) -> Result<OracleReport, IndepError> {
    let q = cfg.quadrature();
    let cols = fns
        .iter()
        .enumerate()
        .map(|(i, f)| f.sample_log(&q.nodes).map_err(|source| IndepError::Sample { index: i, source }))
        .collect::<Result<Vec<_>, _>>()?;
    gram_verdict(&cols, &q.weights, cfg.tol)
}

/// [`numeric_independent`] on values already sampled at `cfg.quadrature()` nodes.
pub fn numeric_independent_samples(cols: &[Vec<f64>], cfg: &OracleConfig) -> Result<OracleReport, IndepError> {
    let q = cfg.quadrature();
    let logs: Vec<Vec<SignedLogValue>> =
        cols.iter().map(|c| c.iter().map(|&v| SignedLogValue::from_f64(v)).collect()).collect();
    for (i, c) in cols.iter().enumerate() {
        if c.len() != q.nodes.len() || c.iter().any(|v| !v.is_finite()) {
            return Err(IndepError::NonFinite { index: i });
        }
    }
    gram_verdict(&logs, &q.weights, cfg.tol)
}

fn gram_verdict(cols: &[Vec<SignedLogValue>], weights: &[f64], tol: f64) -> Result<OracleReport, IndepError> {
    if cols.is_empty() {
        return Err(IndepError::Empty);
    }
    let n = weights.len();
    let k = cols.len();
    let mut a = DMatrix::zeros(n, k);
    let mut zero_function = None;
    for (i, col) in cols.iter().enumerate() {
        let top = col.iter().filter(|v| v.sign != 0).map(|v| v.log_mag).fold(f64::NEG_INFINITY, f64::max);
        if top.is_nan() || top == f64::INFINITY {
            return Err(IndepError::NonFinite { index: i });
        }
        let scaled: Vec<f64> = if top == f64::NEG_INFINITY {
            vec![0.0; n]
        } else {
            col.iter().map(|v| v.sign as f64 * (v.log_mag - top).exp()).collect()
        };
        let norm = scaled.iter().zip(weights).map(|(v, w)| w * v * v).sum::<f64>().sqrt();
        if !norm.is_finite() {
            return Err(IndepError::NonFinite { index: i });
        }
        if norm < tol * tol {
            zero_function.get_or_insert(i);
            continue;
        }
        for r in 0..n {
            a[(r, i)] = weights[r].sqrt() * scaled[r] / norm;
        }
    }
    let gram = a.transpose() * &a;
    let mut sv: Vec<f64> = gram.svd(false, false).singular_values.iter().cloned().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let min = if zero_function.is_some() { 0.0 } else { *sv.last().unwrap() };
    Ok(OracleReport { independent: zero_function.is_none() && min > tol, min_singular_value: min, singular_values: sv, zero_function })
}

/// `δ_sep = min_{i≠j} ‖w_i − w_j‖ / (4√d)`.
pub fn separation_bound(weights: &[Vec<f64>]) -> Result<f64, IndepError> {
    let d = weights.first().map(|w| w.len()).unwrap_or(0);
    if d == 0 || weights.iter().any(|w| w.len() != d) {
        return Err(IndepError::Dimension);
    }
    let mut min = f64::INFINITY;
    for i in 0..weights.len() {
        for j in i + 1..weights.len() {
            let dist = weights[i].iter().zip(&weights[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if dist == 0.0 {
                return Err(IndepError::DuplicateWeights { i, j });
            }
            min = min.min(dist);
        }
    }
    Ok(min / (4.0 * (d as f64).sqrt()))
}

/// Random unit `v` with `|⟨w_i − w_j, v⟩| > δ_sep` for every pair.
///
/// Directions are drawn uniformly on the sphere from a ChaCha stream seeded
/// by `seed`, so the result is reproducible.
pub fn dimension_reduce(weights: &[Vec<f64>], attempts: usize, seed: u64) -> Result<Vec<f64>, IndepError> {
    let delta = separation_bound(weights)?;
    let d = weights[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..attempts {
        let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|t| *t /= norm);
        let separated = (0..weights.len()).all(|i| {
            (i + 1..weights.len()).all(|j| {
                let p: f64 = weights[i].iter().zip(&weights[j]).zip(&v).map(|((a, b), t)| (a - b) * t).sum();
                p.abs() > delta
            })
        });
        if separated {
            return Ok(v);
        }
    }
    Err(IndepError::Exhausted { attempts })
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
