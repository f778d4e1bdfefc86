//! Blending two activations through a bump, and the tanh look-alike built
//! from two nested blends.

use serde::Serialize;
use thiserror::Error;

use crate::bump::{build_bump, Bump, BumpError, BumpLike, BumpSpec};
use crate::expr::named::{c, exp_square, tanh, x};
use crate::expr::{derivative_tapes, snorm_distance, uniform_grid, EvalError, ScalarExpr};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlendError {
    #[error(transparent)]
    Bump(#[from] BumpError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("no candidate theta meets the error budget {budget} (best distance {best})")]
    BudgetNotMet { budget: f64, best: f64 },
}

/// `σ̃ = ξ σ + (1 − ξ) σ₀`.
pub fn blend_activations(sigma: &ScalarExpr, sigma0: &ScalarExpr, xi: &ScalarExpr) -> ScalarExpr {
    xi.mul(sigma).add(&c(1.0).sub(xi).mul(sigma0))
}

/// `σ̃^{(s)}` at each point, assembled from the Leibniz expansion
/// `ξσ^{(s)} + (1−ξ)σ₀^{(s)} + Σ_{k=1}^{s} C(s,k) ξ^{(k)} (σ^{(s−k)} − σ₀^{(s−k)})`.
pub fn leibniz_blend_derivative<B: BumpLike + ?Sized>(
    sigma: &ScalarExpr,
    sigma0: &ScalarExpr,
    xi: &B,
    s: usize,
    xs: &[f64],
) -> Result<Vec<f64>, EvalError> {
    let ds = derivative_tapes(sigma, s);
    let d0 = derivative_tapes(sigma0, s);
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        let xi0 = xi.value_log(x)?.to_f64();
        let mut total = xi0 * ds[s].eval(x)? + (1.0 - xi0) * d0[s].eval(x)?;
        let mut binom = 1.0;
        for k in 1..=s {
            binom = binom * (s - k + 1) as f64 / k as f64;
            let xk = xi.derivative(k, x)?;
            total += binom * xk * (ds[s - k].eval(x)? - d0[s - k].eval(x)?);
        }
        out.push(total);
    }
    Ok(out)
}

/// Base of the bumps used by the tanh construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BumpBase {
    /// `e^{x²}`: analytic on the whole line.
    ExpSquare,
    /// `e^{|x|}`: analytic away from the center only.
    ExpAbs,
}

impl BumpBase {
    pub fn rho(self) -> ScalarExpr {
        match self {
            BumpBase::ExpSquare => exp_square(),
            // the bump builder applies ρ(|u|) to non-even bases
            BumpBase::ExpAbs => x().exp(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TanhApproxConfig {
    pub epsilon: f64,
    pub n: usize,
    pub base: BumpBase,
    pub inner_plateau: f64,
    pub inner_guard: f64,
    pub outer_plateau: f64,
    pub outer_guard: f64,
    /// Sub-tangent ratios tried in order; the first meeting the budget wins.
    pub thetas: Vec<f64>,
    /// Interval on which distances to tanh are measured.
    pub check_half_width: f64,
    pub check_points: usize,
}

impl Default for TanhApproxConfig {
    fn default() -> Self {
        TanhApproxConfig {
            epsilon: 0.05,
            n: 12,
            base: BumpBase::ExpSquare,
            inner_plateau: 3.5,
            inner_guard: 4.5,
            outer_plateau: 1.75,
            outer_guard: 2.25,
            thetas: vec![0.5, 0.25, 0.1],
            check_half_width: 3.0,
            check_points: 2001,
        }
    }
}

/// The two bumps of the tanh construction.
#[derive(Debug, Clone)]
pub struct TanhBumps {
    pub inner: Bump,
    pub outer: Bump,
    pub theta: f64,
}

/// `ζ_in·tanh + (1 − ζ_in)·e^{x²}`.
pub fn inner_tanh_blend(inner: &Bump) -> ScalarExpr {
    blend_activations(&tanh(), &exp_square(), inner.expr())
}

/// `ζ_out(x/α)·σ_in(x) + (1 − ζ_out(x/α))·e^{x²}`.
///
/// The outer bump is stretched by `α`, so its plateau widens as `α` grows
/// and the distance to tanh on a fixed window can only shrink.
pub fn build_tanh_approx(alpha: f64, inner: &Bump, outer: &Bump) -> ScalarExpr {
    assert!(alpha > 0.0, "alpha must be positive");
    let zeta = outer.expr().compose(&x().scale(1.0 / alpha));
    blend_activations(&inner_tanh_blend(inner), &exp_square(), &zeta)
}

/// Sup distance to tanh on `[−h, h]`.
pub fn sup_distance_to_tanh(f: &ScalarExpr, half_width: f64, points: usize) -> Result<f64, EvalError> {
    snorm_distance(f, &tanh(), 0, -half_width, half_width, points)
}

/// Build both bumps, choosing the largest `θ` that keeps each blend stage
/// within half the error budget at `α = 2`.
pub fn tanh_approx_bumps(cfg: &TanhApproxConfig) -> Result<TanhBumps, BlendError> {
    let half = 0.5 * cfg.epsilon;
    let mut best = f64::INFINITY;
    for &theta in &cfg.thetas {
        let rho = cfg.base.rho();
        let inner = build_bump(&BumpSpec::sub_tangent(
            rho.clone(),
            theta,
            (-cfg.inner_plateau, cfg.inner_plateau),
            (-cfg.inner_guard, cfg.inner_guard),
            cfg.n,
        )?)?;
        let outer = build_bump(&BumpSpec::sub_tangent(
            rho,
            theta,
            (-cfg.outer_plateau, cfg.outer_plateau),
            (-cfg.outer_guard, cfg.outer_guard),
            cfg.n,
        )?)?;
        let inner_blend = inner_tanh_blend(&inner);
        let d_inner = sup_distance_to_tanh(&inner_blend, cfg.check_half_width, cfg.check_points)?;
        let full = build_tanh_approx(2.0, &inner, &outer);
        let d_outer = snorm_distance(&full, &inner_blend, 0, -cfg.check_half_width, cfg.check_half_width, cfg.check_points)?;
        best = best.min(d_inner.max(d_outer));
        if d_inner < half && d_outer < half {
            return Ok(TanhBumps { inner, outer, theta });
        }
    }
    Err(BlendError::BudgetNotMet { budget: half, best })
}

/// Outcome of the level-set containment check on a two-neuron net.
#[derive(Debug, Clone, Serialize)]
pub struct ContainmentReport {
    pub checked: usize,
    pub near_zero: usize,
    pub sup_gap: f64,
    pub lipschitz: f64,
    pub violations: Vec<[f64; 6]>,
}

/// For `H(θ, x) = a₁σ(w₁x+b₁) + a₂σ(w₂x+b₂)` and `𝓛(σ, θ) = ∫₀¹ H²`: every
/// grid `θ` with `𝓛(σ̃, θ) < 1e−12` must satisfy
/// `𝓛(σ, θ) < 1e−12 + L·‖σ − σ̃‖_{∞,[−R,R]}`, where `L` is the largest
/// `Σ|a|·sup(|H_σ| + |H_σ̃|)` met on the grid and `R` bounds `|wx + b|`.
pub fn level_set_containment(
    sigma: &ScalarExpr,
    sigma_tilde: &ScalarExpr,
    a_vals: &[f64],
    w_vals: &[f64],
    b_vals: &[f64],
) -> Result<ContainmentReport, EvalError> {
    let r = w_vals.iter().map(|w| w.abs()).fold(0.0, f64::max) + b_vals.iter().map(|b| b.abs()).fold(0.0, f64::max);
    let r = r.max(1e-3);
    let gap = snorm_distance(sigma, sigma_tilde, 0, -r, r, 4001)?;
    let q = GaussLegendre::new(48, 0.0, 1.0);
    let (s, st) = (sigma.compile(), sigma_tilde.compile());
    let mut thetas = Vec::new();
    for &a1 in a_vals {
        for &a2 in a_vals {
            for &w1 in w_vals {
                for &w2 in w_vals {
                    for &b1 in b_vals {
                        for &b2 in b_vals {
                            thetas.push([a1, a2, w1, w2, b1, b2]);
                        }
                    }
                }
            }
        }
    }
    let mut evals = Vec::with_capacity(thetas.len());
    let mut lipschitz = 0.0f64;
    for th in &thetas {
        let [a1, a2, w1, w2, b1, b2] = *th;
        let mut l_sigma = 0.0;
        let mut l_tilde = 0.0;
        let mut sup = 0.0f64;
        for (&x, &wt) in q.nodes.iter().zip(&q.weights) {
            let h = a1 * s.eval(w1 * x + b1)? + a2 * s.eval(w2 * x + b2)?;
            let ht = a1 * st.eval(w1 * x + b1)? + a2 * st.eval(w2 * x + b2)?;
            l_sigma += wt * h * h;
            l_tilde += wt * ht * ht;
            sup = sup.max(h.abs() + ht.abs());
        }
        lipschitz = lipschitz.max((a1.abs() + a2.abs()) * sup);
        evals.push((l_sigma, l_tilde));
    }
    let mut near_zero = 0;
    let mut violations = Vec::new();
    for (th, &(l_sigma, l_tilde)) in thetas.iter().zip(&evals) {
        if l_tilde < 1e-12 {
            near_zero += 1;
            if !(l_sigma < 1e-12 + lipschitz * gap) {
                violations.push(*th);
            }
        }
    }
    Ok(ContainmentReport { checked: thetas.len(), near_zero, sup_gap: gap, lipschitz, violations })
}

/// Sample `(x, σ̃(x), tanh(x))` rows on a uniform grid.
pub fn tanh_approx_rows(sigma: &ScalarExpr, lo: f64, hi: f64, points: usize) -> Result<Vec<[f64; 3]>, EvalError> {
    let t = sigma.compile();
    uniform_grid(lo, hi, points).into_iter().map(|x| Ok([x, t.eval(x)?, x.tanh()])).collect()
}
