//! Analytic bump functions from the iteration `f_k = 1 + λ ρ(f_{k−1})`.
//!
//! Points whose first iterate stays below the escape threshold converge to
//! the attracting fixed point `L`; all others run off to infinity. Scaling
//! `f_n` by `1/L` and inverting yields a function close to 1 on a plateau
//! and close to 0 outside a guard interval.

use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::expr::named::{c, x};
use crate::expr::{Compiled, EvalError, ScalarExpr, SignedLogValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BumpError {
    #[error("no tangency: (L-1)ρ'(L) - ρ(L) does not change sign on [{lo}, {hi}]")]
    NoTangency { lo: f64, hi: f64 },
    #[error("base is not positive, increasing and strictly convex near L = {at}")]
    NotConvex { at: f64 },
    #[error("no fixed point found for λ = {lambda}")]
    NoFixedPoint { lambda: f64 },
    #[error("invalid bump specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Tangent slope and contact point of `y = 1 + λ ρ(x)` with the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tangency {
    pub lambda: f64,
    pub l: f64,
}

/// Solve `(L−1) ρ′(L) = ρ(L)` on the bracket, then `λ = (L−1)/ρ(L)`.
pub fn solve_tangency(rho: &ScalarExpr, bracket: (f64, f64)) -> Result<Tangency, BumpError> {
    let (lo, hi) = bracket;
    if !(lo < hi) {
        return Err(BumpError::InvalidSpec(format!("empty bracket [{lo}, {hi}]")));
    }
    let r0 = rho.compile();
    let d1 = rho.differentiate(1);
    let r1 = d1.compile();
    let r2 = d1.differentiate(1).compile();
    let g = |l: f64| -> Result<f64, EvalError> { Ok((l - 1.0) * r1.eval(l)? - r0.eval(l)?) };

    let (glo, ghi) = (g(lo)?, g(hi)?);
    if glo.signum() == ghi.signum() || glo == 0.0 && ghi == 0.0 {
        return Err(BumpError::NoTangency { lo, hi });
    }
    for i in 0..=64 {
        let t = lo + (hi - lo) * i as f64 / 64.0;
        if !(r0.eval(t)? > 0.0 && r1.eval(t)? > 0.0 && r2.eval(t)? > 0.0) {
            return Err(BumpError::NotConvex { at: t });
        }
    }

    let (mut a, mut b) = (lo, hi);
    let rising = glo < 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m)?;
        if (gm < 0.0) == rising {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-13 * m.abs() {
            break;
        }
    }
    let mut l = 0.5 * (a + b);
    // g'(L) = (L-1) ρ''(L)
    for _ in 0..4 {
        let slope = (l - 1.0) * r2.eval(l)?;
        if slope == 0.0 {
            break;
        }
        let step = g(l)? / slope;
        let next = l - step;
        if !(next > a - 1e-9 && next < b + 1e-9) {
            break;
        }
        l = next;
        if step.abs() <= 1e-16 * l.abs() {
            break;
        }
    }
    let lambda = (l - 1.0) / r0.eval(l)?;
    Ok(Tangency { lambda, l })
}

/// Roots `L1 < L2` of `1 + λ ρ(y) = y` for a sub-tangent `λ`.
pub fn solve_fixed_points(rho: &ScalarExpr, lambda: f64, tangency: Tangency) -> Result<(f64, f64), BumpError> {
    if !(lambda > 0.0 && lambda < tangency.lambda) {
        return Err(BumpError::NoFixedPoint { lambda });
    }
    let r = rho.compile();
    let h = |y: f64| -> Result<f64, EvalError> { Ok(1.0 + lambda * r.eval(y)? - y) };
    let bisect = |mut a: f64, mut b: f64| -> Result<f64, BumpError> {
        let ha = h(a)?;
        if ha.signum() == h(b)?.signum() {
            return Err(BumpError::NoFixedPoint { lambda });
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if (h(m)? > 0.0) == (ha > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    };
    let l1 = bisect(1.0, tangency.l)?;
    let mut hi = tangency.l * 2.0;
    while h(hi)? <= 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(BumpError::NoFixedPoint { lambda });
        }
    }
    let l2 = bisect(tangency.l, hi)?;
    Ok((l1, l2))
}

/// Overflow in [`iterate_f`], carrying the last finite iterate.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("iteration overflowed at step {step}; last finite iterate {last_finite}")]
pub struct IterateOverflow {
    pub step: usize,
    pub last_finite: f64,
}

/// `f_n(x)` with `f_1 = 1 + λ ρ(x)`, `f_k = 1 + λ ρ(f_{k−1})`.
pub fn iterate_f(rho: &ScalarExpr, lambda: f64, n: usize, x: f64) -> Result<f64, IterateOverflow> {
    assert!(n >= 1, "iteration count must be positive");
    let r = rho.compile();
    let mut y = x;
    for step in 1..=n {
        let next = r.eval(y).map(|v| 1.0 + lambda * v);
        match next {
            Ok(v) if v.is_finite() => y = v,
            _ => return Err(IterateOverflow { step, last_finite: y }),
        }
    }
    Ok(y)
}

/// Parameters of a bump `ξ_n`.
#[derive(Debug, Clone)]
pub struct BumpSpec {
    pub rho: ScalarExpr,
    pub lambda: f64,
    /// Attracting fixed point; the plateau value of `f_n`.
    pub l: f64,
    /// First-iterate arguments with `|u|` above this diverge.
    pub escape: f64,
    pub n: usize,
    pub plateau: (f64, f64),
    pub guard: (f64, f64),
}

impl BumpSpec {
    /// Tangent construction: `λ` at tangency, so `escape = L`.
    pub fn tangent(rho: ScalarExpr, plateau: (f64, f64), guard: (f64, f64), n: usize) -> Result<Self, BumpError> {
        let t = solve_tangency(&rho, (1.0, 8.0))?;
        let spec = BumpSpec { rho, lambda: t.lambda, l: t.l, escape: t.l, n, plateau, guard };
        spec.validate()?;
        Ok(spec)
    }

    /// `λ = θ·λ_tangent` with `0 < θ < 1`. The two fixed points separate, which
    /// turns the slow algebraic convergence at tangency into a geometric one.
    pub fn sub_tangent(
        rho: ScalarExpr,
        theta: f64,
        plateau: (f64, f64),
        guard: (f64, f64),
        n: usize,
    ) -> Result<Self, BumpError> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(BumpError::InvalidSpec(format!("theta must lie in (0, 1), got {theta}")));
        }
        let t = solve_tangency(&rho, (1.0, 8.0))?;
        let lambda = theta * t.lambda;
        let (l1, l2) = solve_fixed_points(&rho, lambda, t)?;
        let spec = BumpSpec { rho, lambda, l: l1, escape: l2, n, plateau, guard };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), BumpError> {
        let (a, b) = self.plateau;
        let (ga, gb) = self.guard;
        if !(ga < a && a < b && b < gb) {
            return Err(BumpError::InvalidSpec("need guard.0 < plateau.0 < plateau.1 < guard.1".into()));
        }
        if self.n == 0 || !(self.lambda > 0.0) || !(self.l > 1.0) {
            return Err(BumpError::InvalidSpec("need n >= 1, lambda > 0, L > 1".into()));
        }
        let fixed = 1.0 + self.lambda * self.rho.eval(self.l)?;
        if (fixed - self.l).abs() > 1e-10 * self.l {
            return Err(BumpError::InvalidSpec(format!("1 + λρ(L) = {fixed} differs from L = {}", self.l)));
        }
        Ok(())
    }

    /// Center and scale of `u = s (x − c)`.
    ///
    /// The escape threshold sits midway between the plateau and guard
    /// half-widths, so the plateau lands inside the basin and the guard
    /// outside it.
    pub fn affine(&self) -> (f64, f64) {
        let (a, b) = self.plateau;
        let (ga, gb) = self.guard;
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let hg = (c - ga).min(gb - c);
        (c, self.escape / (0.5 * (h + hg)))
    }

    /// `ρ` as used at the first level: `ρ(|u|)` when `ρ` is not already even.
    fn first_level_base(&self) -> ScalarExpr {
        let r = self.rho.compile();
        let even = [0.3, 0.9, 1.7, 2.6].iter().all(|&t| match (r.eval(t), r.eval(-t)) {
            (Ok(p), Ok(q)) => (p - q).abs() <= 1e-14 * p.abs().max(1.0),
            _ => false,
        });
        if even {
            self.rho.clone()
        } else {
            self.rho.compose(&x().powi(2).powf(0.5))
        }
    }
}

/// A constructed bump: the expression tree plus level-wise evaluation that
/// stays meaningful far into the tail.
#[derive(Debug, Clone)]
pub struct Bump {
    pub spec: BumpSpec,
    xi: ScalarExpr,
    first: Compiled,
    step: Compiled,
    derivs: [OnceLock<Compiled>; MAX_CACHED_ORDER],
}

const MAX_CACHED_ORDER: usize = 8;

/// Build `ξ_n(x) = L / f_n(s (x − c))`.
pub fn build_bump(spec: &BumpSpec) -> Result<Bump, BumpError> {
    spec.validate()?;
    let (center, s) = spec.affine();
    let lam = c(spec.lambda);
    let first = c(1.0) + lam.clone() * spec.first_level_base();
    let step = c(1.0) + lam * spec.rho.clone();
    let u = x().affine_arg(s, -s * center);
    let mut f = first.compose(&u);
    for _ in 1..spec.n {
        f = step.compose(&f);
    }
    let xi = c(spec.l) / f;
    Ok(Bump {
        first: first.compose(&u).compile(),
        step: step.compile(),
        spec: spec.clone(),
        xi,
        derivs: Default::default(),
    })
}

impl Bump {
    pub fn expr(&self) -> &ScalarExpr {
        &self.xi
    }

    /// `log f_n(x)`, or `+inf` once an iterate leaves the log range.
    pub fn log_fn(&self, x: f64) -> Result<f64, EvalError> {
        let mut y = self.first.eval_log(x)?;
        for _ in 1..self.spec.n {
            match self.step.eval_log_at(y) {
                Ok(v) => y = v,
                Err(EvalError::Overflow { .. }) => return Ok(f64::INFINITY),
                Err(e) => return Err(e),
            }
        }
        Ok(y.log_mag)
    }

    /// `ξ(x)` in log form. Every iterate is at least 1, so `ξ` is positive;
    /// past the log range it is reported as a positive value below `f64`.
    pub fn value_log(&self, x: f64) -> Result<SignedLogValue, EvalError> {
        let lf = self.log_fn(x)?;
        Ok(SignedLogValue::new(1, self.spec.l.ln() - lf))
    }

    pub fn value(&self, x: f64) -> Result<f64, EvalError> {
        Ok(self.value_log(x)?.to_f64())
    }

    /// `ξ^{(k)}(x)`. Where `f_n(x)` exceeds `e^{600}` the symbolic derivative
    /// hits `0·∞`; there `ξ^{(k)} = ξ·P(log f_n, …)` with `ξ < e^{−600}`, so it
    /// is returned as 0.
    pub fn derivative(&self, k: usize, x: f64) -> Result<f64, EvalError> {
        let r = if k < MAX_CACHED_ORDER {
            self.derivs[k].get_or_init(|| self.derivative_tape(k)).eval(x)
        } else {
            self.derivative_tape(k).eval(x)
        };
        r.or_else(|e| self.tail_zero(x, e))
    }

    pub fn derivative_tape(&self, k: usize) -> Compiled {
        self.xi.differentiate(k).compile()
    }

    pub(crate) fn tail_zero(&self, x: f64, err: EvalError) -> Result<f64, EvalError> {
        if self.log_fn(x)? > 600.0 {
            Ok(0.0)
        } else {
            Err(err)
        }
    }

    /// Half-open tail window used by [`verify_bump`] by default: twice the
    /// guard half-width around the center, and at least 10% beyond the
    /// escape threshold.
    pub fn default_window(&self) -> (f64, f64) {
        let (center, s) = self.spec.affine();
        let (ga, gb) = self.spec.guard;
        let half = (2.0 * (center - ga).max(gb - center)).max(1.1 * self.spec.escape / s);
        (center - half, center + half)
    }
}

/// Anything [`verify_bump`] can certify.
pub trait BumpLike {
    fn value_log(&self, x: f64) -> Result<SignedLogValue, EvalError>;
    fn derivative(&self, k: usize, x: f64) -> Result<f64, EvalError>;
    fn window(&self, guard: (f64, f64)) -> (f64, f64);
}

impl BumpLike for Bump {
    fn value_log(&self, x: f64) -> Result<SignedLogValue, EvalError> {
        Bump::value_log(self, x)
    }
    fn derivative(&self, k: usize, x: f64) -> Result<f64, EvalError> {
        Bump::derivative(self, k, x)
    }
    fn window(&self, _guard: (f64, f64)) -> (f64, f64) {
        self.default_window()
    }
}

impl BumpLike for ScalarExpr {
    fn value_log(&self, x: f64) -> Result<SignedLogValue, EvalError> {
        self.eval_log_domain(x)
    }
    fn derivative(&self, k: usize, x: f64) -> Result<f64, EvalError> {
        self.differentiate(k).eval(x)
    }
    fn window(&self, guard: (f64, f64)) -> (f64, f64) {
        let w = guard.1 - guard.0;
        (guard.0 - w, guard.1 + w)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub plateau_points: usize,
    pub tail_points: usize,
    /// Tail window; `None` uses the bump's default.
    pub window: Option<(f64, f64)>,
    /// Derivative orders `1..=max_derivative` checked on the plateau.
    pub max_derivative: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { plateau_points: 2001, tail_points: 4001, window: None, max_derivative: 0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BumpReport {
    pub epsilon: f64,
    pub plateau_error: f64,
    pub plateau_pass: bool,
    pub window: (f64, f64),
    pub tail_sup: f64,
    pub tail_pass: bool,
    /// Smallest `log ξ` seen; `-inf` means below the `f64` range but positive.
    pub min_log_value: f64,
    pub positive: bool,
    pub derivative_sups: Vec<f64>,
    pub derivative_pass: bool,
    pub failures: Vec<String>,
}

impl BumpReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Grid certification of plateau accuracy, tail smallness, positivity and
/// plateau derivative smallness. Failures are report entries, not errors.
pub fn verify_bump<B: BumpLike + ?Sized>(
    xi: &B,
    plateau: (f64, f64),
    guard: (f64, f64),
    eps: f64,
    cfg: &VerifyConfig,
) -> BumpReport {
    let mut failures = Vec::new();
    let (a, b) = plateau;
    let window = cfg.window.unwrap_or_else(|| xi.window(guard));
    let mut plateau_error = 0.0f64;
    let mut min_log = f64::INFINITY;
    let mut positive = true;
    let mut note_value = |x: f64, failures: &mut Vec<String>| -> Option<f64> {
        match xi.value_log(x) {
            Ok(v) => {
                if v.sign != 1 {
                    positive = false;
                    failures.push(format!("non-positive value at x = {x}"));
                }
                min_log = min_log.min(v.log_mag);
                Some(v.to_f64())
            }
            Err(e) => {
                failures.push(format!("evaluation failed: {e}"));
                None
            }
        }
    };
    for &x in &crate::expr::uniform_grid(a, b, cfg.plateau_points) {
        if let Some(v) = note_value(x, &mut failures) {
            plateau_error = plateau_error.max((v - 1.0).abs());
        }
    }
    let mut tail_sup = 0.0f64;
    for &x in &crate::expr::uniform_grid(window.0, window.1, cfg.tail_points) {
        let v = note_value(x, &mut failures);
        if x < guard.0 || x > guard.1 {
            if let Some(v) = v {
                tail_sup = tail_sup.max(v.abs());
            }
        }
    }
    let plateau_pass = plateau_error < eps;
    if !plateau_pass {
        failures.push(format!("plateau error {plateau_error} ≥ {eps}"));
    }
    let tail_pass = tail_sup < eps;
    if !tail_pass {
        failures.push(format!("tail sup {tail_sup} ≥ {eps}"));
    }
    let mut derivative_sups = Vec::new();
    for k in 1..=cfg.max_derivative {
        let mut sup = 0.0f64;
        for &x in &crate::expr::uniform_grid(a, b, cfg.plateau_points) {
            match xi.derivative(k, x) {
                Ok(v) => sup = sup.max(v.abs()),
                Err(e) => failures.push(format!("derivative {k} failed: {e}")),
            }
        }
        derivative_sups.push(sup);
    }
    let derivative_pass = derivative_sups.iter().all(|&s| s < eps);
    if !derivative_pass {
        failures.push(format!("derivative sups {derivative_sups:?} not all below {eps}"));
    }
    BumpReport {
        epsilon: eps,
        plateau_error,
        plateau_pass,
        window,
        tail_sup,
        tail_pass,
        min_log_value: min_log,
        positive,
        derivative_sups,
        derivative_pass,
        failures,
    }
}
