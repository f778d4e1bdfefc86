use super::{differentiate, EvalError, ScalarExpr};

/// Uniform grid of `n` points on `[lo, hi]`, endpoints included.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs at least two points");
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo + h * i as f64 }).collect()
}

/// Grid supremum of `Σ_{s≤S} |f^{(s)}|` on `[lo, hi]` with `n` points.
///
/// Refining `n → 2n − 1` keeps every old point, so the value is monotone
/// under that refinement as well as in `S`.
pub fn snorm(f: &ScalarExpr, order: usize, lo: f64, hi: f64, n: usize) -> Result<f64, EvalError> {
    let grid = uniform_grid(lo, hi, n);
    let derivs = derivative_tapes(f, order);
    let mut best = 0.0f64;
    for &x in &grid {
        let mut sum = 0.0;
        for t in &derivs {
            sum += t.eval(x)?.abs();
        }
        if !sum.is_finite() {
            return Err(EvalError::Overflow { x });
        }
        best = best.max(sum);
    }
    Ok(best)
}

/// `snorm(f − g)`.
pub fn snorm_distance(f: &ScalarExpr, g: &ScalarExpr, order: usize, lo: f64, hi: f64, n: usize) -> Result<f64, EvalError> {
    snorm(&f.sub(g), order, lo, hi, n)
}

/// Compiled `f, f′, …, f^{(order)}`.
pub fn derivative_tapes(f: &ScalarExpr, order: usize) -> Vec<super::Compiled> {
    let mut out = Vec::with_capacity(order + 1);
    let mut cur = f.clone();
    out.push(cur.compile());
    for _ in 0..order {
        cur = differentiate(&cur, 1);
        out.push(cur.compile());
    }
    out
}
