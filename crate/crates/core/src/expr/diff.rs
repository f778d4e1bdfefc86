use std::collections::HashMap;

use super::{Node, ScalarExpr};

/// Symbolic derivative of the given order.
///
/// Each pass memoizes on node identity, so shared subtrees are
/// differentiated once and the result stays a DAG.
pub fn differentiate(expr: &ScalarExpr, order: usize) -> ScalarExpr {
    let mut e = expr.clone();
    for _ in 0..order {
        let mut memo = HashMap::new();
        e = d(&e, &mut memo);
    }
    e
}

fn d(e: &ScalarExpr, memo: &mut HashMap<usize, ScalarExpr>) -> ScalarExpr {
    if let Some(r) = memo.get(&e.id()) {
        return r.clone();
    }
    let r = match e.node() {
        Node::Const(_) => ScalarExpr::constant(0.0),
        Node::Var => ScalarExpr::constant(1.0),
        Node::Add(a, b) => d(a, memo).add(&d(b, memo)),
        Node::Sub(a, b) => d(a, memo).sub(&d(b, memo)),
        Node::Mul(a, b) => {
            let (da, db) = (d(a, memo), d(b, memo));
            da.mul(b).add(&a.mul(&db))
        }
        Node::Div(a, b) => {
            let (da, db) = (d(a, memo), d(b, memo));
            let first = da.div(b);
            let second = a.mul(&db).div(&b.powi(2));
            first.sub(&second)
        }
        Node::Neg(a) => d(a, memo).neg(),
        Node::PowI(a, n) => ScalarExpr::constant(*n as f64).mul(&a.powi(n - 1)).mul(&d(a, memo)),
        Node::PowF(a, p) => ScalarExpr::constant(*p).mul(&a.powf(p - 1.0)).mul(&d(a, memo)),
        Node::Exp(a) => e.mul(&d(a, memo)),
        Node::Log(a) => d(a, memo).div(a),
        Node::Tanh(a) => ScalarExpr::constant(1.0).sub(&e.powi(2)).mul(&d(a, memo)),
        Node::Sigmoid(a) => e.mul(&ScalarExpr::constant(1.0).sub(e)).mul(&d(a, memo)),
        Node::Compose(outer, inner) => {
            // the outer tree is differentiated in its own variable, so it gets a fresh memo
            let mut outer_memo = HashMap::new();
            let douter = d(outer, &mut outer_memo);
            douter.compose(inner).mul(&d(inner, memo))
        }
    };
    memo.insert(e.id(), r.clone());
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::named::*;

    #[test]
    fn chain_rule_through_compose() {
        let g = x().exp();
        let h = x().powi(2);
        let f = g.compose(&h);
        let df = differentiate(&f, 1);
        for &t in &[-1.3f64, 0.0, 0.4, 2.0] {
            let want = 2.0 * t * (t * t).exp();
            assert!((df.eval(t).unwrap() - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn constants_vanish() {
        assert!(differentiate(&c(3.0), 1).is_zero());
    }
}
