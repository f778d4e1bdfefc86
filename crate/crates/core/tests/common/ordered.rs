//! Predicted versus numeric growth order of generalized neurons.

use neuronlab::expr::named::*;
use neuronlab::growth::*;
use neuronlab::ScalarExpr;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn neuron_exprs(sigma: &ScalarExpr, inner: &[ScalarExpr], rows: &[Vec<f64>], biases: &[f64], terms: &[NeuronTerm]) -> Vec<ScalarExpr> {
    terms.iter().map(|t| neuron_term_expr(sigma, inner, &rows[t.neuron], biases[t.neuron], t.part)).collect()
}

/// Numeric order of the predicted terms must be the prediction itself.
pub fn check_against_numeric(sigma: &ScalarExpr, inner: &[ScalarExpr], rows: &[Vec<f64>], biases: &[f64], terms: &[NeuronTerm], cfg: &GrowthConfig) -> Result<(), String> {
    let fs = neuron_exprs(sigma, inner, rows, biases, terms);
    // feed the terms in a scrambled order so the identity cannot pass by accident
    let n = fs.len();
    let scramble: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % n).collect();
    let mut seen = vec![false; n];
    let scramble: Vec<usize> = if scramble.iter().all(|&i| !std::mem::replace(&mut seen[i], true)) { scramble } else { (0..n).rev().collect() };
    let shuffled: Vec<ScalarExpr> = scramble.iter().map(|&i| fs[i].clone()).collect();
    let line = Curve::identity(0.0, cfg.t_max);
    let got = order_by_growth(&shuffled, &line, cfg).map_err(|e| format!("{e}"))?;
    let got: Vec<usize> = got.into_iter().map(|i| scramble[i]).collect();
    let want: Vec<usize> = (0..n).collect();
    if got == want {
        Ok(())
    } else {
        Err(format!("numeric {got:?} vs predicted identity for {terms:?}"))
    }
}

fn weight(rng: &mut ChaCha8Rng) -> f64 {
    let mag = 0.5 + 0.25 * rng.gen_range(0..7) as f64;
    if rng.gen_bool(0.5) {
        mag
    } else {
        -mag
    }
}

/// Random family of distinct nonzero rows over `m` inner functions.
pub fn draw(rng: &mut ChaCha8Rng, n: usize, m: usize, bias: bool) -> (Vec<Vec<f64>>, Vec<f64>) {
    loop {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let lead_zero = m > 1 && rng.gen_bool(0.25);
                (0..m).map(|k| if k == 0 && lead_zero { 0.0 } else { weight(rng) }).collect()
            })
            .collect();
        let biases: Vec<f64> = (0..n).map(|_| if bias { rng.gen_range(-1..=1) as f64 } else { 0.0 }).collect();
        let distinct = (0..n).all(|i| (i + 1..n).all(|j| rows[i] != rows[j] || biases[i] != biases[j]));
        if distinct {
            return (rows, biases);
        }
    }
}

pub fn cross_validate(variant: Variant, seed: u64, draws: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (sigma, inner, n, cfg) = match variant {
        Variant::I => (ordered_growth_activation_i(), vec![x().powi(2), x()], 4, GrowthConfig::with_t_max(1e4)),
        Variant::II => (ordered_growth_activation_ii(), vec![x().powi(2), x()], 4, GrowthConfig::with_t_max(1e4)),
        Variant::III => (ordered_growth_activation_ii(), vec![x().powi(2)], 2, GrowthConfig { eps_ratio: 0.1, ..GrowthConfig::with_t_max(5.0) }),
    };
    let mut agree = 0;
    for _ in 0..draws {
        let (rows, biases) = draw(&mut rng, n, inner.len(), variant != Variant::I);
        let order: Vec<usize> = (0..inner.len()).collect();
        let terms = predict_neuron_order(&order, &rows, Some(&biases), variant, Orientation::PositiveDominates).unwrap();
        match check_against_numeric(&sigma, &inner, &rows, &biases, &terms, &cfg) {
            Ok(()) => agree += 1,
            Err(e) => eprintln!("{variant:?}: rows {rows:?} biases {biases:?}: {e}"),
        }
    }
    agree
}
