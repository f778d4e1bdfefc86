use neuronlab::expr::differentiate;
use neuronlab::expr::named::*;
use neuronlab::fourier::*;
use neuronlab::ScalarExpr;
use std::f64::consts::PI;

fn exp_abs() -> ScalarExpr {
    x().powi(2).powf(0.5).neg().exp()
}

#[test]
fn gaussian_transform_matches_closed_form() {
    let xi: Vec<f64> = (0..=40).map(|k| 0.25 * k as f64).collect();
    let r = fourier_transform(&gaussian(), &xi, &FtConfig::default()).unwrap();
    assert!((r.values[0].re - PI.sqrt()).abs() < 1e-12);
    for (k, v) in xi.iter().zip(&r.values) {
        assert!((v.re - gaussian_transform(*k)).abs() < 1e-8, "ξ = {k}");
        assert!(v.im.abs() < 1e-12);
    }
    assert_eq!(r.tail_bound, 0.0);
}

#[test]
fn sech_transform_matches_closed_form() {
    let r = fourier_transform(&sech(), &[0.0, 1.0, 2.5], &FtConfig::default()).unwrap();
    assert!((r.values[1].re - PI / (PI / 2.0).cosh()).abs() < 1e-6);
    for (k, v) in [0.0, 1.0, 2.5].iter().zip(&r.values) {
        assert!((v.re - sech_transform(*k)).abs() < 1e-10);
    }
    assert!(r.tail_bound > 0.0 && r.tail_bound < 1e-16);
}

#[test]
fn window_edge_must_decay() {
    let cfg = FtConfig { half_width: Some(5.0), ..FtConfig::default() };
    assert!(matches!(fourier_transform(&sech(), &[0.0], &cfg), Err(FourierError::InsufficientDecay { .. })));
}

#[test]
fn affine_argument_identity() {
    // FT of f(wx + b) is e^{ibξ/w} f̂(ξ/w) / |w|
    for (w, b) in [(2.0, 0.5), (-1.5, 0.3), (0.8, -1.0)] {
        let cfg = FtConfig { decay_rate: f64::min(f64::abs(w), 1.0), ..FtConfig::default() };
        let g = sech().affine_arg(w, b);
        for xi in [0.0, 0.7, 2.0] {
            let got = fourier_transform(&g, &[xi], &cfg).unwrap().values[0];
            let phase = num_complex::Complex64::from_polar(1.0, b * xi / w);
            let want = phase * sech_transform(xi / w) / f64::abs(w);
            assert!((got - want).norm() < 1e-6, "w={w} b={b} ξ={xi}: {got} vs {want}");
        }
    }
}

#[test]
fn plancherel_spot_checks() {
    let cfg = FtConfig::default();
    let (l, r) = plancherel(&gaussian(), 20.0, &cfg).unwrap();
    assert!((l - (PI / 2.0).sqrt()).abs() < 1e-10);
    assert!((l - r).abs() < 1e-6);
    let (l, r) = plancherel(&sech(), 30.0, &cfg).unwrap();
    assert!((l - 2.0).abs() < 1e-10);
    assert!((l - r).abs() < 1e-6);
}

#[test]
fn decay_test_examples() {
    let cfg = FtConfig::default();
    let g = ft_decay_test(&gaussian(), 1.0, 2.0, &default_ladder(), &cfg).unwrap();
    assert!(g.passed, "{g:?}");
    // closed-form ratio e^{−3ξ²/4}
    for (k, r) in g.xi.iter().zip(&g.ratios) {
        let want = (-0.75 * k * k).exp();
        assert!((r.unwrap() - want).abs() < 1e-6 * want.max(1e-3), "ξ = {k}");
    }
    let first_below = g.xi.iter().zip(&g.ratios).find(|(_, r)| r.unwrap() < 1e-6).unwrap().0;
    assert_eq!(*first_below, 4.5);

    let s = ft_decay_test(&sech(), 1.0, 3.0, &default_ladder(), &cfg).unwrap();
    assert!(s.passed, "{s:?}");

    let ladder: Vec<f64> = (1..=40).map(|k| 0.5 * k as f64).collect();
    let e = ft_decay_test(&exp_abs(), 1.0, 2.0, &ladder, &cfg).unwrap();
    assert!(!e.passed);
    assert!(e.monotone);
    assert!((e.final_ratio - 0.25).abs() < 0.01, "{}", e.final_ratio);
    assert!((e.final_ratio - 401.0 / 1601.0).abs() < 1e-6);

    assert!(matches!(ft_decay_test(&gaussian(), 2.0, 1.0, &ladder, &cfg), Err(FourierError::BadWeights { .. })));
}

#[test]
fn trig_sum_examples() {
    let cfg = TrigScanConfig::default();
    let r = trig_sum_lower(&[1.0], &[1.0], &cfg).unwrap();
    assert!((r.lower_bound - 1.0).abs() < 1e-12);
    let r = trig_sum_lower(&[1.0, -1.0], &[1.0, 2.0], &cfg).unwrap();
    assert!((r.lower_bound - 2.0).abs() < 1e-9);
    let r = trig_sum_lower(&[1.0, 1.0], &[1.0, 2f64.sqrt()], &cfg).unwrap();
    assert!(r.lower_bound >= 1.9);
    assert!(r.lower_bound <= 2.0);
    // rationally independent frequencies with mixed signs stay above the heuristic floor
    let a = [1.0, -0.5, 0.7];
    let r = trig_sum_lower(&a, &[1.0, 3f64.sqrt(), 5f64.sqrt()], &cfg).unwrap();
    assert!(r.lower_bound > 0.1 * a.iter().map(|v: &f64| v.abs()).sum::<f64>());
    assert!(trig_sum_lower(&[1.0, 1.0], &[1.0, 1.0], &cfg).is_err());
    assert!(trig_sum_lower(&[1.0], &[-1.0], &cfg).is_err());
}

#[test]
fn schwartz_flags() {
    let sp = differentiate(&sigmoid(), 1);
    let f = even_schwartz_check(&sp, 0, 20.0, 401, 1.0).unwrap();
    assert!(f.even && f.rapid_decay && f.nonvanishing, "{f:?}");
    assert!((f.orders[0].fitted_rate - 1.0).abs() < 0.01);

    let t = even_schwartz_check(&tanh(), 0, 20.0, 401, 1.0).unwrap();
    assert!(!t.even);

    let sw = differentiate(&swish(), 2);
    let f = even_schwartz_check(&sw, 0, 20.0, 401, 1.0).unwrap();
    assert!(f.even && f.rapid_decay, "{f:?}");
    // swish″ = f′(2 − x tanh(x/2)) changes sign
    assert!(!f.nonvanishing);

    let g = even_schwartz_check(&gaussian(), 3, 10.0, 201, 1.0).unwrap();
    assert!(g.rapid_decay);
    // odd derivatives of an even function are odd
    assert!(!g.even);
    assert!(g.orders[0].even && !g.orders[1].even && g.orders[2].even);
}

#[test]
fn dominant_block_argument_for_sigmoid_derivative() {
    // neurons σ′(w x + b) transform to e^{ibξ/w} f̂(ξ/w)/|w|; the block with
    // the larger w dominates because f̂(ξ/w_small) = o(f̂(ξ/w_large))
    let sp = differentiate(&sigmoid(), 1);
    let d = ft_decay_test(&sp, 1.0, 2.0, &default_ladder(), &FtConfig::default()).unwrap();
    assert!(d.passed, "{d:?}");
    // the dominant block's coefficient Σ a_k e^{i b_k ξ/w} stays bounded
    // below; a common shift of the frequencies leaves the modulus unchanged
    let (w, biases) = (2.0, [0.3, -1.1]);
    let freqs = biases.map(|b: f64| (b + 2.0) / w);
    let scan = trig_sum_lower(&[1.0, -2.0], &freqs, &TrigScanConfig::default()).unwrap();
    assert!((scan.lower_bound - 3.0).abs() < 1e-6);
}
