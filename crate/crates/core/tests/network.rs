use neuronlab::expr::named::*;
use neuronlab::network::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_theta(s: &NetworkStructure, rng: &mut ChaCha8Rng, scale: f64) -> ParamVector {
    let v = (0..s.param_count()).map(|_| rng.gen_range(-scale..scale)).collect();
    ParamVector::new(s.clone(), v).unwrap()
}

#[test]
fn parameter_count_and_layout() {
    let s = NetworkStructure::new(2, vec![3, 2, 1], true).unwrap();
    assert_eq!(s.param_count(), 3 * 3 + 2 * 4 + 3);
    let nb = NetworkStructure::new(2, vec![3, 2, 1], false).unwrap();
    assert_eq!(nb.param_count(), 6 + 6 + 2);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let th = random_theta(&s, &mut rng, 1.0);
    let (layers, a, b) = th.to_layers();
    let back = ParamVector::from_layers(s.clone(), &layers, &a, b).unwrap();
    assert_eq!(back, th);
    // output block comes first
    assert_eq!(th.output_weights(), &th.values[..2]);
    assert_eq!(th.output_bias(), th.values[2]);
}

#[test]
fn rejects_bad_shapes() {
    assert!(NetworkStructure::new(1, vec![2, 2], true).is_err());
    assert!(NetworkStructure::new(1, vec![0, 1], true).is_err());
    let s = NetworkStructure::two_layer(1, 2, true);
    assert!(ParamVector::new(s, vec![0.0; 3]).is_err());
}

#[test]
fn forward_examples() {
    let s = NetworkStructure::two_layer(1, 1, true);
    let t = tanh().compile();
    let zero = ParamVector::zeros(s.clone());
    assert_eq!(network_value(&t, &zero, &[0.7]).unwrap(), 0.0);
    // θ = (a, b, w, b1)
    let th = ParamVector::new(s, vec![1.0, 0.0, 1.0, 0.0]).unwrap();
    let v = network_value(&t, &th, &[1.0]).unwrap();
    assert!((v - 0.7615941559557649).abs() < 1e-15);
}

#[test]
fn expression_form_matches_forward() {
    let s = NetworkStructure::new(1, vec![3, 2, 1], true).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let th = random_theta(&s, &mut rng, 1.0);
    let sig = sigmoid();
    let e = network_expr(&sig, &th).unwrap();
    let t = sig.compile();
    for &xv in &[-1.0, 0.0, 0.3, 2.0] {
        let a = e.eval(xv).unwrap();
        let b = network_value(&t, &th, &[xv]).unwrap();
        assert!((a - b).abs() < 1e-13, "{a} vs {b}");
    }
}

#[test]
fn no_bias_origin_is_fixed() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sigmas = [tanh().compile(), centered(&double_exp_activation()).unwrap().compile()];
    for _ in 0..20 {
        let s = NetworkStructure::new(2, vec![3, 2, 1], false).unwrap();
        let th = random_theta(&s, &mut rng, 0.5);
        for sig in &sigmas {
            let f = forward(sig, &th, &[0.0, 0.0]).unwrap();
            assert_eq!(f.value, 0.0);
            assert!(f.layers.iter().flatten().all(|v| *v == 0.0));
        }
    }
}

#[test]
fn split_one_neuron_in_half() {
    let small = NetworkStructure::two_layer(1, 1, false);
    let big = NetworkStructure::two_layer(1, 2, false);
    let map = embed_params(&small, &big, &[vec![0, 0]], &[vec![0.5, 0.5]]).unwrap();
    let th = ParamVector::new(small, vec![1.7, -0.4]).unwrap();
    let big_th = map.apply(&th).unwrap();
    assert_eq!(big_th.values, vec![0.85, 0.85, -0.4, -0.4]);
    let t = tanh().compile();
    for &xv in &[-2.0, 0.5, 3.0] {
        let a = network_value(&t, &big_th, &[xv]).unwrap();
        let b = network_value(&t, &th, &[xv]).unwrap();
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn identity_embedding_is_identity() {
    let s = NetworkStructure::new(2, vec![2, 3, 1], true).unwrap();
    let map = embed_params(&s, &s, &[vec![0, 1], vec![0, 1, 2]], &[vec![1.0; 2], vec![1.0; 3]]).unwrap();
    let n = s.param_count();
    assert_eq!(map.matrix, nalgebra::DMatrix::identity(n, n));
}

#[test]
fn embedding_errors() {
    let small = NetworkStructure::two_layer(1, 2, true);
    let big = NetworkStructure::two_layer(1, 3, true);
    let miss = embed_params(&small, &big, &[vec![0, 0, 0]], &[vec![0.2, 0.3, 0.5]]);
    assert!(matches!(miss, Err(NetworkError::Embedding(_))));
    let bad_split = embed_params(&small, &big, &[vec![0, 1, 1]], &[vec![1.0, 0.5, 0.6]]);
    assert!(matches!(bad_split, Err(NetworkError::Embedding(_))));
    let negative = embed_params(&small, &big, &[vec![0, 1, 1]], &[vec![1.0, 1.5, -0.5]]);
    assert!(matches!(negative, Err(NetworkError::Embedding(_))));
}

#[test]
fn embedding_preserves_function_for_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sigmas = [tanh().compile(), sigmoid().compile(), exp_square().compile()];
    for _ in 0..10 {
        let depth = rng.gen_range(2..=4);
        let d = rng.gen_range(1..=3);
        let bias = rng.gen_bool(0.5);
        let big_w: Vec<usize> = (1..depth).map(|_| rng.gen_range(1..=4)).chain([1]).collect();
        let small_w: Vec<usize> = big_w.iter().map(|&m| if m == 1 { 1 } else { rng.gen_range(1..=m) }).collect();
        let big = NetworkStructure::new(d, big_w.clone(), bias).unwrap();
        let small = NetworkStructure::new(d, small_w.clone(), bias).unwrap();
        let mut asg = Vec::new();
        let mut split = Vec::new();
        for l in 0..depth - 1 {
            let (ms, mb) = (small_w[l], big_w[l]);
            let a: Vec<usize> = (0..mb).map(|k| if k < ms { k } else { rng.gen_range(0..ms) }).collect();
            let raw: Vec<f64> = (0..mb).map(|_| rng.gen_range(0.1..1.0)).collect();
            let mut sums = vec![0.0; ms];
            for (k, &t) in a.iter().enumerate() {
                sums[t] += raw[k];
            }
            split.push(a.iter().enumerate().map(|(k, &t)| raw[k] / sums[t]).collect::<Vec<_>>());
            asg.push(a);
        }
        let map = embed_params(&small, &big, &asg, &split).unwrap();
        assert_eq!(map.rank, small.param_count());
        let th = random_theta(&small, &mut rng, 0.8);
        let big_th = map.apply(&th).unwrap();
        for sig in &sigmas {
            for _ in 0..5 {
                let xv: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let a = network_value(sig, &big_th, &xv).unwrap();
                let b = network_value(sig, &th, &xv).unwrap();
                assert!((a - b).abs() < 1e-12 * b.abs().max(1.0), "{a} vs {b}");
            }
        }
    }
}

#[test]
fn leading_order_examples() {
    match leading_order_at_zero_fn(f64::sin, 12, 1e-8).unwrap() {
        LeadingOrder::Term { order, coefficient } => {
            assert_eq!(order, 1);
            assert!((coefficient - 1.0).abs() < 1e-6);
        }
        other => panic!("{other:?}"),
    }
    let f = x().scale(2.0).tanh() - tanh().scale(2.0);
    match leading_order_at_zero(&f, 12, 1e-10).unwrap() {
        LeadingOrder::Term { order, coefficient } => {
            assert_eq!(order, 3);
            assert!((coefficient + 2.0).abs() < 1e-12);
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(leading_order_at_zero(&c(0.0), 12, 1e-10).unwrap(), LeadingOrder::ZeroToOrder(12));
    assert_eq!(leading_order_at_zero_fn(|_| 0.0, 6, 1e-10).unwrap(), LeadingOrder::ZeroToOrder(6));
}

#[test]
fn leading_order_routes_agree() {
    let f = x().scale(2.0).tanh() - tanh().scale(2.0);
    let t = f.compile();
    match leading_order_at_zero_fn(|v| t.eval(v).unwrap(), 5, 1e-6).unwrap() {
        LeadingOrder::Term { order, coefficient } => {
            assert_eq!(order, 3);
            assert!((coefficient + 2.0).abs() < 1e-4, "{coefficient}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn centered_activations_vanish_at_zero() {
    assert_eq!(centered(&double_exp_activation()).unwrap().eval(0.0).unwrap(), 0.0);
    let t = cored_activation(&tanh()).unwrap();
    for &z in &[-1.3, -0.5, 0.4, 1.3] {
        assert!((t.eval(z).unwrap() - z.tanh()).abs() < 1e-12, "{z}");
    }
    let s = zero_set_activation().unwrap();
    assert_eq!(s.eval(0.0).unwrap(), 0.0);
    for &z in &[-1.3, -0.5, 0.4, 1.3] {
        assert!((s.eval(z).unwrap() - z.exp_m1()).abs() < 1e-12, "{z}");
    }
    // exp-tower growth beyond the guard
    let lm = s.eval_log_domain(3.0).unwrap().log_mag;
    assert!((lm - 243f64.exp()).abs() < 1e-9 * 243f64.exp());
    let lm = s.eval_log_domain(-3.0).unwrap().log_mag;
    assert!((lm - 27f64.exp()).abs() < 1e-9 * 27f64.exp());
}
