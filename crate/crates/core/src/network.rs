//! Fully-connected networks: parameter layout, forward evaluation, neuron
//! splitting embeddings, and leading-order behaviour at the origin.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bump::{build_bump, BumpError, BumpSpec};
use crate::expr::named::{c, exp_square, x};
use crate::expr::{Compiled, EvalError, ScalarExpr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("activation failed in layer {layer}: {source}")]
    Eval { layer: usize, source: EvalError },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid embedding: {0}")]
    Embedding(String),
    #[error("embedding map has rank {rank} < {cols}")]
    RankDeficient { rank: usize, cols: usize },
}

/// Input dimension, widths `m_1..m_L` (with `m_L = 1`) and bias flag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkStructure {
    pub input_dim: usize,
    pub widths: Vec<usize>,
    pub bias: bool,
}

impl NetworkStructure {
    pub fn new(input_dim: usize, widths: Vec<usize>, bias: bool) -> Result<Self, NetworkError> {
        let s = NetworkStructure { input_dim, widths, bias };
        s.check()?;
        Ok(s)
    }

    /// Two-layer net `Σ a_k σ(w_k·x + b_k) (+ b)`.
    pub fn two_layer(input_dim: usize, hidden: usize, bias: bool) -> Self {
        NetworkStructure { input_dim, widths: vec![hidden, 1], bias }
    }

    pub fn check(&self) -> Result<(), NetworkError> {
        if self.input_dim == 0 || self.widths.is_empty() || self.widths.contains(&0) {
            return Err(NetworkError::Shape("all widths must be at least 1".into()));
        }
        if *self.widths.last().unwrap() != 1 {
            return Err(NetworkError::Shape("output width m_L must be 1".into()));
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.widths.len()
    }

    /// `m_l`, with `m_0 = d`.
    pub fn width(&self, l: usize) -> usize {
        if l == 0 {
            self.input_dim
        } else {
            self.widths[l - 1]
        }
    }

    fn bias_count(&self, l: usize) -> usize {
        if self.bias {
            if l == self.depth() {
                1
            } else {
                self.width(l)
            }
        } else {
            0
        }
    }

    /// Parameters in layer `l`; the output layer has `m_{L−1}` weights.
    pub fn layer_len(&self, l: usize) -> usize {
        self.width(l) * self.width(l - 1) + self.bias_count(l)
    }

    pub fn param_count(&self) -> usize {
        (1..=self.depth()).map(|l| self.layer_len(l)).sum()
    }

    /// Offset of layer `l` in `θ = (θ^{(L)}, …, θ^{(1)})`.
    pub fn layer_offset(&self, l: usize) -> usize {
        (l + 1..=self.depth()).map(|k| self.layer_len(k)).sum()
    }
}

/// Weights (row-major, `m_l × m_{l−1}`) and biases of one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

/// Flat parameter vector laid out as `θ = (θ^{(L)}, …, θ^{(1)})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub structure: NetworkStructure,
    pub values: Vec<f64>,
}

impl ParamVector {
    pub fn new(structure: NetworkStructure, values: Vec<f64>) -> Result<Self, NetworkError> {
        structure.check()?;
        if values.len() != structure.param_count() {
            return Err(NetworkError::Shape(format!(
                "expected {} parameters, got {}",
                structure.param_count(),
                values.len()
            )));
        }
        Ok(ParamVector { structure, values })
    }

    pub fn zeros(structure: NetworkStructure) -> Self {
        let n = structure.param_count();
        ParamVector { structure, values: vec![0.0; n] }
    }

    /// Assemble from per-layer views; `layers[l−1]` is layer `l < L`.
    pub fn from_layers(
        structure: NetworkStructure,
        layers: &[LayerParams],
        output_weights: &[f64],
        output_bias: f64,
    ) -> Result<Self, NetworkError> {
        structure.check()?;
        let big_l = structure.depth();
        if layers.len() != big_l - 1 || output_weights.len() != structure.width(big_l - 1) {
            return Err(NetworkError::Shape("layer count or output width mismatch".into()));
        }
        let mut values = output_weights.to_vec();
        if structure.bias {
            values.push(output_bias);
        }
        for l in (1..big_l).rev() {
            let p = &layers[l - 1];
            if p.weights.len() != structure.width(l) * structure.width(l - 1) || p.biases.len() != structure.bias_count(l) {
                return Err(NetworkError::Shape(format!("layer {l} has the wrong size")));
            }
            values.extend_from_slice(&p.weights);
            values.extend_from_slice(&p.biases);
        }
        ParamVector::new(structure, values)
    }

    pub fn to_layers(&self) -> (Vec<LayerParams>, Vec<f64>, f64) {
        let layers = (1..self.structure.depth())
            .map(|l| LayerParams { weights: self.weights(l).to_vec(), biases: self.biases(l).to_vec() })
            .collect();
        (layers, self.output_weights().to_vec(), self.output_bias())
    }

    pub fn output_weights(&self) -> &[f64] {
        let m = self.structure.width(self.structure.depth() - 1);
        &self.values[..m]
    }

    pub fn output_bias(&self) -> f64 {
        let m = self.structure.width(self.structure.depth() - 1);
        if self.structure.bias {
            self.values[m]
        } else {
            0.0
        }
    }

    /// Hidden-layer weights, row-major `m_l × m_{l−1}`.
    pub fn weights(&self, l: usize) -> &[f64] {
        let off = self.structure.layer_offset(l);
        &self.values[off..off + self.structure.width(l) * self.structure.width(l - 1)]
    }

    pub fn weights_mut(&mut self, l: usize) -> &mut [f64] {
        let off = self.structure.layer_offset(l);
        let n = self.structure.width(l) * self.structure.width(l - 1);
        &mut self.values[off..off + n]
    }

    /// Hidden-layer biases (empty without bias).
    pub fn biases(&self, l: usize) -> &[f64] {
        let off = self.structure.layer_offset(l) + self.structure.width(l) * self.structure.width(l - 1);
        &self.values[off..off + self.structure.bias_count(l)]
    }

    pub fn weight(&self, l: usize, k: usize, j: usize) -> f64 {
        self.weights(l)[k * self.structure.width(l - 1) + j]
    }

    pub fn bias(&self, l: usize, k: usize) -> f64 {
        if self.structure.bias {
            self.biases(l)[k]
        } else {
            0.0
        }
    }

    /// Incoming weight row of neuron `k` in layer `l`.
    pub fn row(&self, l: usize, k: usize) -> &[f64] {
        let m = self.structure.width(l - 1);
        &self.weights(l)[k * m..(k + 1) * m]
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// A scalar activation applied inside the network.
pub trait Activation: Sync {
    fn apply(&self, z: f64) -> Result<f64, EvalError>;
}

impl Activation for Compiled {
    fn apply(&self, z: f64) -> Result<f64, EvalError> {
        self.eval(z)
    }
}

/// Any plain function as an activation; non-finite outputs become overflow.
pub struct FnActivation<F>(pub F);

impl<F: Fn(f64) -> f64 + Sync> Activation for FnActivation<F> {
    fn apply(&self, z: f64) -> Result<f64, EvalError> {
        let v = (self.0)(z);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::Overflow { x: z })
        }
    }
}

/// Output value and every layer's outputs (`layers[0]` is the input).
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub value: f64,
    pub layers: Vec<Vec<f64>>,
}

pub fn forward<A: Activation + ?Sized>(sigma: &A, theta: &ParamVector, input: &[f64]) -> Result<Forward, NetworkError> {
    let s = &theta.structure;
    if input.len() != s.input_dim {
        return Err(NetworkError::Shape(format!("input has length {}, expected {}", input.len(), s.input_dim)));
    }
    let big_l = s.depth();
    let mut layers = vec![input.to_vec()];
    for l in 1..big_l {
        let prev = &layers[l - 1];
        let mut out = Vec::with_capacity(s.width(l));
        for k in 0..s.width(l) {
            let z: f64 = theta.row(l, k).iter().zip(prev).map(|(w, h)| w * h).sum::<f64>() + theta.bias(l, k);
            out.push(sigma.apply(z).map_err(|source| NetworkError::Eval { layer: l, source })?);
        }
        layers.push(out);
    }
    let last = &layers[big_l - 1];
    let value = theta.output_weights().iter().zip(last).map(|(a, h)| a * h).sum::<f64>() + theta.output_bias();
    Ok(Forward { value, layers })
}

/// `H(θ, x)` only.
pub fn network_value<A: Activation + ?Sized>(sigma: &A, theta: &ParamVector, input: &[f64]) -> Result<f64, NetworkError> {
    forward(sigma, theta, input).map(|f| f.value)
}

/// Neurons of layer `l` as expressions in `x` (input dimension 1 only).
/// Layer 0 is `[x]`; layer `L` is the network output.
pub fn layer_exprs(sigma: &ScalarExpr, theta: &ParamVector, l: usize) -> Result<Vec<ScalarExpr>, NetworkError> {
    let s = &theta.structure;
    if s.input_dim != 1 {
        return Err(NetworkError::Shape("expression form needs input dimension 1".into()));
    }
    if l > s.depth() {
        return Err(NetworkError::Shape(format!("layer {l} exceeds depth {}", s.depth())));
    }
    let mut cur = vec![x()];
    for k in 1..=l.min(s.depth() - 1) {
        cur = (0..s.width(k))
            .map(|j| {
                let pre = affine_sum(theta.row(k, j), &cur, theta.bias(k, j));
                sigma.compose(&pre)
            })
            .collect();
    }
    if l == s.depth() {
        cur = vec![affine_sum(theta.output_weights(), &cur, theta.output_bias())];
    }
    Ok(cur)
}

/// The whole network as an expression in `x` (input dimension 1).
pub fn network_expr(sigma: &ScalarExpr, theta: &ParamVector) -> Result<ScalarExpr, NetworkError> {
    Ok(layer_exprs(sigma, theta, theta.structure.depth())?.remove(0))
}

fn affine_sum(weights: &[f64], inputs: &[ScalarExpr], bias: f64) -> ScalarExpr {
    let mut acc = c(bias);
    for (w, h) in weights.iter().zip(inputs) {
        acc = acc.add(&h.scale(*w));
    }
    acc
}

/// Linear parameter map of a neuron-splitting embedding together with its rank.
#[derive(Debug, Clone)]
pub struct EmbeddingMap {
    pub small: NetworkStructure,
    pub big: NetworkStructure,
    /// `big.param_count() × small.param_count()`.
    pub matrix: DMatrix<f64>,
    pub rank: usize,
}

impl EmbeddingMap {
    pub fn apply(&self, theta: &ParamVector) -> Result<ParamVector, NetworkError> {
        if theta.structure != self.small {
            return Err(NetworkError::Shape("parameter vector does not match the small structure".into()));
        }
        let v = &self.matrix * nalgebra::DVector::from_column_slice(&theta.values);
        ParamVector::new(self.big.clone(), v.as_slice().to_vec())
    }
}

/// Embed a narrow network into a wider one by splitting neurons.
///
/// `assignment[l−1][k]` names the small neuron that big neuron `k` of hidden
/// layer `l` copies; `split[l−1][k] ≥ 0` is the share of that neuron's
/// outgoing weights it carries, the shares summing to 1 over each fiber.
pub fn embed_params(
    small: &NetworkStructure,
    big: &NetworkStructure,
    assignment: &[Vec<usize>],
    split: &[Vec<f64>],
) -> Result<EmbeddingMap, NetworkError> {
    small.check()?;
    big.check()?;
    if small.input_dim != big.input_dim || small.depth() != big.depth() || small.bias != big.bias {
        return Err(NetworkError::Embedding("structures differ in input dimension, depth or bias".into()));
    }
    let big_l = big.depth();
    if assignment.len() != big_l - 1 || split.len() != big_l - 1 {
        return Err(NetworkError::Embedding("need one assignment and split per hidden layer".into()));
    }
    for l in 1..big_l {
        let (ms, mb) = (small.width(l), big.width(l));
        let (asg, sp) = (&assignment[l - 1], &split[l - 1]);
        if ms > mb || asg.len() != mb || sp.len() != mb {
            return Err(NetworkError::Embedding(format!("layer {l}: widths or map lengths inconsistent")));
        }
        let mut fiber = vec![0.0; ms];
        let mut hit = vec![false; ms];
        for (&t, &a) in asg.iter().zip(sp) {
            if t >= ms {
                return Err(NetworkError::Embedding(format!("layer {l}: target {t} out of range")));
            }
            if !(a >= 0.0 && a.is_finite()) {
                return Err(NetworkError::Embedding(format!("layer {l}: split coefficient {a} is not nonnegative")));
            }
            hit[t] = true;
            fiber[t] += a;
        }
        if let Some(t) = hit.iter().position(|h| !h) {
            return Err(NetworkError::Embedding(format!("layer {l}: assignment misses neuron {t}")));
        }
        if let Some(t) = fiber.iter().position(|s| (s - 1.0).abs() > 1e-12) {
            return Err(NetworkError::Embedding(format!("layer {l}: split over fiber {t} sums to {}", fiber[t])));
        }
    }

    let mut m = DMatrix::zeros(big.param_count(), small.param_count());
    // output layer
    let top = big_l - 1;
    for k in 0..big.width(top) {
        m[(k, assignment[top - 1][k])] = split[top - 1][k];
    }
    if big.bias {
        m[(big.width(top), small.width(top))] = 1.0;
    }
    for l in 1..big_l {
        let (ob, os) = (big.layer_offset(l), small.layer_offset(l));
        let (inb, ins) = (big.width(l - 1), small.width(l - 1));
        for k in 0..big.width(l) {
            let sk = assignment[l - 1][k];
            for j in 0..inb {
                let (sj, share) = if l == 1 { (j, 1.0) } else { (assignment[l - 2][j], split[l - 2][j]) };
                m[(ob + k * inb + j, os + sk * ins + sj)] = share;
            }
            if big.bias {
                m[(ob + big.width(l) * inb + k, os + small.width(l) * ins + sk)] = 1.0;
            }
        }
    }
    let rank = numeric_rank(&m);
    if rank < small.param_count() {
        return Err(NetworkError::RankDeficient { rank, cols: small.param_count() });
    }
    Ok(EmbeddingMap { small: small.clone(), big: big.clone(), matrix: m, rank })
}

/// Rank from singular values above `1e−10 · σ_max`.
pub fn numeric_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-10 * top).count()
}

/// First non-negligible Taylor coefficient at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LeadingOrder {
    /// `f(x) ∼ coefficient · x^order`.
    Term { order: usize, coefficient: f64 },
    /// Every coefficient up to this order is below tolerance.
    ZeroToOrder(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum LeadingOrderError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("finite differences cannot resolve order {order}: noise {noise} exceeds tolerance")]
    Unresolved { order: usize, noise: f64 },
}

/// Expression trees past this many nodes switch to Richardson differences.
pub const SYMBOLIC_NODE_LIMIT: usize = 100_000;

/// Smallest `s ≤ s_max` with `|f^{(s)}(0)/s!| > tol`.
pub fn leading_order_at_zero(f: &ScalarExpr, s_max: usize, tol: f64) -> Result<LeadingOrder, LeadingOrderError> {
    let mut cur = f.clone();
    let mut fact = 1.0;
    for s in 0..=s_max {
        if s > 0 {
            fact *= s as f64;
        }
        if cur.node_count() > SYMBOLIC_NODE_LIMIT {
            let tape = f.compile();
            return richardson_from(|t| tape.eval(t), s, s_max, tol);
        }
        let cs = cur.eval(0.0)? / fact;
        if cs.abs() > tol {
            return Ok(LeadingOrder::Term { order: s, coefficient: cs });
        }
        if s < s_max {
            cur = cur.differentiate(1);
        }
    }
    Ok(LeadingOrder::ZeroToOrder(s_max))
}

/// [`leading_order_at_zero`] for a black-box function via Richardson-extrapolated
/// central differences.
pub fn leading_order_at_zero_fn<F: Fn(f64) -> f64>(f: F, s_max: usize, tol: f64) -> Result<LeadingOrder, LeadingOrderError> {
    richardson_from(
        |t| {
            let v = f(t);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(EvalError::Overflow { x: t })
            }
        },
        0,
        s_max,
        tol,
    )
}

fn richardson_from<F: Fn(f64) -> Result<f64, EvalError>>(
    f: F,
    start: usize,
    s_max: usize,
    tol: f64,
) -> Result<LeadingOrder, LeadingOrderError> {
    const H: f64 = 0.1;
    let mut fmax = 0.0f64;
    for i in -16..=16 {
        fmax = fmax.max(f(i as f64 * H / 16.0)?.abs());
    }
    for s in start..=s_max {
        let fact: f64 = (1..=s).map(|k| k as f64).product();
        let d = |h: f64| -> Result<f64, EvalError> {
            let mut acc = 0.0;
            let mut binom = 1.0;
            for i in 0..=s {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * binom * f((s as f64 / 2.0 - i as f64) * h)?;
                binom = binom * (s - i) as f64 / (i + 1) as f64;
            }
            Ok(acc / h.powi(s as i32))
        };
        let (d1, d2, d4) = (d(H)?, d(H / 2.0)?, d(H / 4.0)?);
        let r1 = (4.0 * d2 - d1) / 3.0;
        let r2 = (4.0 * d4 - d2) / 3.0;
        let cs = (16.0 * r2 - r1) / 15.0 / fact;
        let noise = 4.0 * f64::EPSILON * fmax.max(f64::MIN_POSITIVE) * 2f64.powi(s as i32) * (4.0 / H).powi(s as i32) / fact;
        if cs.abs() > tol.max(noise) {
            return Ok(LeadingOrder::Term { order: s, coefficient: cs });
        }
        if noise > tol {
            return Err(LeadingOrderError::Unresolved { order: s, noise });
        }
    }
    Ok(LeadingOrder::ZeroToOrder(s_max))
}

/// `exp(e^{z⁵}) + exp(e^{−z³})`: grows like an exp-tower on both sides with
/// distinct odd exponents.
pub fn double_exp_activation() -> ScalarExpr {
    x().powi(5).exp().exp() + x().powi(3).neg().exp().exp()
}

/// `σ − σ(0)`, so that the result vanishes at the origin.
pub fn centered(sigma: &ScalarExpr) -> Result<ScalarExpr, EvalError> {
    let s0 = sigma.eval(0.0)?;
    Ok(sigma.sub(&c(s0)))
}

/// `centered(ξ·core + (1 − ξ)·double_exp)` with a bump `ξ` equal to 1 on
/// `[−2, 2]` and vanishing outside `[−2.3, 2.3]`.
///
/// The bare centered double-exp activation is flat to third order at 0,
/// which makes deep networks numerically invisible near the origin. The
/// core sets the local behaviour; the growth at infinity is unchanged.
/// Keep pre-activations within `[−1.3, 1.3]`, where the double-exp part
/// is finite and the blend equals the core to double precision.
pub fn cored_activation(core: &ScalarExpr) -> Result<ScalarExpr, BumpError> {
    let spec = BumpSpec::sub_tangent(exp_square(), 0.1, (-2.0, 2.0), (-2.3, 2.3), 12)?;
    let xi = build_bump(&spec)?;
    let blend = crate::blend::blend_activations(core, &double_exp_activation(), xi.expr());
    Ok(centered(&blend)?)
}

/// [`cored_activation`] with core `e^z − 1`: vanishes at 0 with slope 1 and
/// has no odd or even symmetry that would add zero-set components.
pub fn zero_set_activation() -> Result<ScalarExpr, BumpError> {
    cored_activation(&(x().exp() - 1.0))
}
