//! Minimal zero set membership, combinatorial independence predictors for
//! two- and three-layer neurons, and enumeration of the zero set as a union
//! of linear subspaces for small no-bias networks.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::expr::named::{c, x};
use crate::expr::ScalarExpr;
use crate::indep::OracleReport;
use crate::network::{forward, Activation, NetworkError, NetworkStructure, ParamVector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZeroSetError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("neurons {i} and {j} of layer {layer} agree on the coarse probe but differ after refinement")]
    InconclusiveGrouping { layer: usize, i: usize, j: usize },
    #[error("network needs at least two layers")]
    TooShallow,
    #[error("probe grid needs at least 64 points")]
    CoarseProbe,
    #[error("empty neuron family")]
    Empty,
    #[error("structure too large to enumerate: {0}")]
    TooLarge(String),
    #[error("subspace enumeration needs a network without bias")]
    NeedsNoBias,
}

/// Witness attached to a dependence (or independence) verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    DuplicatePair { i: usize, j: usize },
    ZeroWeightPair { i: usize, j: usize },
    /// A single neuron that is identically zero.
    ZeroNeuron { index: usize },
    ZeroSumGroup { members: Vec<usize>, sum: f64 },
    ConstantCancellation { residual: f64 },
    MinSingularValue { value: f64 },
    /// `v_i = sign · v_j` for the reduced (or extended) parameter vectors.
    ReducedVectorCollision { i: usize, j: usize, sign: i8 },
}

/// Predictor outcome, optionally joined with the numeric oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceVerdict {
    pub predicted: bool,
    /// False when the predictor is only a sufficient condition and it failed.
    pub conclusive: bool,
    pub oracle: Option<bool>,
    pub certificate: Option<Certificate>,
}

impl IndependenceVerdict {
    fn independent() -> Self {
        IndependenceVerdict { predicted: true, conclusive: true, oracle: None, certificate: None }
    }

    fn dependent(cert: Certificate) -> Self {
        IndependenceVerdict { predicted: false, conclusive: true, oracle: None, certificate: Some(cert) }
    }

    /// Record the oracle outcome; an independent verdict without a witness
    /// gets the oracle's smallest singular value.
    pub fn with_oracle(mut self, report: &OracleReport) -> Self {
        self.oracle = Some(report.independent);
        if self.certificate.is_none() {
            self.certificate = Some(Certificate::MinSingularValue { value: report.min_singular_value });
        }
        self
    }

    pub fn agrees(&self) -> Option<bool> {
        self.oracle.map(|o| o == self.predicted)
    }
}

/// Neurons grouped into blocks of equal non-constant functions plus a
/// trailing block of constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupingPattern {
    pub blocks: Vec<Vec<usize>>,
    pub constants: Vec<usize>,
}

impl GroupingPattern {
    /// Permutation listing block members first, constants last.
    pub fn permutation(&self) -> Vec<usize> {
        self.blocks.iter().flatten().chain(&self.constants).cloned().collect()
    }

    /// `n_1 < … < n_r`: cumulative block ends in the permuted order.
    pub fn breakpoints(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |acc, b| {
                *acc += b.len();
                Some(*acc)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeConfig {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    /// Relative tolerance for function equality and constancy.
    pub tol: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { lo: -2.0, hi: 2.0, points: 64, tol: 1e-9 }
    }
}

/// Probe points in `[lo, hi]^d`: a uniform grid for `d = 1`, a Kronecker
/// sequence otherwise.
pub fn probe_points(d: usize, lo: f64, hi: f64, n: usize) -> Vec<Vec<f64>> {
    if d == 1 {
        return crate::expr::uniform_grid(lo, hi, n).into_iter().map(|t| vec![t]).collect();
    }
    const PRIMES: [f64; 12] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0];
    (0..n)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let alpha = PRIMES[j % PRIMES.len()].sqrt() * (1 + j / PRIMES.len()) as f64;
                    lo + (hi - lo) * ((i as f64 + 0.5) * alpha).fract()
                })
                .collect()
        })
        .collect()
}

/// Values of every neuron of layers `L−2` and `L−1` on a probe set.
struct LayerSamples {
    inner: Vec<Vec<f64>>,
    outer: Vec<Vec<f64>>,
}

fn sample_layers<A: Activation + ?Sized>(sigma: &A, theta: &ParamVector, probes: &[Vec<f64>]) -> Result<LayerSamples, ZeroSetError> {
    let s = &theta.structure;
    let big_l = s.depth();
    let mut inner = vec![Vec::with_capacity(probes.len()); s.width(big_l - 2)];
    let mut outer = vec![Vec::with_capacity(probes.len()); s.width(big_l - 1)];
    for p in probes {
        let f = forward(sigma, theta, p)?;
        for (k, v) in f.layers[big_l - 2].iter().enumerate() {
            inner[k].push(*v);
        }
        for (k, v) in f.layers[big_l - 1].iter().enumerate() {
            outer[k].push(*v);
        }
    }
    Ok(LayerSamples { inner, outer })
}

fn scale_of(rows: &[Vec<f64>]) -> f64 {
    rows.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()))
}

fn is_constant(row: &[f64], eps: f64) -> bool {
    let (lo, hi) = row.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    hi - lo <= eps
}

fn is_equal(a: &[f64], b: &[f64], eps: f64) -> bool {
    a.iter().zip(b).all(|(u, v)| (u - v).abs() <= eps)
}

/// Constant flags and equality groups of one layer, decided on the coarse
/// probe and confirmed on the refined one.
fn classify(coarse: &[Vec<f64>], fine: &[Vec<f64>], tol: f64, layer: usize) -> Result<GroupingPattern, ZeroSetError> {
    let (ec, ef) = (tol * scale_of(coarse), tol * scale_of(fine));
    let mut constants = Vec::new();
    let mut rest = Vec::new();
    for k in 0..coarse.len() {
        if is_constant(&coarse[k], ec) {
            if !is_constant(&fine[k], ef) {
                return Err(ZeroSetError::InconclusiveGrouping { layer, i: k, j: k });
            }
            constants.push(k);
        } else {
            rest.push(k);
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for k in rest {
        match blocks.iter_mut().find(|b| is_equal(&coarse[b[0]], &coarse[k], ec)) {
            Some(b) => {
                if !is_equal(&fine[b[0]], &fine[k], ef) {
                    return Err(ZeroSetError::InconclusiveGrouping { layer, i: b[0], j: k });
                }
                b.push(k);
            }
            None => blocks.push(vec![k]),
        }
    }
    Ok(GroupingPattern { blocks, constants })
}

/// Outcome of the minimal-zero-set test, condition by condition.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroSetReport {
    pub member: bool,
    /// Every neuron of layer `L−2` is constant.
    pub inner_all_constant: bool,
    /// How `θ^{(L−1)}` breaks the distinctness / single-zero-block
    /// requirements, if it does.
    pub requirement_violation: Option<Certificate>,
    pub grouping: GroupingPattern,
    /// First failing zero-sum or cancellation condition on the output layer.
    pub output_failure: Option<Certificate>,
}

impl ZeroSetReport {
    /// Witness for the verdict: the zero-sum or cancellation evidence for
    /// members, the failing output condition otherwise.
    pub fn certificate(&self, theta: &ParamVector) -> Option<Certificate> {
        if !self.member {
            return self.output_failure.clone().or_else(|| self.requirement_violation.clone());
        }
        let a = theta.output_weights();
        match self.grouping.blocks.first() {
            Some(b) => Some(Certificate::ZeroSumGroup { members: b.clone(), sum: b.iter().map(|&t| a[t]).sum() }),
            None => Some(Certificate::ConstantCancellation { residual: 0.0 }),
        }
    }
}

/// Literal membership test for the minimal zero set.
///
/// Condition (b) (constant inner layer, or `θ^{(L−1)}` violating the
/// independence requirements) and condition (c) (zero sums over equal
/// neuron groups plus cancellation of the constant block) are both required.
pub fn in_minimal_zero_set<A: Activation + ?Sized>(
    sigma: &A,
    theta: &ParamVector,
    cfg: &ProbeConfig,
) -> Result<ZeroSetReport, ZeroSetError> {
    let s = &theta.structure;
    let big_l = s.depth();
    if big_l < 2 {
        return Err(ZeroSetError::TooShallow);
    }
    if cfg.points < 64 {
        return Err(ZeroSetError::CoarseProbe);
    }
    let coarse = sample_layers(sigma, theta, &probe_points(s.input_dim, cfg.lo, cfg.hi, cfg.points))?;
    let fine = sample_layers(sigma, theta, &probe_points(s.input_dim, cfg.lo, cfg.hi, 4 * cfg.points))?;

    // condition (b)
    let inner = classify(&coarse.inner, &fine.inner, cfg.tol, big_l - 2)?;
    let inner_all_constant = inner.blocks.is_empty();
    let nonconst: Vec<usize> = inner.blocks.iter().flatten().cloned().collect();
    let const_vals: Vec<(usize, f64)> = inner.constants.iter().map(|&k| (k, coarse.inner[k][0])).collect();
    let l1 = big_l - 1;
    let extended: Vec<Vec<f64>> = (0..s.width(l1))
        .map(|j| {
            let mut e: Vec<f64> = nonconst.iter().map(|&k| theta.weight(l1, j, k)).collect();
            e.push(const_vals.iter().map(|&(k, v)| theta.weight(l1, j, k) * v).sum::<f64>() + theta.bias(l1, j));
            e
        })
        .collect();
    let outer_scale = scale_of(&coarse.outer);
    let requirement_violation = thm1_violation(&extended, nonconst.len(), &coarse.outer, cfg.tol, outer_scale);

    // condition (c)
    let grouping = classify(&coarse.outer, &fine.outer, cfg.tol, l1)?;
    let a = theta.output_weights();
    let amax = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut output_failure = None;
    for b in &grouping.blocks {
        let sum: f64 = b.iter().map(|&t| a[t]).sum();
        if sum.abs() > cfg.tol * amax {
            output_failure = Some(Certificate::ZeroSumGroup { members: b.clone(), sum });
            break;
        }
    }
    if output_failure.is_none() {
        let residual: f64 = grouping.constants.iter().map(|&t| a[t] * coarse.outer[t][0]).sum::<f64>() + theta.output_bias();
        if residual.abs() > cfg.tol * amax * outer_scale {
            output_failure = Some(Certificate::ConstantCancellation { residual });
        }
    }
    let b_holds = inner_all_constant || requirement_violation.is_some();
    Ok(ZeroSetReport {
        member: b_holds && output_failure.is_none(),
        inner_all_constant,
        requirement_violation,
        grouping,
        output_failure,
    })
}

/// First violation of: extended vectors pairwise distinct, and at most one
/// zero weight block whose neuron is then not identically zero.
fn thm1_violation(extended: &[Vec<f64>], m: usize, outer: &[Vec<f64>], tol: f64, scale: f64) -> Option<Certificate> {
    let emax = extended.iter().flatten().fold(1.0f64, |a, v| a.max(v.abs()));
    for i in 0..extended.len() {
        for j in i + 1..extended.len() {
            if is_equal(&extended[i], &extended[j], tol * emax) {
                return Some(Certificate::DuplicatePair { i, j });
            }
        }
    }
    let zeros: Vec<usize> = (0..extended.len()).filter(|&j| extended[j][..m].iter().all(|v| v.abs() <= tol * emax)).collect();
    match zeros.as_slice() {
        [] => None,
        [j] => {
            if outer[*j].iter().all(|v| v.abs() <= tol * scale) {
                Some(Certificate::ZeroNeuron { index: *j })
            } else {
                None
            }
        }
        [i, j, ..] => Some(Certificate::ZeroWeightPair { i: *i, j: *j }),
    }
}

/// One two-layer neuron `σ(w·x + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct NeuronParams {
    pub w: Vec<f64>,
    #[serde(default)]
    pub b: f64,
}

impl NeuronParams {
    pub fn new(w: Vec<f64>, b: f64) -> Self {
        NeuronParams { w, b }
    }

    pub fn scalar(w: f64, b: f64) -> Self {
        NeuronParams { w: vec![w], b }
    }

    fn extended(&self) -> Vec<f64> {
        self.w.iter().cloned().chain([self.b]).collect()
    }

    fn weight_is_zero(&self) -> bool {
        self.w.iter().all(|v| *v == 0.0)
    }
}

/// Which two-layer independence criterion to apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TwoLayerKind {
    /// No bias, generic activation: independent iff the `w_k` are distinct.
    NobiasGeneric,
    /// Some derivative is a power of a hyper-exponentially growing function
    /// with ordered orientations: independent iff the `(w_k, b_k)` are
    /// distinct and at most one `w_k` vanishes.
    BiasA,
    /// Like `BiasA` with comparable growth at `±∞`: `(w_k, b_k) ± (w_j, b_j) ≠ 0`
    /// is sufficient only.
    BiasB,
    /// Even, non-vanishing Schwartz derivative: independent iff
    /// `(w_k, b_k) ± (w_j, b_j) ≠ 0` and, when the tested family does not
    /// vanish at 0, at most one `w_k = 0`.
    BiasC { nonzero_at_origin: bool },
}

const PARAM_TOL: f64 = 1e-12;

fn close(a: &[f64], b: &[f64], sign: f64) -> bool {
    let s = a.iter().chain(b).fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).all(|(u, v)| (u - sign * v).abs() <= PARAM_TOL * s)
}

/// Combinatorial half of the two-layer criteria.
pub fn predict_two_layer(kind: TwoLayerKind, neurons: &[NeuronParams]) -> Result<IndependenceVerdict, ZeroSetError> {
    if neurons.is_empty() {
        return Err(ZeroSetError::Empty);
    }
    let n = neurons.len();
    let zero_pair = || {
        let z: Vec<usize> = (0..n).filter(|&k| neurons[k].weight_is_zero()).collect();
        (z.len() >= 2).then(|| Certificate::ZeroWeightPair { i: z[0], j: z[1] })
    };
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&neurons[i], &neurons[j]);
            match kind {
                TwoLayerKind::NobiasGeneric => {
                    if close(&a.w, &b.w, 1.0) {
                        return Ok(IndependenceVerdict::dependent(Certificate::DuplicatePair { i, j }));
                    }
                }
                TwoLayerKind::BiasA => {
                    if close(&a.extended(), &b.extended(), 1.0) {
                        return Ok(IndependenceVerdict::dependent(Certificate::DuplicatePair { i, j }));
                    }
                }
                TwoLayerKind::BiasB | TwoLayerKind::BiasC { .. } => {
                    for sign in [1.0, -1.0] {
                        if close(&a.extended(), &b.extended(), sign) {
                            let mut v = IndependenceVerdict::dependent(Certificate::ReducedVectorCollision {
                                i,
                                j,
                                sign: sign as i8,
                            });
                            v.conclusive = !matches!(kind, TwoLayerKind::BiasB);
                            return Ok(v);
                        }
                    }
                }
            }
        }
    }
    let zero_rule = match kind {
        TwoLayerKind::BiasA => true,
        TwoLayerKind::BiasC { nonzero_at_origin } => nonzero_at_origin,
        _ => false,
    };
    if zero_rule {
        if let Some(cert) = zero_pair() {
            return Ok(IndependenceVerdict::dependent(cert));
        }
    }
    Ok(IndependenceVerdict::independent())
}

/// `σ(w·(t v) + b)` as expressions in `t`, i.e. the neurons restricted to
/// the line through the origin with direction `v`.
pub fn two_layer_neurons(sigma: &ScalarExpr, neurons: &[NeuronParams], v: &[f64]) -> Vec<ScalarExpr> {
    neurons.iter().map(|p| sigma.affine_arg(crate::indep::dot(&p.w, v), p.b)).collect()
}

/// First-layer rows grouped by `w_{k′} = ±w_k`, with the sign of each member
/// relative to the group's first row. Zero rows are left out.
pub fn collinear_groups(w1: &[Vec<f64>]) -> Vec<Vec<(usize, f64)>> {
    let norm = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>().sqrt();
    let mut groups: Vec<Vec<(usize, f64)>> = Vec::new();
    for (k, w) in w1.iter().enumerate() {
        let nk = norm(w);
        if nk == 0.0 {
            continue;
        }
        let found = groups.iter_mut().find_map(|g| {
            let r = &w1[g[0].0];
            let nr = norm(r);
            let cos = crate::indep::dot(w, r) / (nk * nr);
            ((nk - nr).abs() <= PARAM_TOL * nr && (cos.abs() - 1.0).abs() <= PARAM_TOL).then(|| (g, cos.signum()))
        });
        match found {
            Some((g, s)) => g.push((k, s)),
            None => groups.push(vec![(k, 1.0)]),
        }
    }
    groups
}

/// Reduced vectors `u_j` (one entry per collinear group).
pub fn reduced_vectors(w1: &[Vec<f64>], w2: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let groups = collinear_groups(w1);
    w2.iter()
        .map(|row| groups.iter().map(|g| g.iter().map(|&(k, s)| s * row[k]).sum()).collect())
        .collect()
}

/// Three-layer no-bias tanh neurons `tanh(Σ_k W2_{jk} tanh(w_k·x))`:
/// independent iff every reduced vector is nonzero and no two agree up to sign.
pub fn predict_three_layer_tanh(w1: &[Vec<f64>], w2: &[Vec<f64>]) -> Result<IndependenceVerdict, ZeroSetError> {
    if w2.is_empty() {
        return Err(ZeroSetError::Empty);
    }
    let u = reduced_vectors(w1, w2);
    for (j, v) in u.iter().enumerate() {
        let s = w2[j].iter().fold(1.0f64, |m, t| m.max(t.abs()));
        if v.iter().all(|t| t.abs() <= PARAM_TOL * s) {
            return Ok(IndependenceVerdict::dependent(Certificate::ZeroNeuron { index: j }));
        }
    }
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            for sign in [1.0, -1.0] {
                if close(&u[i], &u[j], sign) {
                    return Ok(IndependenceVerdict::dependent(Certificate::ReducedVectorCollision { i, j, sign: sign as i8 }));
                }
            }
        }
    }
    Ok(IndependenceVerdict::independent())
}

/// Three-layer tanh neurons along the line `x = t v`.
pub fn three_layer_neurons(w1: &[Vec<f64>], w2: &[Vec<f64>], v: &[f64]) -> Vec<ScalarExpr> {
    let hidden: Vec<ScalarExpr> = w1.iter().map(|w| x().scale(crate::indep::dot(w, v)).tanh()).collect();
    w2.iter()
        .map(|row| {
            let mut pre = c(0.0);
            for (wk, h) in row.iter().zip(&hidden) {
                pre = pre.add(&h.scale(*wk));
            }
            pre.tanh()
        })
        .collect()
}

/// `σ(wz + b)` and `σ(wz + b′)` for `σ = exp`: proportional for every `b, b′`.
pub fn exp_shift_pair(w: f64, b: f64, b2: f64) -> [ScalarExpr; 2] {
    let s = x().exp();
    [s.affine_arg(w, b), s.affine_arg(w, b2)]
}

/// `σ(wz − 1)` and `σ(−wz − 1)` for `σ(z) = tanh(z + 1)`: negatives of each other.
pub fn shifted_tanh_pair(w: f64) -> [ScalarExpr; 2] {
    let s = x().add(&c(1.0)).tanh();
    [s.affine_arg(w, -1.0), s.affine_arg(-w, -1.0)]
}

/// Three-layer no-bias neurons `σ(±w₁σ(w z) + w₂σ(0))` with `σ(z) = tanh(z + 1)`
/// and `w₂ = −1/tanh(1)`, which cancels the shift inside the outer `σ`.
pub fn shifted_tanh_three_layer(w1: f64, w: f64) -> [ScalarExpr; 2] {
    let s = x().add(&c(1.0)).tanh();
    let w2 = -1.0 / 1f64.tanh();
    let inner = s.affine_arg(w, 0.0);
    let shift = c(w2 * 1f64.tanh());
    let pre = |sign: f64| inner.scale(sign * w1).add(&shift);
    [s.compose(&pre(1.0)), s.compose(&pre(-1.0))]
}

/// One hidden layer's pattern: blocks of equal non-zero neurons plus a block
/// of neurons that vanish identically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerPattern {
    pub blocks: Vec<Vec<usize>>,
    pub zero: Vec<usize>,
}

/// Linear subspace `{θ : Aθ = 0}` of a no-bias parameter space.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroSubspace {
    pub patterns: Vec<LayerPattern>,
    pub equations: Vec<String>,
    /// Orthonormal basis of the row space of `A` (one row per vector).
    #[serde(skip)]
    pub row_basis: DMatrix<f64>,
    pub dim: usize,
}

impl ZeroSubspace {
    /// Euclidean distance from `θ` to the subspace.
    pub fn distance(&self, theta: &[f64]) -> f64 {
        if self.row_basis.nrows() == 0 {
            return 0.0;
        }
        (&self.row_basis * DVector::from_column_slice(theta)).norm()
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, theta: &[f64]) -> Vec<f64> {
        let t = DVector::from_column_slice(theta);
        if self.row_basis.nrows() == 0 {
            return theta.to_vec();
        }
        let r = self.row_basis.transpose() * (&self.row_basis * &t);
        (t - r).as_slice().to_vec()
    }

    /// Random point of the subspace: a standard Gaussian draw, projected.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.row_basis.ncols();
        let g: Vec<f64> = (0..n).map(|_| rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng)).collect();
        self.project(&g)
    }
}

/// All patterns of `m` neurons: a set partition with at most one block
/// marked as vanishing.
pub fn layer_patterns(m: usize) -> Vec<LayerPattern> {
    let mut out = Vec::new();
    for blocks in set_partitions(m) {
        out.push(LayerPattern { blocks: blocks.clone(), zero: vec![] });
        for z in 0..blocks.len() {
            let mut rest = blocks.clone();
            let zero = rest.remove(z);
            out.push(LayerPattern { blocks: rest, zero });
        }
    }
    out
}

fn set_partitions(m: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut labels = vec![0usize; m];
    fn rec(i: usize, max: usize, labels: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
        let m = labels.len();
        if i == m {
            let k = labels.iter().max().map_or(0, |v| v + 1);
            let mut blocks = vec![Vec::new(); k];
            for (idx, &l) in labels.iter().enumerate() {
                blocks[l].push(idx);
            }
            out.push(blocks);
            return;
        }
        for l in 0..=max {
            labels[i] = l;
            rec(i + 1, if l == max { max + 1 } else { max }, labels, out);
        }
    }
    if m == 0 {
        return vec![vec![]];
    }
    labels[0] = 0;
    rec(1, 1, &mut labels, &mut out);
    out
}

/// Upper bound on pattern combinations explored.
pub const MAX_PATTERN_COMBINATIONS: usize = 5_000;

/// The zero set of a small no-bias network (for activations with
/// `σ(0) = 0` whose neurons are independent exactly when their combined
/// weights are distinct and non-zero) as a union of maximal subspaces.
pub fn enumerate_zero_subspaces(structure: &NetworkStructure) -> Result<Vec<ZeroSubspace>, ZeroSetError> {
    structure.check()?;
    if structure.bias {
        return Err(ZeroSetError::NeedsNoBias);
    }
    let big_l = structure.depth();
    if big_l < 2 || big_l > 3 || (1..big_l).any(|l| structure.width(l) > 3) || structure.input_dim > 3 {
        return Err(ZeroSetError::TooLarge("need depth 2..=3, hidden widths <= 3, input dimension <= 3".into()));
    }
    let per_layer: Vec<Vec<LayerPattern>> = (1..big_l).map(|l| layer_patterns(structure.width(l))).collect();
    let combos: usize = per_layer.iter().map(|p| p.len()).product();
    if combos > MAX_PATTERN_COMBINATIONS {
        return Err(ZeroSetError::TooLarge(format!("{combos} pattern combinations")));
    }
    let n = structure.param_count();
    let mut candidates: Vec<ZeroSubspace> = Vec::new();
    let mut idx = vec![0usize; per_layer.len()];
    loop {
        let chosen: Vec<LayerPattern> = idx.iter().zip(&per_layer).map(|(&i, p)| p[i].clone()).collect();
        let (rows, equations) = pattern_constraints(structure, &chosen);
        let a = DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]);
        let basis = row_basis(&a);
        let dim = n - basis.nrows();
        candidates.push(ZeroSubspace { patterns: chosen, equations, row_basis: basis, dim });
        // odometer
        let mut l = 0;
        loop {
            if l == idx.len() {
                return Ok(maximal(candidates));
            }
            idx[l] += 1;
            if idx[l] < per_layer[l].len() {
                break;
            }
            idx[l] = 0;
            l += 1;
        }
    }
}

fn pattern_constraints(s: &NetworkStructure, pats: &[LayerPattern]) -> (Vec<Vec<f64>>, Vec<String>) {
    let n = s.param_count();
    let big_l = s.depth();
    let mut rows = Vec::new();
    let mut eqs = Vec::new();
    let widx = |l: usize, k: usize, j: usize| s.layer_offset(l) + k * s.width(l - 1) + j;
    for l in 1..big_l {
        let p = &pats[l - 1];
        // combined weight columns: input coordinates for l = 1, previous blocks otherwise
        let cols: Vec<Vec<usize>> =
            if l == 1 { (0..s.input_dim).map(|j| vec![j]).collect() } else { pats[l - 2].blocks.clone() };
        let combined = |k: usize, col: &Vec<usize>, sign: f64, row: &mut Vec<f64>| {
            for &j in col {
                row[widx(l, k, j)] += sign;
            }
        };
        for &k in &p.zero {
            for col in &cols {
                let mut row = vec![0.0; n];
                combined(k, col, 1.0, &mut row);
                rows.push(row);
            }
            eqs.push(format!("W{l}[{k}, {}] = 0", fmt_cols(&cols)));
        }
        for b in &p.blocks {
            for &k in &b[1..] {
                for col in &cols {
                    let mut row = vec![0.0; n];
                    combined(k, col, 1.0, &mut row);
                    combined(b[0], col, -1.0, &mut row);
                    rows.push(row);
                }
                eqs.push(format!("W{l}[{k}, {c}] = W{l}[{}, {c}]", b[0], c = fmt_cols(&cols)));
            }
        }
    }
    for b in &pats[big_l - 2].blocks {
        let mut row = vec![0.0; n];
        for &t in b {
            row[t] = 1.0;
        }
        rows.push(row);
        eqs.push(format!("{} = 0", b.iter().map(|t| format!("a[{t}]")).collect::<Vec<_>>().join(" + ")));
    }
    (rows, eqs)
}

fn fmt_cols(cols: &[Vec<usize>]) -> String {
    if cols.iter().all(|c| c.len() == 1) {
        return ":".into();
    }
    cols.iter()
        .map(|c| format!("Σ{{{}}}", c.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",")))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Orthonormal basis of the row space of `a` via SVD.
fn row_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return DMatrix::zeros(0, n);
    }
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.unwrap();
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > 1e-10 * top.max(1.0)).collect();
    DMatrix::from_fn(keep.len(), n, |r, c| vt[(keep[r], c)])
}

/// `S_i ⊆ S_j` iff the row space of `A_j` lies in that of `A_i`.
fn contained(small: &ZeroSubspace, big: &ZeroSubspace) -> bool {
    if big.row_basis.nrows() == 0 {
        return true;
    }
    if small.row_basis.nrows() == 0 {
        return false;
    }
    let proj = &big.row_basis * small.row_basis.transpose() * &small.row_basis;
    (&big.row_basis - proj).norm() < 1e-9
}

fn maximal(cands: Vec<ZeroSubspace>) -> Vec<ZeroSubspace> {
    let mut keep: Vec<ZeroSubspace> = Vec::new();
    for s in cands {
        if keep.iter().any(|k| contained(&s, k)) {
            continue;
        }
        keep.retain(|k| !contained(k, &s));
        keep.push(s);
    }
    keep
}
