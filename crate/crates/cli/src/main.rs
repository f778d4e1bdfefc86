mod output;
mod specs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use neuronlab::blend::{blend_activations, build_tanh_approx, sup_distance_to_tanh, tanh_approx_bumps, TanhApproxConfig};
use neuronlab::bump::{build_bump, solve_tangency, verify_bump, Bump, BumpSpec, VerifyConfig};
use neuronlab::complexcurves::{blowup_curve, curve_decay_profile, PoleLattice, Side};
use neuronlab::expr::uniform_grid;
use neuronlab::fourier::{default_ladder, ft_decay_test, fourier_transform, trig_sum_lower, FtConfig, TrigScanConfig};
use neuronlab::growth::{classify_growth, order_by_growth, Curve, GrowthConfig};
use neuronlab::indep::{numeric_independent, OracleConfig, SampledFunction};
use neuronlab::network::{embed_params, leading_order_at_zero, network_value, NetworkStructure, ParamVector};
use neuronlab::zeroset::{
    enumerate_zero_subspaces, in_minimal_zero_set, predict_three_layer_tanh, predict_two_layer, three_layer_neurons,
    two_layer_neurons, ProbeConfig, TwoLayerKind,
};
use neuronlab::ScalarExpr;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use output::Table;
use specs::{Predictor, Spec};

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation; exit code 2.
    Usage(String),
    /// Computation or validation failure; exit code 1.
    Domain(String),
    Spec { path: String, line: usize, column: usize, message: String },
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            CliError::Usage(m) => json!({"error": "usage", "message": m}),
            CliError::Domain(m) => json!({"error": "domain", "message": m}),
            CliError::Io(m) => json!({"error": "io", "message": m}),
            CliError::Spec { path, line, column, message } => {
                json!({"error": "spec", "path": path, "line": line, "column": column, "message": message})
            }
        }
    }
}

fn domain<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Domain(e.to_string())
}

#[derive(Parser)]
#[command(name = "neuronlab", version, about = "Linear-independence toolkit for neural-network neurons")]
struct Cli {
    #[command(flatten)]
    shared: Shared,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Shared {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of grid points for sampled outputs.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Numerical tolerance, where the command has one.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic bump functions.
    #[command(subcommand)]
    Bump(BumpCmd),
    /// Blends of activations through a bump.
    #[command(subcommand)]
    Blend(BlendCmd),
    /// Fully-connected networks.
    #[command(subcommand)]
    Net(NetCmd),
    /// Minimal zero sets and independence predictors.
    #[command(subcommand)]
    Zero(ZeroCmd),
    /// Gram-matrix independence oracle.
    #[command(subcommand)]
    Indep(IndepCmd),
    /// Fourier transforms and decay tests.
    #[command(subcommand)]
    Fourier(FourierCmd),
    /// Sigmoid poles and blow-up curves.
    #[command(subcommand)]
    Curves(CurvesCmd),
    /// Growth classification along curves.
    #[command(subcommand)]
    Growth(GrowthCmd),
}

#[derive(Args, Clone)]
struct BumpArgs {
    #[arg(long)]
    rho: ScalarExpr,
    /// Interval `lo,hi` where the bump is ≈ 1.
    #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
    plateau: (f64, f64),
    /// Interval `lo,hi` outside which the bump is ≈ 0.
    #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
    guard: (f64, f64),
    #[arg(long, default_value_t = 12)]
    n: usize,
    /// Sub-tangent ratio in (0, 1); the tangent construction when absent.
    #[arg(long)]
    theta: Option<f64>,
}

impl BumpArgs {
    fn build(&self) -> Result<Bump, CliError> {
        let spec = match self.theta {
            Some(t) => BumpSpec::sub_tangent(self.rho.clone(), t, self.plateau, self.guard, self.n),
            None => BumpSpec::tangent(self.rho.clone(), self.plateau, self.guard, self.n),
        }
        .map_err(domain)?;
        build_bump(&spec).map_err(domain)
    }
}

#[derive(Subcommand)]
enum BumpCmd {
    /// Tangent slope λ and contact point L of 1 + λρ with the diagonal.
    Solve {
        #[arg(long)]
        rho: ScalarExpr,
        #[arg(long, value_parser = parse_interval, default_value = "1,8")]
        bracket: (f64, f64),
    },
    /// Sample a bump on its default window (CSV).
    Build(BumpArgs),
    /// Certify plateau accuracy, tail smallness and positivity (JSON).
    Verify {
        #[command(flatten)]
        bump: BumpArgs,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
    },
}

#[derive(Subcommand)]
enum BlendCmd {
    /// ξ·σ + (1 − ξ)·σ₀ sampled on [lo, hi] (CSV).
    Mix {
        #[arg(long)]
        sigma: ScalarExpr,
        #[arg(long)]
        sigma0: ScalarExpr,
        #[command(flatten)]
        bump: BumpArgs,
        #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        hi: f64,
    },
    /// Analytic approximations of tanh for several stretch factors (CSV).
    TanhApprox {
        #[arg(long, value_delimiter = ',', default_values_t = [1.1, 1.3, 1.5, 2.0])]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 3.0)]
        half_width: f64,
    },
}

#[derive(Subcommand)]
enum NetCmd {
    /// Evaluate a network spec at its inputs.
    Eval {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Rank of a neuron-splitting embedding and the embedded parameters.
    Embed {
        #[arg(long)]
        spec: PathBuf,
    },
    /// First non-vanishing Taylor coefficient at 0.
    LeadingOrder {
        #[arg(long)]
        expr: ScalarExpr,
        #[arg(long, default_value_t = 8)]
        s_max: usize,
    },
}

#[derive(Subcommand)]
enum ZeroCmd {
    /// Membership of a network spec in the minimal zero set.
    Check {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Maximal linear subspaces of the zero set for small no-bias structures.
    Enumerate {
        #[arg(long)]
        input_dim: usize,
        /// Widths m_1..m_L, ending in 1.
        #[arg(long, value_delimiter = ',')]
        widths: Vec<usize>,
        /// Random points drawn from each subspace.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Combinatorial independence prediction, joined with the oracle.
    Predict {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Subcommand)]
enum IndepCmd {
    /// Numeric independence of a function family.
    Test {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Subcommand)]
enum FourierCmd {
    /// Transform samples at the given frequencies (CSV).
    Transform {
        #[arg(long)]
        expr: ScalarExpr,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        xi: Vec<f64>,
        /// Exponential decay rate assumed for the tail bound.
        #[arg(long, default_value_t = 1.0)]
        decay_rate: f64,
    },
    /// Ratio test f̂(ξ/w_small)/f̂(ξ/w_large) on the default ladder.
    Decay {
        #[arg(long)]
        expr: ScalarExpr,
        #[arg(long)]
        w_small: f64,
        #[arg(long)]
        w_large: f64,
        #[arg(long, default_value_t = 1.0)]
        decay_rate: f64,
    },
    /// Lower bound of |Σ a_k e^{i b_k z}| from a windowed scan.
    Trig {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        b: Vec<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Plus,
    Minus,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Plus => Side::Plus,
            SideArg::Minus => Side::Minus,
        }
    }
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected lo,hi, got `{s}`"))?;
    let lo = lo.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = hi.trim().parse::<f64>().map_err(|e| e.to_string())?;
    if !(lo < hi) {
        return Err(format!("need lo < hi, got `{s}`"));
    }
    Ok((lo, hi))
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (w, b) = s.split_once(':').ok_or_else(|| format!("expected w:b, got `{s}`"))?;
    let w = w.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let b = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((w, b))
}

#[derive(Args, Clone)]
struct BlowupArgs {
    /// Sigmoid neurons as `w:b`, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_pair, allow_hyphen_values = true)]
    params: Vec<(f64, f64)>,
    #[arg(long, default_value_t = 0)]
    k: usize,
    #[arg(long, value_enum, default_value_t = SideArg::Plus)]
    side: SideArg,
    #[arg(long, default_value_t = 50.0)]
    t_max: f64,
}

#[derive(Subcommand)]
enum CurvesCmd {
    /// Pole lattice points (i(2q+1)π − b)/w (CSV).
    Poles {
        #[arg(long, allow_negative_numbers = true)]
        w: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, default_value_t = -3, allow_negative_numbers = true)]
        q_min: i64,
        #[arg(long, default_value_t = 3, allow_negative_numbers = true)]
        q_max: i64,
    },
    /// Blow-up curve of one neuron and the neuron's value along it (CSV).
    Blowup(BlowupArgs),
    /// log|f(γ(t))| of expressions along a blow-up curve (CSV).
    Profile {
        #[command(flatten)]
        curve: BlowupArgs,
        #[arg(long = "expr", required = true)]
        exprs: Vec<ScalarExpr>,
    },
}

#[derive(Subcommand)]
enum GrowthCmd {
    /// Classify the growth of f along γ(t) = t.
    Classify {
        #[arg(long)]
        expr: ScalarExpr,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
        gaps: Vec<f64>,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        /// Also write the evidence table here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Fastest-first order of functions along γ(t) = t.
    Order {
        #[arg(long = "expr", required = true)]
        exprs: Vec<ScalarExpr>,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
    },
}

fn grid(shared: &Shared, default: usize) -> Result<usize, CliError> {
    match shared.grid {
        Some(n) if n < 2 => Err(CliError::Usage("--grid needs at least 2 points".into())),
        Some(n) => Ok(n),
        None => Ok(default),
    }
}

fn oracle_config(interval: Option<(f64, f64)>, nodes: Option<usize>, shared: &Shared) -> OracleConfig {
    let mut cfg = match interval {
        Some((lo, hi)) => OracleConfig::on(lo, hi),
        None => OracleConfig::default(),
    };
    if let Some(n) = nodes {
        cfg.nodes = n;
    }
    if let Some(t) = shared.tol {
        cfg.tol = t;
    }
    cfg
}

fn oracle(fns: &[ScalarExpr], cfg: &OracleConfig) -> Result<neuronlab::indep::OracleReport, CliError> {
    let refs: Vec<&dyn SampledFunction> = fns.iter().map(|f| f as &dyn SampledFunction).collect();
    numeric_independent(&refs, cfg).map_err(domain)
}

fn run_bump(cmd: BumpCmd, sh: &Shared) -> Result<(), CliError> {
    let out = sh.out.as_deref();
    match cmd {
        BumpCmd::Solve { rho, bracket } => {
            let t = solve_tangency(&rho, bracket).map_err(domain)?;
            output::json(&json!({"lambda": t.lambda, "L": t.l}), out)
        }
        BumpCmd::Build(args) => {
            let bump = args.build()?;
            let (lo, hi) = bump.default_window();
            let mut t = Table::new("bump build", &["x", "xi", "log_xi"]);
            t.notes.push(format!("lambda={} L={} n={}", bump.spec.lambda, bump.spec.l, bump.spec.n));
            for x in uniform_grid(lo, hi, grid(sh, 801)?) {
                t.rows.push(vec![x, bump.value(x).map_err(domain)?, bump.value_log(x).map_err(domain)?.log_mag]);
            }
            t.emit(out)
        }
        BumpCmd::Verify { bump, eps } => {
            let b = bump.build()?;
            let cfg = VerifyConfig::default();
            let r = verify_bump(&b, bump.plateau, bump.guard, eps, &cfg);
            output::json(&json!({"passed": r.passed(), "report": r}), out)
        }
    }
}

fn run_blend(cmd: BlendCmd, sh: &Shared) -> Result<(), CliError> {
    let out = sh.out.as_deref();
    match cmd {
        BlendCmd::Mix { sigma, sigma0, bump, lo, hi } => {
            let xi = bump.build()?;
            let mixed = blend_activations(&sigma, &sigma0, xi.expr()).compile();
            let (s, s0) = (sigma.compile(), sigma0.compile());
            let mut t = Table::new("blend mix", &["x", "blend", "sigma", "sigma0"]);
            for x in uniform_grid(lo, hi, grid(sh, 401)?) {
                t.rows.push(vec![x, mixed.eval(x).map_err(domain)?, s.eval(x).map_err(domain)?, s0.eval(x).map_err(domain)?]);
            }
            t.emit(out)
        }
        BlendCmd::TanhApprox { alpha, half_width } => {
            let bumps = tanh_approx_bumps(&TanhApproxConfig::default()).map_err(domain)?;
            let n = grid(sh, 601)?;
            let mut t = Table::new("blend tanh-approx", &["alpha", "x", "sigma_tilde", "tanh"]);
            t.notes.push(format!("theta={}", bumps.theta));
            for a in alpha {
                if !(a > 0.0) {
                    return Err(CliError::Usage(format!("alpha must be positive, got {a}")));
                }
                let f = build_tanh_approx(a, &bumps.inner, &bumps.outer);
                let d = sup_distance_to_tanh(&f, half_width, 2001).map_err(domain)?;
                t.notes.push(format!("alpha={a} sup_abs_diff={}", output::fmt_f64(d)));
                let c = f.compile();
                for x in uniform_grid(-half_width, half_width, n) {
                    t.rows.push(vec![a, x, c.eval(x).map_err(domain)?, x.tanh()]);
                }
            }
            t.emit(out)
        }
    }
}

fn run_net(cmd: NetCmd, sh: &Shared) -> Result<(), CliError> {
    let out = sh.out.as_deref();
    match cmd {
        NetCmd::Eval { spec } => match specs::load(&spec)? {
            Spec::Network { structure, values, activation, inputs } => {
                let theta = ParamVector::new(structure, values).map_err(domain)?;
                let sigma = specs::expr(&activation)?.compile();
                let vals: Result<Vec<f64>, _> = inputs.iter().map(|x| network_value(&sigma, &theta, x)).collect();
                output::json(&json!({"outputs": vals.map_err(domain)?}), out)
            }
            other => Err(specs::wrong_kind("network", &other)),
        },
        NetCmd::Embed { spec } => match specs::load(&spec)? {
            Spec::Embedding { small, big, assignment, split, values } => {
                let map = embed_params(&small, &big, &assignment, &split).map_err(domain)?;
                let cols = map.matrix.ncols();
                let embedded = match values {
                    Some(v) => Some(map.apply(&ParamVector::new(small, v).map_err(domain)?).map_err(domain)?.values),
                    None => None,
                };
                output::json(
                    &json!({"rank": map.rank, "columns": cols, "full_column_rank": map.rank == cols, "big_values": embedded}),
                    out,
                )
            }
            other => Err(specs::wrong_kind("embedding", &other)),
        },
        NetCmd::LeadingOrder { expr, s_max } => {
            let r = leading_order_at_zero(&expr, s_max, sh.tol.unwrap_or(1e-10)).map_err(domain)?;
            output::json(&r, out)
        }
    }
}

fn run_zero(cmd: ZeroCmd, sh: &Shared) -> Result<(), CliError> {
    let out = sh.out.as_deref();
    match cmd {
        ZeroCmd::Check { spec } => match specs::load(&spec)? {
            Spec::Network { structure, values, activation, .. } => {
                let theta = ParamVector::new(structure, values).map_err(domain)?;
                let sigma = specs::expr(&activation)?.compile();
                let mut cfg = ProbeConfig::default();
                if let Some(t) = sh.tol {
                    cfg.tol = t;
                }
                if let Some(n) = sh.grid {
                    cfg.points = n;
                }
                let r = in_minimal_zero_set(&sigma, &theta, &cfg).map_err(domain)?;
                let cert = r.certificate(&theta);
                output::json(&json!({"member": r.member, "certificate": cert, "report": r}), out)
            }
            other => Err(specs::wrong_kind("network", &other)),
        },
        ZeroCmd::Enumerate { input_dim, widths, samples } => {
            let s = NetworkStructure::new(input_dim, widths, false).map_err(domain)?;
            let subs = enumerate_zero_subspaces(&s).map_err(domain)?;
            let mut rng = ChaCha8Rng::seed_from_u64(sh.seed);
            let list: Vec<serde_json::Value> = subs
                .iter()
                .map(|z| {
                    let pts: Vec<Vec<f64>> = (0..samples).map(|_| z.sample(&mut rng)).collect();
                    json!({"dim": z.dim, "equations": z.equations, "patterns": z.patterns, "samples": pts})
                })
                .collect();
            output::json(&json!({"param_count": s.param_count(), "subspaces": list}), out)
        }
        ZeroCmd::Predict { spec } => match specs::load(&spec)? {
            Spec::TwoLayer { predictor, nonzero_at_origin, neurons, activation, interval } => {
                let kind = match predictor {
                    Predictor::NobiasGeneric => TwoLayerKind::NobiasGeneric,
                    Predictor::BiasA => TwoLayerKind::BiasA,
                    Predictor::BiasB => TwoLayerKind::BiasB,
                    Predictor::BiasC => TwoLayerKind::BiasC { nonzero_at_origin },
                };
                let mut v = predict_two_layer(kind, &neurons).map_err(domain)?;
                if let Some(a) = activation {
                    let sigma = specs::expr(&a)?;
                    let d = neurons.first().map_or(1, |n| n.w.len());
                    let dir = neuronlab::indep::dimension_reduce(
                        &neurons.iter().map(|n| n.w.clone()).collect::<Vec<_>>(),
                        64,
                        sh.seed,
                    )
                    .unwrap_or_else(|_| vec![1.0; d]);
                    let fns = two_layer_neurons(&sigma, &neurons, &dir);
                    v = v.with_oracle(&oracle(&fns, &oracle_config(interval, None, sh))?);
                }
                output::json(&json!({"verdict": v, "agrees": v.agrees()}), out)
            }
            Spec::ThreeLayerTanh { w1, w2, interval } => {
                let v = predict_three_layer_tanh(&w1, &w2).map_err(domain)?;
                let d = w1.first().map_or(1, |r| r.len());
                let dir = neuronlab::indep::dimension_reduce(&w1, 64, sh.seed).unwrap_or_else(|_| vec![1.0; d]);
                let fns = three_layer_neurons(&w1, &w2, &dir);
                let v = v.with_oracle(&oracle(&fns, &oracle_config(interval, None, sh))?);
                output::json(&json!({"verdict": v, "agrees": v.agrees()}), out)
            }
            other => Err(specs::wrong_kind("two-layer or three-layer-tanh", &other)),
        },
    }
}

fn run_indep(cmd: IndepCmd, sh: &Shared) -> Result<(), CliError> {
    match cmd {
        IndepCmd::Test { spec } => match specs::load(&spec)? {
            Spec::Family { functions, interval, nodes } => {
                let fns: Result<Vec<ScalarExpr>, _> = functions.iter().map(|s| specs::expr(s)).collect();
                let r = oracle(&fns?, &oracle_config(interval, nodes, sh))?;
                output::json(&r, sh.out.as_deref())
            }
            other => Err(specs::wrong_kind("family", &other)),
        },
    }
}

fn run_fourier(cmd: FourierCmd, sh: &Shared) -> Result<(), CliError> {
    let out = sh.out.as_deref();
    match cmd {
        FourierCmd::Transform { expr, xi, decay_rate } => {
            let cfg = FtConfig { decay_rate, ..FtConfig::default() };
            let r = fourier_transform(&expr, &xi, &cfg).map_err(domain)?;
            let mut t = Table::new("fourier transform", &["xi", "re", "im"]);
            t.notes.push(format!("tail_bound={}", output::fmt_f64(r.tail_bound)));
            for (k, v) in r.xi.iter().zip(&r.values) {
                t.rows.push(vec![*k, v.re, v.im]);
            }
            t.emit(out)
        }
        FourierCmd::Decay { expr, w_small, w_large, decay_rate } => {
            let cfg = FtConfig { decay_rate, ..FtConfig::default() };
            output::json(&ft_decay_test(&expr, w_small, w_large, &default_ladder(), &cfg).map_err(domain)?, out)
        }
        FourierCmd::Trig { a, b } => output::json(&trig_sum_lower(&a, &b, &TrigScanConfig::default()).map_err(domain)?, out),
    }
}

fn run_curves(cmd: CurvesCmd, sh: &Shared) -> Result<(), CliError> {
    let out = sh.out.as_deref();
    match cmd {
        CurvesCmd::Poles { w, b, q_min, q_max } => {
            let lat = PoleLattice::new(w, b).map_err(domain)?;
            let mut t = Table::new("curves poles", &["q", "re", "im"]);
            for q in q_min..=q_max {
                let p = lat.pole(q);
                t.rows.push(vec![q as f64, p.re, p.im]);
            }
            t.emit(out)
        }
        CurvesCmd::Blowup(args) => {
            let bc = blowup_curve(&args.params, args.k, args.side.into()).map_err(domain)?;
            let mut t = Table::new("curves blowup", &["t", "re_gamma", "im_gamma", "re_sigma", "im_sigma"]);
            t.notes.push(format!("shift={} radius={} bystander_max={}", bc.shift, bc.radius, bc.bystander_max));
            for s in uniform_grid(0.0, args.t_max, grid(sh, 101)?) {
                let z = bc.point(s);
                let v = bc.target.neuron(z).ok_or_else(|| CliError::Domain(format!("pole hit at t = {s}")))?;
                t.rows.push(vec![s, z.re, z.im, v.re, v.im]);
            }
            t.emit(out)
        }
        CurvesCmd::Profile { curve, exprs } => {
            let bc = blowup_curve(&curve.params, curve.k, curve.side.into()).map_err(domain)?;
            let guard: Vec<PoleLattice> = bc.bystanders.iter().map(|(_, l)| *l).collect();
            let ts = uniform_grid(0.0, curve.t_max, grid(sh, 101)?);
            let p = curve_decay_profile(&exprs, &bc.curve(curve.t_max), &ts, &guard).map_err(domain)?;
            let cols: Vec<String> = std::iter::once("t".to_string()).chain((0..exprs.len()).map(|i| format!("log_abs_f{i}"))).collect();
            let mut t = Table::new("curves profile", &[]);
            t.columns = cols;
            for (i, e) in exprs.iter().enumerate() {
                t.notes.push(format!("f{i}={e} max_imag={}", output::fmt_f64(p.max_imag[i])));
            }
            for (s, row) in p.t.iter().zip(&p.log_mag) {
                t.rows.push(std::iter::once(*s).chain(row.iter().copied()).collect());
            }
            t.emit(out)
        }
    }
}

fn run_growth(cmd: GrowthCmd, sh: &Shared) -> Result<(), CliError> {
    let out = sh.out.as_deref();
    match cmd {
        GrowthCmd::Classify { expr, gaps, t_max, csv } => {
            let mut cfg = GrowthConfig::with_t_max(t_max);
            if let Some(n) = sh.grid {
                cfg.ladder_points = n;
            }
            let v = classify_growth(&expr, &Curve::identity(0.0, 10.0 * t_max), &gaps, &cfg).map_err(domain)?;
            if let Some(path) = csv {
                let mut cols = vec!["t".to_string(), "arclength".to_string(), "log_abs_f".to_string()];
                cols.extend(gaps.iter().map(|g| format!("log_ratio_gap_{g}")));
                cols.push("log_ratio_growing_gap".to_string());
                let mut t = Table::new("growth classify", &[]);
                t.columns = cols;
                for r in &v.evidence {
                    let mut row = vec![r.t, r.length, r.log_mag];
                    row.extend(&r.fixed_gap_log_ratios);
                    row.push(r.growing_gap_log_ratio);
                    t.rows.push(row);
                }
                t.emit(Some(&path))?;
            }
            output::json(
                &json!({"class": v.class, "diverges": v.diverges, "hyper_exponential": v.hyper_exponential, "hyper_polynomial": v.hyper_polynomial}),
                out,
            )
        }
        GrowthCmd::Order { exprs, t_max } => {
            let mut cfg = GrowthConfig::with_t_max(t_max);
            if let Some(n) = sh.grid {
                cfg.ladder_points = n;
            }
            let order = order_by_growth(&exprs, &Curve::identity(0.0, t_max), &cfg).map_err(domain)?;
            output::json(&json!({"order": order}), out)
        }
    }
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("NEURONLAB_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("NEURONLAB_THREADS must be a positive integer, got `{s}`"))),
        },
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    // every computation is single-threaded, which satisfies any cap
    threads_from_env()?;
    let sh = cli.shared;
    match cli.command {
        Command::Bump(c) => run_bump(c, &sh),
        Command::Blend(c) => run_blend(c, &sh),
        Command::Net(c) => run_net(c, &sh),
        Command::Zero(c) => run_zero(c, &sh),
        Command::Indep(c) => run_indep(c, &sh),
        Command::Fourier(c) => run_fourier(c, &sh),
        Command::Curves(c) => run_curves(c, &sh),
        Command::Growth(c) => run_growth(c, &sh),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
