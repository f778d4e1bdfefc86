use std::collections::HashMap;

use num_complex::Complex64;

use super::logval::{Lv, SignedLogValue};
use super::{sigmoid_f64, EvalError, Node, ScalarExpr};

#[derive(Debug, Clone, Copy)]
enum Op {
    Input,
    Const(f64),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Neg(u32),
    PowI(u32, i32),
    PowF(u32, f64),
    Exp(u32),
    Log(u32),
    Tanh(u32),
    Sigmoid(u32),
}

/// Expression flattened into a topologically ordered tape.
///
/// Each shared subtree is emitted once per binding of the variable, so
/// evaluation cost is linear in the DAG size rather than the tree size.
#[derive(Debug, Clone)]
pub struct Compiled {
    ops: Vec<Op>,
    out: u32,
}

impl Compiled {
    pub fn new(expr: &ScalarExpr) -> Self {
        let mut ops = vec![Op::Input];
        let mut memo = HashMap::new();
        let out = emit(expr, 0, &mut ops, &mut memo);
        Compiled { ops, out }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let mut buf = Vec::with_capacity(self.ops.len());
        self.eval_with(x, &mut buf)
    }

    /// Evaluate at many points, reusing one scratch buffer.
    pub fn eval_many(&self, xs: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut buf = Vec::with_capacity(self.ops.len());
        xs.iter().map(|&x| self.eval_with(x, &mut buf)).collect()
    }

    fn eval_with(&self, x: f64, v: &mut Vec<f64>) -> Result<f64, EvalError> {
        v.clear();
        let nan_flag = |a: f64, b: f64| {
            if a.is_infinite() || b.is_infinite() {
                EvalError::Overflow { x }
            } else {
                EvalError::Domain { op: "arithmetic", x }
            }
        };
        for op in &self.ops {
            let r = match *op {
                Op::Input => x,
                Op::Const(c) => c,
                Op::Add(a, b) => {
                    let (a, b) = (v[a as usize], v[b as usize]);
                    let r = a + b;
                    if r.is_nan() {
                        return Err(nan_flag(a, b));
                    }
                    r
                }
                Op::Sub(a, b) => {
                    let (a, b) = (v[a as usize], v[b as usize]);
                    let r = a - b;
                    if r.is_nan() {
                        return Err(nan_flag(a, b));
                    }
                    r
                }
                Op::Mul(a, b) => {
                    let (a, b) = (v[a as usize], v[b as usize]);
                    let r = a * b;
                    if r.is_nan() {
                        return Err(nan_flag(a, b));
                    }
                    r
                }
                Op::Div(a, b) => {
                    let (a, b) = (v[a as usize], v[b as usize]);
                    if b == 0.0 {
                        return Err(EvalError::Domain { op: "div", x });
                    }
                    let r = a / b;
                    if r.is_nan() {
                        return Err(nan_flag(a, b));
                    }
                    r
                }
                Op::Neg(a) => -v[a as usize],
                Op::PowI(a, n) => {
                    let a = v[a as usize];
                    if a == 0.0 && n < 0 {
                        return Err(EvalError::Domain { op: "pow", x });
                    }
                    a.powi(n)
                }
                Op::PowF(a, p) => {
                    let a = v[a as usize];
                    if a < 0.0 || (a == 0.0 && p < 0.0) {
                        return Err(EvalError::Domain { op: "rpow", x });
                    }
                    a.powf(p)
                }
                Op::Exp(a) => v[a as usize].exp(),
                Op::Log(a) => {
                    let a = v[a as usize];
                    if !(a > 0.0) {
                        return Err(EvalError::Domain { op: "log", x });
                    }
                    a.ln()
                }
                Op::Tanh(a) => v[a as usize].tanh(),
                Op::Sigmoid(a) => sigmoid_f64(v[a as usize]),
            };
            v.push(r);
        }
        let r = v[self.out as usize];
        if r.is_finite() {
            Ok(r)
        } else if r.is_nan() {
            Err(EvalError::Domain { op: "result", x })
        } else {
            Err(EvalError::Overflow { x })
        }
    }

    /// Overflow-safe evaluation returning sign and log-magnitude.
    pub fn eval_log(&self, x: f64) -> Result<SignedLogValue, EvalError> {
        self.eval_lv(Lv::Real(x), x)
    }

    /// As [`Compiled::eval_log`], with the variable itself given in log form.
    /// Error payloads report the input saturated to `f64`.
    pub fn eval_log_at(&self, input: SignedLogValue) -> Result<SignedLogValue, EvalError> {
        self.eval_lv(Lv::from_log(input), input.to_f64())
    }

    fn eval_lv(&self, input: Lv, x: f64) -> Result<SignedLogValue, EvalError> {
        let mut v: Vec<Lv> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let r = match *op {
                Op::Input => input,
                Op::Const(c) => Lv::Real(c),
                Op::Add(a, b) => log_add(v[a as usize], v[b as usize], x)?,
                Op::Sub(a, b) => log_add(v[a as usize], neg(v[b as usize]), x)?,
                Op::Mul(a, b) => match (v[a as usize], v[b as usize]) {
                    (Lv::Real(p), Lv::Real(q)) if (p * q).is_finite() && (p * q != 0.0 || p == 0.0 || q == 0.0) => {
                        Lv::Real(p * q)
                    }
                    (p, q) => {
                        let (p, q) = (p.to_log(), q.to_log());
                        let r = p.mul(q);
                        if r.log_mag.is_nan() {
                            return Err(EvalError::Overflow { x });
                        }
                        Lv::from_log(r)
                    }
                },
                Op::Div(a, b) => match (v[a as usize], v[b as usize]) {
                    (_, q) if q.sign() == 0 => return Err(EvalError::Domain { op: "div", x }),
                    (Lv::Real(p), Lv::Real(q)) if (p / q).is_finite() && (p / q != 0.0 || p == 0.0) => Lv::Real(p / q),
                    (p, q) => {
                        let r = p.to_log().div(q.to_log()).ok_or(EvalError::Domain { op: "div", x })?;
                        if r.log_mag.is_nan() {
                            return Err(EvalError::Overflow { x });
                        }
                        Lv::from_log(r)
                    }
                },
                Op::Neg(a) => neg(v[a as usize]),
                Op::PowI(a, n) => {
                    let a = v[a as usize];
                    if a.sign() == 0 {
                        if n < 0 {
                            return Err(EvalError::Domain { op: "pow", x });
                        }
                        Lv::Real(if n == 0 { 1.0 } else { 0.0 })
                    } else {
                        match a {
                            Lv::Real(p) if p.powi(n).is_finite() && p.powi(n) != 0.0 => Lv::Real(p.powi(n)),
                            _ => {
                                let l = a.to_log();
                                let sign = if n % 2 == 0 { 1 } else { l.sign };
                                Lv::from_log(SignedLogValue::new(sign, l.log_mag * n as f64))
                            }
                        }
                    }
                }
                Op::PowF(a, p) => {
                    let a = v[a as usize];
                    match a.sign() {
                        -1 => return Err(EvalError::Domain { op: "rpow", x }),
                        0 if p < 0.0 => return Err(EvalError::Domain { op: "rpow", x }),
                        0 => Lv::Real(0.0),
                        _ => match a {
                            Lv::Real(q) if q.powf(p).is_finite() && q.powf(p) != 0.0 => Lv::Real(q.powf(p)),
                            _ => Lv::from_log(SignedLogValue::new(1, a.to_log().log_mag * p)),
                        },
                    }
                }
                Op::Exp(a) => match v[a as usize] {
                    Lv::Real(p) => {
                        let e = p.exp();
                        if e.is_finite() && e != 0.0 {
                            Lv::Real(e)
                        } else {
                            Lv::from_log(SignedLogValue::new(1, p))
                        }
                    }
                    Lv::Log(l) => Lv::from_log(SignedLogValue::new(1, l.to_f64())),
                },
                Op::Log(a) => {
                    let a = v[a as usize];
                    if a.sign() != 1 {
                        return Err(EvalError::Domain { op: "log", x });
                    }
                    match a {
                        Lv::Real(p) => Lv::Real(p.ln()),
                        Lv::Log(l) => {
                            if l.log_mag.is_finite() {
                                Lv::Real(l.log_mag)
                            } else {
                                Lv::Log(SignedLogValue::new(l.log_mag.signum() as i8, f64::INFINITY))
                            }
                        }
                    }
                }
                Op::Tanh(a) => match v[a as usize] {
                    Lv::Real(p) => Lv::Real(p.tanh()),
                    Lv::Log(l) if l.log_mag > 0.0 => Lv::Real(l.sign as f64),
                    small => small,
                },
                Op::Sigmoid(a) => match v[a as usize] {
                    Lv::Real(p) if p >= 0.0 => Lv::Real(sigmoid_f64(p)),
                    Lv::Real(p) => {
                        let e = p.exp();
                        if e != 0.0 {
                            Lv::Real(e / (1.0 + e))
                        } else {
                            Lv::Log(SignedLogValue::new(1, p))
                        }
                    }
                    Lv::Log(l) if l.log_mag > 0.0 && l.sign > 0 => Lv::Real(1.0),
                    Lv::Log(l) if l.log_mag > 0.0 => Lv::Log(SignedLogValue::new(1, l.to_f64())),
                    Lv::Log(_) => Lv::Real(0.5),
                },
            };
            v.push(r);
        }
        let r = v[self.out as usize].to_log();
        if r.log_mag.is_nan() || r.log_mag == f64::INFINITY {
            return Err(EvalError::Overflow { x });
        }
        Ok(r)
    }

    /// Complex evaluation with principal branches.
    pub fn eval_complex(&self, z: Complex64) -> Result<Complex64, EvalError> {
        let x = z.re;
        let mut v: Vec<Complex64> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let r = match *op {
                Op::Input => z,
                Op::Const(c) => Complex64::new(c, 0.0),
                Op::Add(a, b) => v[a as usize] + v[b as usize],
                Op::Sub(a, b) => v[a as usize] - v[b as usize],
                Op::Mul(a, b) => v[a as usize] * v[b as usize],
                Op::Div(a, b) => {
                    let d = v[b as usize];
                    if d.norm() == 0.0 {
                        return Err(EvalError::Domain { op: "div", x });
                    }
                    v[a as usize] / d
                }
                Op::Neg(a) => -v[a as usize],
                Op::PowI(a, n) => {
                    let a = v[a as usize];
                    if a.norm() == 0.0 && n < 0 {
                        return Err(EvalError::Domain { op: "pow", x });
                    }
                    a.powi(n)
                }
                Op::PowF(a, p) => {
                    let a = v[a as usize];
                    if a.norm() == 0.0 {
                        if p < 0.0 {
                            return Err(EvalError::Domain { op: "rpow", x });
                        }
                        Complex64::new(0.0, 0.0)
                    } else {
                        a.powf(p)
                    }
                }
                Op::Exp(a) => v[a as usize].exp(),
                Op::Log(a) => {
                    let a = v[a as usize];
                    if a.norm() == 0.0 {
                        return Err(EvalError::Domain { op: "log", x });
                    }
                    a.ln()
                }
                Op::Tanh(a) => complex_tanh(v[a as usize]).ok_or(EvalError::Domain { op: "tanh", x })?,
                Op::Sigmoid(a) => complex_sigmoid(v[a as usize]).ok_or(EvalError::Domain { op: "sigmoid", x })?,
            };
            if r.re.is_nan() || r.im.is_nan() {
                return Err(EvalError::Overflow { x });
            }
            v.push(r);
        }
        let r = v[self.out as usize];
        if r.re.is_finite() && r.im.is_finite() {
            Ok(r)
        } else {
            Err(EvalError::Overflow { x })
        }
    }
}

fn neg(a: Lv) -> Lv {
    match a {
        Lv::Real(p) => Lv::Real(-p),
        Lv::Log(l) => Lv::Log(l.neg()),
    }
}

fn log_add(a: Lv, b: Lv, x: f64) -> Result<Lv, EvalError> {
    if let (Lv::Real(p), Lv::Real(q)) = (a, b) {
        let s = p + q;
        if s.is_finite() {
            return Ok(Lv::Real(s));
        }
    }
    let s = a.to_log().add(b.to_log()).ok_or(EvalError::Cancellation { x })?;
    Ok(Lv::from_log(s))
}

/// `tanh` written so that large real parts do not produce `inf/inf`.
pub fn complex_tanh(z: Complex64) -> Option<Complex64> {
    let flip = z.re < 0.0;
    let w = if flip { -z } else { z };
    let e = (-2.0 * w).exp();
    let den = 1.0 + e;
    if den.norm() == 0.0 {
        return None;
    }
    let t = (1.0 - e) / den;
    Some(if flip { -t } else { t })
}

pub fn complex_sigmoid(z: Complex64) -> Option<Complex64> {
    if z.re >= 0.0 {
        let den = 1.0 + (-z).exp();
        if den.norm() == 0.0 {
            return None;
        }
        Some(1.0 / den)
    } else {
        let e = z.exp();
        let den = 1.0 + e;
        if den.norm() == 0.0 {
            return None;
        }
        Some(e / den)
    }
}

fn emit(e: &ScalarExpr, var: u32, ops: &mut Vec<Op>, memo: &mut HashMap<(usize, u32), u32>) -> u32 {
    if let Node::Var = e.node() {
        return var;
    }
    let key = (e.id(), var);
    if let Some(&slot) = memo.get(&key) {
        return slot;
    }
    let op = match e.node() {
        Node::Var => unreachable!(),
        Node::Const(c) => Op::Const(*c),
        Node::Add(a, b) => Op::Add(emit(a, var, ops, memo), emit(b, var, ops, memo)),
        Node::Sub(a, b) => Op::Sub(emit(a, var, ops, memo), emit(b, var, ops, memo)),
        Node::Mul(a, b) => Op::Mul(emit(a, var, ops, memo), emit(b, var, ops, memo)),
        Node::Div(a, b) => Op::Div(emit(a, var, ops, memo), emit(b, var, ops, memo)),
        Node::Neg(a) => Op::Neg(emit(a, var, ops, memo)),
        Node::PowI(a, n) => Op::PowI(emit(a, var, ops, memo), *n),
        Node::PowF(a, p) => Op::PowF(emit(a, var, ops, memo), *p),
        Node::Exp(a) => Op::Exp(emit(a, var, ops, memo)),
        Node::Log(a) => Op::Log(emit(a, var, ops, memo)),
        Node::Tanh(a) => Op::Tanh(emit(a, var, ops, memo)),
        Node::Sigmoid(a) => Op::Sigmoid(emit(a, var, ops, memo)),
        Node::Compose(outer, inner) => {
            let s = emit(inner, var, ops, memo);
            let slot = emit(outer, s, ops, memo);
            memo.insert(key, slot);
            return slot;
        }
    };
    ops.push(op);
    let slot = (ops.len() - 1) as u32;
    memo.insert(key, slot);
    slot
}
