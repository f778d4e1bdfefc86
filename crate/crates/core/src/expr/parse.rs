use thiserror::Error;

use super::ScalarExpr;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { pos, msg: msg.into() })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Num(f64),
    Ident(String),
    Op(char),
    Comma,
}

fn tokenize(s: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        match c {
            '(' => {
                out.push((i, Tok::Open));
                i += 1;
            }
            ')' => {
                out.push((i, Tok::Close));
                i += 1;
            }
            ',' => {
                out.push((i, Tok::Comma));
                i += 1;
            }
            '+' | '*' | '/' | '^' => {
                out.push((i, Tok::Op(c)));
                i += 1;
            }
            '-' => {
                // a minus directly followed by a digit is a signed literal only in prefix mode;
                // the infix parser treats it as an operator token
                out.push((i, Tok::Op('-')));
                i += 1;
            }
            _ if c.is_ascii_digit() || c == '.' => {
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    let exp_sign = (d == '-' || d == '+') && i > start && matches!(bytes[i - 1] as char, 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let text = &s[start..i];
                match text.parse::<f64>() {
                    Ok(v) => out.push((start, Tok::Num(v))),
                    Err(_) => return err(start, format!("bad number `{text}`")),
                }
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(s[start..i].to_string())));
            }
            _ => return err(i, format!("unexpected character `{c}`")),
        }
    }
    Ok(out)
}

/// Parse prefix notation such as `(add (exp (pow x 7)) (exp (neg (pow x 3))))`.
pub fn parse_prefix(s: &str) -> Result<ScalarExpr, ParseError> {
    let toks = tokenize(s)?;
    let mut p = Prefix { toks: &toks, i: 0, end: s.len() };
    let e = p.expr()?;
    if p.i != toks.len() {
        return err(toks[p.i].0, "trailing input");
    }
    Ok(e)
}

struct Prefix<'a> {
    toks: &'a [(usize, Tok)],
    i: usize,
    end: usize,
}

impl Prefix<'_> {
    fn pos(&self) -> usize {
        self.toks.get(self.i).map_or(self.end, |t| t.0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|t| t.1.clone());
        self.i += 1;
        t
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Num(v)) => Ok(v),
            Some(Tok::Op('-')) => match self.next() {
                Some(Tok::Num(v)) => Ok(-v),
                _ => err(pos, "expected number"),
            },
            _ => err(pos, "expected number"),
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr, ParseError> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Num(v)) => Ok(ScalarExpr::constant(v)),
            Some(Tok::Op('-')) => match self.next() {
                Some(Tok::Num(v)) => Ok(ScalarExpr::constant(-v)),
                _ => err(pos, "expected number after `-`"),
            },
            Some(Tok::Ident(name)) => match name.as_str() {
                "x" | "z" | "t" => Ok(ScalarExpr::var()),
                "inf" => Ok(ScalarExpr::constant(f64::INFINITY)),
                "NaN" => err(pos, "NaN literal"),
                _ => err(pos, format!("unknown symbol `{name}`")),
            },
            Some(Tok::Open) => {
                let head_pos = self.pos();
                let head = match self.next() {
                    Some(Tok::Ident(h)) => h,
                    _ => return err(head_pos, "expected operator name"),
                };
                let e = match head.as_str() {
                    "add" | "sub" | "mul" | "div" | "compose" => {
                        let a = self.expr()?;
                        let b = self.expr()?;
                        match head.as_str() {
                            "add" => a.add(&b),
                            "sub" => a.sub(&b),
                            "mul" => a.mul(&b),
                            "div" => a.div(&b),
                            _ => a.compose(&b),
                        }
                    }
                    "neg" => self.expr()?.neg(),
                    "exp" => self.expr()?.exp(),
                    "log" => self.expr()?.ln(),
                    "tanh" => self.expr()?.tanh(),
                    "sigmoid" => self.expr()?.sigmoid(),
                    "pow" | "rpow" => {
                        let a = self.expr()?;
                        let p = self.number()?;
                        a.powf(p)
                    }
                    _ => return err(head_pos, format!("unknown operator `{head}`")),
                };
                let close = self.pos();
                match self.next() {
                    Some(Tok::Close) => Ok(e),
                    _ => err(close, format!("expected `)` closing `{head}`")),
                }
            }
            _ => err(pos, "expected expression"),
        }
    }
}

/// Parse conventional infix notation such as `exp(x^2) + tanh(2*x)`.
pub fn parse_infix(s: &str) -> Result<ScalarExpr, ParseError> {
    let toks = tokenize(s)?;
    let mut p = Infix { toks: &toks, i: 0, end: s.len() };
    let e = p.sum()?;
    if p.i != toks.len() {
        return err(toks[p.i].0, "trailing input");
    }
    Ok(e)
}

struct Infix<'a> {
    toks: &'a [(usize, Tok)],
    i: usize,
    end: usize,
}

impl Infix<'_> {
    fn pos(&self) -> usize {
        self.toks.get(self.i).map_or(self.end, |t| t.0)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.1)
    }

    fn sum(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut e = self.product()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.i += 1;
            let r = self.product()?;
            e = if c == '+' { e.add(&r) } else { e.sub(&r) };
        }
        Ok(e)
    }

    fn product(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut e = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek().cloned() {
            self.i += 1;
            let r = self.unary()?;
            e = if c == '*' { e.mul(&r) } else { e.div(&r) };
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<ScalarExpr, ParseError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.i += 1;
            return Ok(self.unary()?.neg());
        }
        if let Some(Tok::Op('+')) = self.peek() {
            self.i += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<ScalarExpr, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            let pos = self.pos();
            self.i += 1;
            let ex = self.unary()?;
            return match ex.as_const() {
                Some(p) => Ok(base.powf(p)),
                None if base.as_const().is_some_and(|b| b > 0.0) => Ok(ex.mul(&base.ln()).exp()),
                None => err(pos, "exponent must be constant unless the base is a positive constant"),
            };
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ScalarExpr, ParseError> {
        let pos = self.pos();
        let tok = self.peek().cloned();
        self.i += 1;
        match tok {
            Some(Tok::Num(v)) => Ok(ScalarExpr::constant(v)),
            Some(Tok::Open) => {
                let e = self.sum()?;
                self.expect_close()?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if let Some(Tok::Open) = self.peek() {
                    self.i += 1;
                    let arg = self.sum()?;
                    self.expect_close()?;
                    return apply(&name, arg).ok_or(()).or_else(|_| err(pos, format!("unknown function `{name}`")));
                }
                match name.as_str() {
                    "x" | "z" | "t" => Ok(ScalarExpr::var()),
                    "e" => Ok(ScalarExpr::constant(std::f64::consts::E)),
                    "pi" => Ok(ScalarExpr::constant(std::f64::consts::PI)),
                    _ => err(pos, format!("unknown symbol `{name}`")),
                }
            }
            _ => err(pos, "expected expression"),
        }
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Close) => {
                self.i += 1;
                Ok(())
            }
            _ => err(pos, "expected `)`"),
        }
    }
}

fn apply(name: &str, a: ScalarExpr) -> Option<ScalarExpr> {
    let one = ScalarExpr::constant(1.0);
    Some(match name {
        "exp" => a.exp(),
        "log" | "ln" => a.ln(),
        "tanh" => a.tanh(),
        "sigmoid" => a.sigmoid(),
        "sqrt" => a.powf(0.5),
        // |a| as sqrt(a²): analytic away from 0 only
        "abs" => a.powi(2).powf(0.5),
        "cosh" => a.exp().add(&a.neg().exp()).mul(&ScalarExpr::constant(0.5)),
        "sinh" => a.exp().sub(&a.neg().exp()).mul(&ScalarExpr::constant(0.5)),
        "sech" => ScalarExpr::constant(2.0).div(&a.exp().add(&a.neg().exp())),
        "softplus" => one.add(&a.exp()).ln(),
        _ => return None,
    })
}
