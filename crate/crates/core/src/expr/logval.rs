use serde::{Deserialize, Serialize};

/// A real number stored as sign and natural log of its magnitude.
///
/// `sign = 0` is zero (`log_mag = -inf`). A nonzero sign with
/// `log_mag = -inf` is a value of that sign too small for `f64`; the sign
/// stays authoritative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedLogValue {
    pub sign: i8,
    pub log_mag: f64,
}

impl SignedLogValue {
    pub const ZERO: SignedLogValue = SignedLogValue { sign: 0, log_mag: f64::NEG_INFINITY };
    pub const ONE: SignedLogValue = SignedLogValue { sign: 1, log_mag: 0.0 };

    pub fn new(sign: i8, log_mag: f64) -> Self {
        if sign == 0 {
            Self::ZERO
        } else {
            SignedLogValue { sign: sign.signum(), log_mag }
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            SignedLogValue { sign: if v > 0.0 { 1 } else { -1 }, log_mag: v.abs().ln() }
        }
    }

    /// Back to `f64`; saturates to ±inf or 0 outside the double range.
    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.log_mag.exp()
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn neg(self) -> Self {
        SignedLogValue { sign: -self.sign, log_mag: self.log_mag }
    }

    pub fn mul(self, other: Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            return Self::ZERO;
        }
        SignedLogValue { sign: self.sign * other.sign, log_mag: self.log_mag + other.log_mag }
    }

    /// `None` on division by zero.
    pub fn div(self, other: Self) -> Option<Self> {
        if other.sign == 0 {
            return None;
        }
        if self.sign == 0 {
            return Some(Self::ZERO);
        }
        Some(SignedLogValue { sign: self.sign * other.sign, log_mag: self.log_mag - other.log_mag })
    }

    /// Signed log-sum-exp. `None` when opposite terms agree to within the
    /// precision of their log-magnitudes, so the sign of the sum is unknown.
    pub fn add(self, other: Self) -> Option<Self> {
        if self.sign == 0 {
            return Some(other);
        }
        if other.sign == 0 {
            return Some(self);
        }
        let (big, small) = if self.log_mag >= other.log_mag { (self, other) } else { (other, self) };
        if big.log_mag == f64::INFINITY {
            if small.log_mag == f64::INFINITY && small.sign != big.sign {
                return None;
            }
            return Some(big);
        }
        if big.log_mag == f64::NEG_INFINITY {
            // both below range; the larger sign cannot be resolved
            return if big.sign == small.sign { Some(big) } else { None };
        }
        let d = big.log_mag - small.log_mag;
        if big.sign == small.sign {
            return Some(SignedLogValue { sign: big.sign, log_mag: big.log_mag + (-d).exp().ln_1p() });
        }
        let resolution = 64.0 * f64::EPSILON * big.log_mag.abs().max(1.0);
        if d <= resolution {
            return None;
        }
        Some(SignedLogValue { sign: big.sign, log_mag: big.log_mag + (-(-d).exp_m1()).ln() })
    }
}

/// Evaluation value: plain `f64` while representable, log form otherwise.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Lv {
    Real(f64),
    Log(SignedLogValue),
}

const SAFE_LOG: f64 = 700.0;

impl Lv {
    pub(crate) fn from_log(v: SignedLogValue) -> Lv {
        if v.sign == 0 {
            Lv::Real(0.0)
        } else if v.log_mag.abs() < SAFE_LOG {
            Lv::Real(v.to_f64())
        } else {
            Lv::Log(v)
        }
    }

    pub(crate) fn to_log(self) -> SignedLogValue {
        match self {
            Lv::Real(v) => SignedLogValue::from_f64(v),
            Lv::Log(v) => v,
        }
    }

    pub(crate) fn sign(self) -> i8 {
        match self {
            Lv::Real(v) if v > 0.0 => 1,
            Lv::Real(v) if v < 0.0 => -1,
            Lv::Real(_) => 0,
            Lv::Log(v) => v.sign,
        }
    }
}
