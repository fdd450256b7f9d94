//! Overflow-safe real scalars.
//!
//! A [`SignedLog`] stores `sign * 2^exp2 * e^frac` with `|frac| <= ln(2)/2`.
//! Splitting the log magnitude into a binary exponent and a small natural-log
//! fraction keeps full double precision in the mantissa even when the value is
//! far outside the range of `f64` (Hermite functions at `x = 1000` sit near
//! `e^{-500000}`).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg};

/// High part of ln 2 with trailing zero bits so `k * LN2_HI` is exact.
#[allow(clippy::excessive_precision)]
const LN2_HI: f64 = 6.931_471_803_691_238_164_90e-1;
#[allow(clippy::excessive_precision)]
const LN2_LO: f64 = 1.908_214_929_270_587_700_02e-10;

#[derive(Clone, Copy, PartialEq)]
pub struct SignedLog {
    sign: i8,
    exp2: i64,
    frac: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        exp2: 0,
        frac: f64::NEG_INFINITY,
    };

    pub const ONE: SignedLog = SignedLog {
        sign: 1,
        exp2: 0,
        frac: 0.0,
    };

    /// Builds a value from a sign and a natural-log magnitude.
    ///
    /// `sign == 0` or `logmag == -inf` both give an exact zero.
    pub fn from_parts(sign: i8, logmag: f64) -> Self {
        if sign == 0 || logmag == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Self::normalized(sign.signum(), 0, logmag)
    }

    /// Positive value `e^logmag`.
    pub fn from_ln(logmag: f64) -> Self {
        Self::from_parts(1, logmag)
    }

    pub fn from_f64(value: f64) -> Self {
        if value == 0.0 {
            return Self::ZERO;
        }
        let sign = if value < 0.0 { -1 } else { 1 };
        if !value.is_finite() {
            return SignedLog {
                sign,
                exp2: 0,
                frac: value.abs().ln(),
            };
        }
        let (mantissa, exp2) = frexp(value.abs());
        SignedLog {
            sign,
            exp2,
            frac: mantissa.ln(),
        }
    }

    fn normalized(sign: i8, exp2: i64, frac: f64) -> Self {
        if !frac.is_finite() {
            if frac == f64::NEG_INFINITY {
                return Self::ZERO;
            }
            return SignedLog { sign, exp2, frac };
        }
        let k = (frac / std::f64::consts::LN_2).round();
        if k == 0.0 {
            return SignedLog { sign, exp2, frac };
        }
        let frac = (frac - k * LN2_HI) - k * LN2_LO;
        SignedLog {
            sign,
            exp2: exp2 + k as i64,
            frac,
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Natural log of `|value|`; `-inf` for zero.
    pub fn logmag(&self) -> f64 {
        if self.sign == 0 {
            return f64::NEG_INFINITY;
        }
        let e = self.exp2 as f64;
        e * LN2_HI + (e * LN2_LO + self.frac)
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let mag = if self.frac.is_finite() {
            ldexp(self.frac.exp(), self.exp2)
        } else {
            self.frac.exp()
        };
        f64::from(self.sign) * mag
    }

    pub fn abs(self) -> Self {
        SignedLog {
            sign: self.sign.abs(),
            ..self
        }
    }

    /// `|self|^p`; the result is positive (or zero).
    pub fn abs_powf(self, p: f64) -> Self {
        if self.sign == 0 {
            return if p == 0.0 { Self::ONE } else { Self::ZERO };
        }
        let e = self.exp2 as f64;
        let prod = p * e;
        let err = p.mul_add(e, -prod);
        let whole = prod.floor();
        let rest = (prod - whole) + err;
        Self::normalized(1, whole as i64, p * self.frac + rest * std::f64::consts::LN_2)
    }

    /// Multiplies by `2^k` exactly.
    pub fn mul_pow2(self, k: i64) -> Self {
        if self.sign == 0 {
            return self;
        }
        SignedLog {
            exp2: self.exp2 + k,
            ..self
        }
    }

    /// Multiplies by `e^delta`.
    pub fn scale_ln(self, delta: f64) -> Self {
        if self.sign == 0 {
            return self;
        }
        Self::normalized(self.sign, self.exp2, self.frac + delta)
    }

    /// `ln(|self| / |other|)`, for nonzero operands.
    pub fn ln_ratio(&self, other: &SignedLog) -> f64 {
        match (self.sign == 0, other.sign == 0) {
            (true, true) => f64::NAN,
            (true, false) => f64::NEG_INFINITY,
            (false, true) => f64::INFINITY,
            (false, false) => {
                let de = (self.exp2 - other.exp2) as f64;
                de * LN2_HI + (de * LN2_LO + (self.frac - other.frac))
            }
        }
    }

    pub fn cmp_abs(&self, other: &SignedLog) -> Ordering {
        match (self.sign == 0, other.sign == 0) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => self.ln_ratio(other).partial_cmp(&0.0).unwrap_or(Ordering::Equal),
        }
    }

    pub fn recip(self) -> SignedLog {
        if self.sign == 0 {
            return SignedLog {
                sign: 1,
                exp2: 0,
                frac: f64::INFINITY,
            };
        }
        Self::normalized(self.sign, -self.exp2, -self.frac)
    }
}

impl Add for SignedLog {
    type Output = SignedLog;

    fn add(self, other: SignedLog) -> SignedLog {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let d = self.ln_ratio(&other);
        let (big, diff) = if d >= 0.0 { (self, d) } else { (other, -d) };
        let r = (-diff).exp();
        if self.sign == other.sign {
            Self::normalized(big.sign, big.exp2, big.frac + r.ln_1p())
        } else if r == 1.0 {
            Self::ZERO
        } else {
            Self::normalized(big.sign, big.exp2, big.frac + (-r).ln_1p())
        }
    }
}

impl Mul for SignedLog {
    type Output = SignedLog;

    fn mul(self, rhs: SignedLog) -> SignedLog {
        let sign = self.sign * rhs.sign;
        if sign == 0 {
            return Self::ZERO;
        }
        Self::normalized(sign, self.exp2 + rhs.exp2, self.frac + rhs.frac)
    }
}

impl Neg for SignedLog {
    type Output = SignedLog;

    fn neg(self) -> SignedLog {
        SignedLog {
            sign: -self.sign,
            ..self
        }
    }
}

impl fmt::Debug for SignedLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignedLog({:+}, ln {:.17e})", self.sign, self.logmag())
    }
}

/// Splits a positive finite double into `m * 2^e` with `m` in `[1/sqrt2, sqrt2)`.
fn frexp(v: f64) -> (f64, i64) {
    let (v, adjust) = if v < f64::MIN_POSITIVE {
        (v * 2f64.powi(64), -64)
    } else {
        (v, 0)
    };
    let bits = v.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1023u64 << 52));
    let e = biased - 1023 + adjust;
    if m > std::f64::consts::SQRT_2 {
        (m / 2.0, e + 1)
    } else {
        (m, e)
    }
}

fn ldexp(mut v: f64, mut e: i64) -> f64 {
    if e > 2200 {
        return v * f64::INFINITY;
    }
    if e < -2200 {
        return 0.0;
    }
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e as i32)
}

/// Streaming sum of nonnegative [`SignedLog`] terms, renormalized at the
/// running maximum.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    anchor: SignedLog,
    scaled: f64,
    max_index: usize,
    count: usize,
}

impl Default for LogSum {
    fn default() -> Self {
        LogSum {
            anchor: SignedLog::ZERO,
            scaled: 0.0,
            max_index: 0,
            count: 0,
        }
    }
}

impl LogSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, term: SignedLog) {
        debug_assert!(term.sign() >= 0, "LogSum takes nonnegative terms");
        let idx = self.count;
        self.count += 1;
        if term.is_zero() {
            return;
        }
        if self.anchor.is_zero() {
            self.anchor = term;
            self.scaled = 1.0;
            self.max_index = idx;
            return;
        }
        let d = term.ln_ratio(&self.anchor);
        if d > 0.0 {
            self.scaled = self.scaled * (-d).exp() + 1.0;
            self.anchor = term;
            self.max_index = idx;
        } else {
            self.scaled += d.exp();
        }
    }

    pub fn value(&self) -> SignedLog {
        if self.anchor.is_zero() {
            return SignedLog::ZERO;
        }
        self.anchor.scale_ln(self.scaled.ln())
    }

    /// Largest term pushed so far.
    pub fn max_term(&self) -> SignedLog {
        self.anchor
    }

    /// Position (in push order) of the largest term.
    pub fn max_index(&self) -> usize {
        self.max_index
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_and_one() {
        assert!(SignedLog::from_f64(0.0).is_zero());
        assert_eq!(SignedLog::from_f64(0.0).logmag(), f64::NEG_INFINITY);
        assert_eq!(SignedLog::ONE.to_f64(), 1.0);
        assert_eq!(SignedLog::from_parts(0, 3.0), SignedLog::ZERO);
    }

    #[test]
    fn far_below_double_range() {
        let tiny = SignedLog::from_ln(-500_000.0);
        assert_eq!(tiny.to_f64(), 0.0);
        assert!((tiny.logmag() + 500_000.0).abs() < 1e-9);
        let back = tiny * SignedLog::from_ln(500_000.0);
        assert!((back.to_f64() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn signed_addition_cancels() {
        let a = SignedLog::from_f64(3.5);
        assert!((a + -a).is_zero());
        let s = SignedLog::from_f64(5.0) + SignedLog::from_f64(-2.0);
        assert!((s.to_f64() - 3.0).abs() < 1e-15);
        let s = SignedLog::from_f64(-5.0) + SignedLog::from_f64(2.0);
        assert!((s.to_f64() + 3.0).abs() < 1e-15);
    }

    #[test]
    fn subnormal_round_trip() {
        let v = 3.0e-310;
        let r = SignedLog::from_f64(v).to_f64();
        assert!(((r - v) / v).abs() < 1e-12);
    }

    #[test]
    fn log_sum_tracks_maximum() {
        let mut acc = LogSum::new();
        for k in [-3.0, -1.0, -2.0, -10.0] {
            acc.push(SignedLog::from_ln(k));
        }
        let expected: f64 = [-3.0f64, -1.0, -2.0, -10.0].iter().map(|k| k.exp()).sum();
        assert!((acc.value().to_f64() / expected - 1.0).abs() < 1e-14);
        assert_eq!(acc.max_index(), 1);
        assert_eq!(acc.len(), 4);
    }

    proptest! {
        #[test]
        fn f64_round_trip(mantissa in 1.0f64..2.0, exp in -1020i32..1020, neg in any::<bool>()) {
            let v = mantissa * 2f64.powi(exp) * if neg { -1.0 } else { 1.0 };
            let back = SignedLog::from_f64(v).to_f64();
            prop_assert!(((back - v) / v).abs() <= 1e-14);
        }

        #[test]
        fn product_matches_log_sum(a in -700.0f64..700.0, b in -700.0f64..700.0) {
            let p = SignedLog::from_ln(a) * SignedLog::from_ln(b);
            prop_assert!((p.logmag() - (a + b)).abs() <= 1e-12 * (1.0 + (a + b).abs()));
        }

        #[test]
        fn powf_matches_scaled_log(l in -1.0e6f64..1.0e6, p in 0.1f64..4.0) {
            let v = SignedLog::from_ln(l).abs_powf(p);
            prop_assert!((v.logmag() - p * l).abs() <= 1e-12 * (1.0 + (p * l).abs()));
        }
    }
}
