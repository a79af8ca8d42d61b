//! Log-domain probabilities with an explicit zero.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Mul, MulAssign};

/// A probability stored as its natural logarithm. Probability zero is the
/// value `-inf` and absorbs under multiplication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    pub const ONE: LogProb = LogProb(0.0);

    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan(), "NaN log-probability");
        LogProb(ln)
    }

    pub fn from_prob(p: f64) -> Self {
        debug_assert!(p >= 0.0, "negative probability {p}");
        if p <= 0.0 {
            Self::ZERO
        } else {
            LogProb(p.ln())
        }
    }

    /// `base^exponent` with `0^0 = 1`.
    pub fn from_power(base: f64, exponent: u32) -> Self {
        if exponent == 0 {
            Self::ONE
        } else if base <= 0.0 {
            Self::ZERO
        } else {
            LogProb(f64::from(exponent) * base.ln())
        }
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn prob(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// Sum of two probabilities, computed without leaving the log domain.
    pub fn ln_add(self, other: LogProb) -> LogProb {
        let (hi, lo) = if self.0 >= other.0 {
            (self.0, other.0)
        } else {
            (other.0, self.0)
        };
        if lo == f64::NEG_INFINITY {
            return LogProb(hi);
        }
        LogProb(hi + (lo - hi).exp().ln_1p())
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Default for LogProb {
    fn default() -> Self {
        Self::ONE
    }
}

impl Mul for LogProb {
    type Output = LogProb;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: LogProb) -> LogProb {
        if self.is_zero() || rhs.is_zero() {
            Self::ZERO
        } else {
            LogProb(self.0 + rhs.0)
        }
    }
}

impl MulAssign for LogProb {
    fn mul_assign(&mut self, rhs: LogProb) {
        *self = *self * rhs;
    }
}

impl Product for LogProb {
    fn product<I: Iterator<Item = LogProb>>(iter: I) -> Self {
        iter.fold(LogProb::ONE, Mul::mul)
    }
}

impl Sum for LogProb {
    fn sum<I: Iterator<Item = LogProb>>(iter: I) -> Self {
        iter.fold(LogProb::ZERO, LogProb::ln_add)
    }
}

impl fmt::Display for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Natural log of the binomial coefficient `C(n, k)`; `-inf` when `k > n`.
///
/// Exact integer arithmetic for `n <= 20`, log-gamma above.
pub fn ln_binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if n <= 62 {
        // C(62, 31) < 2^63: exact, then one rounding.
        return (binomial_u64(n, k) as f64).ln();
    }
    let k = k.min(n - k);
    (0..k).map(|i| (f64::from(n - i) / f64::from(i + 1)).ln()).sum()
}

/// `C(n, k)` in exact integer arithmetic. Panics on overflow.
pub fn binomial_u64(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    u64::try_from(acc).expect("binomial coefficient overflows u64")
}
