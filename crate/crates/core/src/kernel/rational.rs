use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A reduced rational exponent `p/q` restricted to the representable range `[-1, 2]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RationalExponent {
    p: i64,
    q: i64,
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

impl RationalExponent {
    pub const ZERO: RationalExponent = RationalExponent { p: 0, q: 1 };
    pub const HALF: RationalExponent = RationalExponent { p: 1, q: 2 };
    pub const ONE: RationalExponent = RationalExponent { p: 1, q: 1 };

    /// Reduces `p/q` and checks that it lies in `[-1, 2]`.
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        let (mut p, mut q) = (p, q);
        if q < 0 {
            p = -p;
            q = -q;
        }
        let g = gcd(p, q).max(1);
        let (p, q) = (p / g, q / g);
        if p < -q || p > 2 * q {
            return Err(Error::wrong_exponent(
                format!("{p}/{q}"),
                "outside the representable range [-1, 2]",
            ));
        }
        Ok(RationalExponent { p, q })
    }

    pub fn numer(self) -> i64 {
        self.p
    }

    pub fn denom(self) -> i64 {
        self.q
    }

    pub fn value(self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// `t ∈ [0, 1]`, where the geometric mean is matrix concave.
    pub fn concave_range(self) -> bool {
        self.p >= 0 && self.p <= self.q
    }

    /// `t ∈ [-1, 0] ∪ [1, 2]`, where the geometric mean is matrix convex.
    pub fn convex_range(self) -> bool {
        self.p <= 0 || self.p >= self.q
    }

    pub fn is_zero(self) -> bool {
        self.p == 0
    }

    pub fn is_one(self) -> bool {
        self.p == self.q
    }

    /// Denominator is a power of two (includes integers).
    pub fn is_dyadic(self) -> bool {
        (self.q as u64).is_power_of_two()
    }

    pub fn numerator_is_power_of_two(self) -> bool {
        self.p > 0 && (self.p as u64).is_power_of_two()
    }

    /// `⌊log₂ q⌋`.
    pub fn floor_log2_denom(self) -> u32 {
        63 - (self.q as u64).leading_zeros()
    }

    pub fn one_minus(self) -> Result<Self> {
        Self::new(self.q - self.p, self.q)
    }

    pub fn neg(self) -> Result<Self> {
        Self::new(-self.p, self.q)
    }

    pub fn mul(self, other: Self) -> Result<Self> {
        Self::new(self.p * other.p, self.q * other.q)
    }

    pub fn add(self, other: Self) -> Result<Self> {
        Self::new(self.p * other.q + other.p * self.q, self.q * other.q)
    }

    pub fn div(self, other: Self) -> Result<Self> {
        if other.p == 0 {
            return Err(Error::Domain("division by zero exponent".into()));
        }
        Self::new(self.p * other.q, self.q * other.p)
    }

    /// Every reduced `p/q` with `q <= qmax` inside `[lo, hi]`, ordered by denominator then numerator.
    pub fn enumerate(qmax: i64, lo: (i64, i64), hi: (i64, i64)) -> Vec<Self> {
        let mut out = Vec::new();
        for q in 1..=qmax {
            for p in -q..=2 * q {
                if gcd(p, q) != 1 {
                    continue;
                }
                // lo.0/lo.1 <= p/q <= hi.0/hi.1
                if p * lo.1 < lo.0 * q || p * hi.1 > hi.0 * q {
                    continue;
                }
                out.push(RationalExponent { p, q });
            }
        }
        out
    }
}

impl fmt::Display for RationalExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q == 1 {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}/{}", self.p, self.q)
        }
    }
}

impl FromStr for RationalExponent {
    type Err = Error;

    /// Parses `"p/q"` or an integer. Decimal notation is rejected.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Domain(format!("expected a rational `p/q`, got `{s}`"));
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (
                p.trim().parse::<i64>().map_err(|_| bad())?,
                q.trim().parse::<i64>().map_err(|_| bad())?,
            ),
            None => (s.parse::<i64>().map_err(|_| bad())?, 1),
        };
        Self::new(p, q)
    }
}

/// Binary expansion `p/2^ℓ = (0.m_ℓ m_{ℓ-1} … m_1)₂` of a dyadic exponent in `(0, 1)`.
///
/// `bits[i - 1]` holds `m_i`; `m_1` is the least significant digit and always 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryExpansion {
    bits: Vec<u8>,
}

impl BinaryExpansion {
    pub fn of(t: RationalExponent) -> Result<Self> {
        if !t.is_dyadic() || t.p <= 0 || t.p >= t.q {
            return Err(Error::wrong_exponent(t, "binary expansion needs a dyadic value in (0, 1)"));
        }
        let len = t.floor_log2_denom() as usize;
        let bits = (0..len).map(|i| ((t.p >> i) & 1) as u8).collect();
        Ok(BinaryExpansion { bits })
    }

    /// ℓ.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// `m_i` for `i` in `1..=ℓ`.
    pub fn bit(&self, i: usize) -> u8 {
        self.bits[i - 1]
    }

    pub fn numerator(&self) -> i64 {
        self.bits
            .iter()
            .enumerate()
            .map(|(i, &b)| (b as i64) << i)
            .sum()
    }

    /// The value of the truncated expansion `(0.m_i … m_1)₂ = (p mod 2^i)/2^i`.
    pub fn prefix_value(&self, i: usize) -> Result<RationalExponent> {
        let p: i64 = self.bits[..i]
            .iter()
            .enumerate()
            .map(|(k, &b)| (b as i64) << k)
            .sum();
        RationalExponent::new(p, 1 << i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reduces_and_flags() {
        let t = RationalExponent::new(10, 16).unwrap();
        assert_eq!((t.numer(), t.denom()), (5, 8));
        assert!(t.concave_range() && !t.convex_range());
        let t = RationalExponent::new(-2, 4).unwrap();
        assert_eq!(t.to_string(), "-1/2");
        assert!(t.convex_range());
        assert!(RationalExponent::ONE.concave_range() && RationalExponent::ONE.convex_range());
    }

    #[test]
    fn range_is_enforced() {
        assert!(RationalExponent::new(7, 3).is_err());
        assert!(RationalExponent::new(-3, 2).is_err());
        assert!(RationalExponent::new(2, 1).is_ok());
        assert!(RationalExponent::new(-1, 1).is_ok());
    }

    #[test]
    fn parsing() {
        assert_eq!("8/13".parse::<RationalExponent>().unwrap().to_string(), "8/13");
        assert_eq!("-1".parse::<RationalExponent>().unwrap().to_string(), "-1");
        assert!("0.5".parse::<RationalExponent>().is_err());
        assert!("7/3".parse::<RationalExponent>().is_err());
        assert!("1/0".parse::<RationalExponent>().is_err());
    }

    #[test]
    fn expansion_of_five_eighths() {
        let e = BinaryExpansion::of(RationalExponent::new(5, 8).unwrap()).unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!((e.bit(1), e.bit(2), e.bit(3)), (1, 0, 1));
        assert_eq!(e.prefix_value(2).unwrap(), RationalExponent::new(1, 4).unwrap());
    }

    #[test]
    fn floor_log2() {
        assert_eq!(RationalExponent::new(8, 13).unwrap().floor_log2_denom(), 3);
        assert_eq!(RationalExponent::new(1, 2).unwrap().floor_log2_denom(), 1);
        assert_eq!(RationalExponent::ONE.floor_log2_denom(), 0);
    }

    proptest! {
        #[test]
        fn expansion_reconstructs_numerator(l in 1u32..12, k in 0i64..2048) {
            let q = 1i64 << l;
            let p = (2 * k + 1) % q;
            let t = RationalExponent::new(p, q).unwrap();
            let e = BinaryExpansion::of(t).unwrap();
            prop_assert_eq!(e.numerator(), t.numer());
            prop_assert_eq!(e.bit(1), 1);
            prop_assert_eq!(e.len() as u32, t.floor_log2_denom());
        }

        #[test]
        fn new_is_reduced(p in -50i64..100, q in 1i64..50) {
            if let Ok(t) = RationalExponent::new(p, q) {
                prop_assert_eq!(gcd(t.numer(), t.denom()), 1);
                prop_assert!((t.value() - p as f64 / q as f64).abs() < 1e-15);
            }
        }
    }
}
