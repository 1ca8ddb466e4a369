//! Exact dyadic rationals `m · 2^(-e)`.
//!
//! Every Haar coefficient, counting sum and point coordinate in this crate
//! lives in the ring of dyadic rationals, so nothing here ever rounds. The
//! mantissa is kept inline as an `i128` while it fits and is promoted to a
//! heap `BigInt` only on overflow; values are always normalized (odd
//! mantissa, or zero with exponent 0), so structural equality is value
//! equality.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Mantissa {
    Small(i128),
    Big(BigInt),
}

impl Mantissa {
    fn to_big(&self) -> BigInt {
        match self {
            Mantissa::Small(m) => BigInt::from(*m),
            Mantissa::Big(m) => m.clone(),
        }
    }

    fn signum(&self) -> i32 {
        match self {
            Mantissa::Small(m) => m.signum() as i32,
            Mantissa::Big(m) => match m.sign() {
                Sign::Minus => -1,
                Sign::NoSign => 0,
                Sign::Plus => 1,
            },
        }
    }
}

/// An exact value `mantissa · 2^(-exponent)`.
///
/// The exponent may be any integer, so large powers of two such as `2^n`
/// are representable as `1 · 2^(-(-n))`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: Mantissa,
    exponent: i64,
}

fn shl_checked(m: i128, shift: u64) -> Option<i128> {
    if m == 0 {
        return Some(0);
    }
    if shift >= 127 {
        return None;
    }
    let r = m << shift;
    (r >> shift == m).then_some(r)
}

impl Dyadic {
    /// Builds the normalized value `mantissa · 2^(-exponent)`.
    pub fn new(mantissa: i128, exponent: i64) -> Self {
        Self::from_parts(Mantissa::Small(mantissa), exponent)
    }

    pub fn from_bigint(mantissa: BigInt, exponent: i64) -> Self {
        Self::from_parts(Mantissa::Big(mantissa), exponent)
    }

    pub fn zero() -> Self {
        Dyadic {
            mantissa: Mantissa::Small(0),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic::new(1, 0)
    }

    /// `2^k` for any integer `k`.
    pub fn pow2(k: i64) -> Self {
        Dyadic::new(1, -k)
    }

    pub fn from_int(v: i128) -> Self {
        Dyadic::new(v, 0)
    }

    fn from_parts(mantissa: Mantissa, exponent: i64) -> Self {
        match mantissa {
            Mantissa::Small(0) => Dyadic::zero(),
            Mantissa::Small(m) => {
                let tz = m.trailing_zeros();
                Dyadic {
                    mantissa: Mantissa::Small(m >> tz),
                    exponent: exponent - i64::from(tz),
                }
            }
            Mantissa::Big(m) => {
                let Some(tz) = m.trailing_zeros() else {
                    return Dyadic::zero();
                };
                let m = m >> tz;
                let exponent = exponent - tz as i64;
                match m.to_i128() {
                    Some(small) => Dyadic {
                        mantissa: Mantissa::Small(small),
                        exponent,
                    },
                    None => Dyadic {
                        mantissa: Mantissa::Big(m),
                        exponent,
                    },
                }
            }
        }
    }

    pub fn mantissa(&self) -> BigInt {
        self.mantissa.to_big()
    }

    /// Power of 1/2 in the normalized form; may be negative.
    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.mantissa, Mantissa::Small(0))
    }

    /// -1, 0 or +1.
    pub fn signum(&self) -> i32 {
        self.mantissa.signum()
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// `self · 2^k`.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent - k,
        }
    }

    /// `self / 2^k`.
    pub fn div_pow2(&self, k: i64) -> Self {
        self.mul_pow2(-k)
    }

    /// The integer `self · 2^k` if it is one.
    pub fn scaled_integer(&self, k: i64) -> Option<BigInt> {
        let e = self.exponent - k;
        let m = self.mantissa.to_big();
        if e <= 0 {
            Some(m << (-e) as usize)
        } else {
            None
        }
    }

    pub fn to_rational(&self) -> BigRational {
        let m = self.mantissa.to_big();
        if self.exponent >= 0 {
            BigRational::new(m, BigInt::one() << self.exponent as usize)
        } else {
            BigRational::from_integer(m << (-self.exponent) as usize)
        }
    }

    /// Nearest binary64 value, ties to even. Values too large for the format
    /// are an error; values below the subnormal range round to signed zero.
    pub fn to_f64(&self) -> Result<f64, Error> {
        if self.is_zero() {
            return Ok(0.0);
        }
        let negative = self.signum() < 0;
        let mag = self.mantissa.to_big().abs();
        let bits = mag.bits() as i64;
        // value = mag · 2^(-e) with mag in [2^(bits-1), 2^bits)
        let top = bits - 1 - self.exponent;
        let precision = if top >= -1022 { 53 } else { 53 - (-1022 - top) };
        let (rounded, scale) = if precision <= 0 {
            // below half the smallest subnormal unless exactly handled below
            let half_min = -1075;
            if top < half_min {
                (BigInt::zero(), 0)
            } else {
                // top == -1075: value in [2^-1075, 2^-1074)
                let exact_half = mag == (BigInt::one() << (bits - 1) as usize);
                if exact_half {
                    (BigInt::zero(), 0)
                } else {
                    (BigInt::one(), -1074)
                }
            }
        } else if bits <= precision {
            (mag, -self.exponent)
        } else {
            let shift = (bits - precision) as usize;
            let q: BigInt = &mag >> shift;
            let rem: BigInt = &mag - (&q << shift);
            let half = BigInt::one() << (shift - 1);
            let q = match rem.cmp(&half) {
                Ordering::Greater => q + 1,
                Ordering::Less => q,
                Ordering::Equal => {
                    if (&q & BigInt::one()).is_zero() {
                        q
                    } else {
                        q + 1
                    }
                }
            };
            (q, shift as i64 - self.exponent)
        };
        if rounded.is_zero() {
            return Ok(if negative { -0.0 } else { 0.0 });
        }
        let rbits = rounded.bits() as i64;
        if rbits - 1 + scale > 1023 {
            return Err(Error::FloatOverflow(self.to_string()));
        }
        // `rounded` has at most 53 significant bits, so this is exact.
        let base = rounded.to_f64().expect("at most 53 bits");
        let v = ldexp(base, scale);
        Ok(if negative { -v } else { v })
    }

    /// `log2 |self|`, accurate to float precision even far outside the
    /// binary64 range. Negative infinity for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let mag = self.mantissa.to_big().abs();
        let bits = mag.bits();
        let (lead, shift) = if bits > 64 {
            (
                (&mag >> (bits - 64) as usize).to_f64().expect("64 bits"),
                bits - 64,
            )
        } else {
            (mag.to_f64().expect("at most 64 bits"), 0)
        };
        lead.log2() + shift as f64 - self.exponent as f64
    }

    /// Exact conversion of a finite float.
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 0 { 1i128 } else { -1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = (bits & ((1u64 << 52) - 1)) as i128;
        let (m, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1 << 52), exp - 1075)
        };
        Some(Dyadic::new(sign * m, -e))
    }

    /// Exact terminating decimal expansion.
    pub fn to_decimal_string(&self) -> String {
        if self.exponent <= 0 {
            return (self.mantissa.to_big() << (-self.exponent) as usize).to_string();
        }
        let e = self.exponent as usize;
        // m / 2^e = m · 5^e / 10^e
        let scaled = self.mantissa.to_big().abs() * num_traits::pow(BigInt::from(5), e);
        let digits = scaled.to_string();
        let (int_part, frac_part) = if digits.len() > e {
            let split = digits.len() - e;
            (digits[..split].to_string(), digits[split..].to_string())
        } else {
            ("0".to_string(), format!("{digits:0>e$}"))
        };
        let sign = if self.signum() < 0 { "-" } else { "" };
        format!("{sign}{int_part}.{frac_part}")
    }

    fn aligned_big(&self, other: &Dyadic) -> (BigInt, BigInt, i64) {
        let e = self.exponent.max(other.exponent);
        let a = self.mantissa.to_big() << (e - self.exponent) as usize;
        let b = other.mantissa.to_big() << (e - other.exponent) as usize;
        (a, b, e)
    }

    fn add_ref(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if let (Mantissa::Small(a), Mantissa::Small(b)) = (&self.mantissa, &other.mantissa) {
            let e = self.exponent.max(other.exponent);
            let sa = shl_checked(*a, (e - self.exponent) as u64);
            let sb = shl_checked(*b, (e - other.exponent) as u64);
            if let (Some(sa), Some(sb)) = (sa, sb) {
                if let Some(s) = sa.checked_add(sb) {
                    return Dyadic::new(s, e);
                }
            }
        }
        let (a, b, e) = self.aligned_big(other);
        Dyadic::from_bigint(a + b, e)
    }

    fn mul_ref(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() || other.is_zero() {
            return Dyadic::zero();
        }
        let e = self.exponent + other.exponent;
        if let (Mantissa::Small(a), Mantissa::Small(b)) = (&self.mantissa, &other.mantissa) {
            if let Some(p) = a.checked_mul(*b) {
                return Dyadic::new(p, e);
            }
        }
        Dyadic::from_bigint(self.mantissa.to_big() * other.mantissa.to_big(), e)
    }

    fn neg_ref(&self) -> Dyadic {
        match &self.mantissa {
            Mantissa::Small(m) => match m.checked_neg() {
                Some(n) => Dyadic::new(n, self.exponent),
                None => Dyadic::from_bigint(-BigInt::from(*m), self.exponent),
            },
            Mantissa::Big(m) => Dyadic::from_bigint(-m.clone(), self.exponent),
        }
    }
}

fn ldexp(mut v: f64, mut k: i64) -> f64 {
    while k > 1000 {
        v *= 2f64.powi(1000);
        k -= 1000;
    }
    while k < -1000 {
        v *= 2f64.powi(-1000);
        k += 1000;
    }
    v * 2f64.powi(k as i32)
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::zero()
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if let (Mantissa::Small(a), Mantissa::Small(b)) = (&self.mantissa, &other.mantissa) {
            if self.exponent == other.exponent {
                return a.cmp(b);
            }
            let e = self.exponent.max(other.exponent);
            let sa = shl_checked(*a, (e - self.exponent) as u64);
            let sb = shl_checked(*b, (e - other.exponent) as u64);
            if let (Some(x), Some(y)) = (sa, sb) {
                return x.cmp(&y);
            }
        }
        let (a, b, _) = self.aligned_big(other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl $trait<&Dyadic> for &Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: &Dyadic) -> Dyadic {
                self.$inner(rhs)
            }
        }
        impl $trait<Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: Dyadic) -> Dyadic {
                self.$inner(&rhs)
            }
        }
        impl $trait<&Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: &Dyadic) -> Dyadic {
                self.$inner(rhs)
            }
        }
        impl $trait<Dyadic> for &Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: Dyadic) -> Dyadic {
                self.$inner(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Mul, mul, mul_ref);

impl Sub<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self.add_ref(&rhs.neg_ref())
    }
}

impl Sub<Dyadic> for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        &self - &rhs
    }
}

impl Sub<&Dyadic> for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        &self - rhs
    }
}

impl Sub<Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        self - &rhs
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        self.neg_ref()
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        self.neg_ref()
    }
}

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = self.add_ref(rhs);
    }
}

impl AddAssign<Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: Dyadic) {
        *self = self.add_ref(&rhs);
    }
}

impl SubAssign<&Dyadic> for Dyadic {
    fn sub_assign(&mut self, rhs: &Dyadic) {
        *self = &*self - rhs;
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Dyadic> for Dyadic {
    fn sum<I: Iterator<Item = &'a Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| acc + x)
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::new(i128::from(v), 0)
    }
}

/// Renders `m/2^e` for a positive exponent and a plain integer otherwise.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent > 0 {
            write!(f, "{}/2^{}", self.mantissa.to_big(), self.exponent)
        } else {
            write!(f, "{}", self.mantissa.to_big() << (-self.exponent) as usize)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({self})")
    }
}

/// Parses `m/2^e`, `m*2^-e` style is not accepted; plain integers are.
impl FromStr for Dyadic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::Parse(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            Some((m, den)) => {
                let m: BigInt = m.trim().parse().map_err(|_| bad())?;
                let e: i64 = den
                    .trim()
                    .strip_prefix("2^")
                    .ok_or_else(bad)?
                    .parse()
                    .map_err(|_| bad())?;
                Ok(Dyadic::from_bigint(m, e))
            }
            None => {
                let m: BigInt = s.parse().map_err(|_| bad())?;
                Ok(Dyadic::from_bigint(m, 0))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(m: i128, e: i64) -> Dyadic {
        Dyadic::new(m, e)
    }

    #[test]
    fn normalization() {
        let z = d(0, 5);
        assert!(z.is_zero());
        assert_eq!(z.exponent(), 0);
        let q = d(4, 4);
        assert_eq!(q.mantissa(), BigInt::from(1));
        assert_eq!(q.exponent(), 2);
        let n = d(-1, 3);
        assert_eq!(n.mantissa(), BigInt::from(-1));
        assert_eq!(n.exponent(), 3);
        // powers of two above one use a negative exponent
        assert_eq!(Dyadic::pow2(10).exponent(), -10);
        assert_eq!(Dyadic::pow2(10).to_string(), "1024");
    }

    #[test]
    fn field_ops() {
        assert_eq!(d(1, 2) + d(1, 2), d(1, 1));
        assert_eq!(d(-1, 3) * d(-1, 3), d(1, 6));
        assert_eq!(d(3, 3).cmp(&d(1, 1)), Ordering::Less);
        assert_eq!(-d(3, 3), d(-3, 3));
        assert_eq!(d(-3, 3).abs(), d(3, 3));
        assert_eq!(d(1, 1) - d(1, 1), Dyadic::zero());
    }

    #[test]
    fn promotes_to_bigint_and_back() {
        let big = Dyadic::new(i128::MAX, 0);
        let sq = &big * &big;
        assert!(matches!(sq.mantissa, Mantissa::Big(_)));
        let back = &sq - &sq;
        assert!(back.is_zero());
        // shifting far apart forces the big path in addition
        let tiny = Dyadic::pow2(-300);
        let sum = &Dyadic::one() + &tiny;
        assert_eq!(&sum - &tiny, Dyadic::one());
        assert_eq!(sum.exponent(), 300);
        assert!(Dyadic::pow2(-300) < Dyadic::pow2(-299));
        assert!(-Dyadic::pow2(200) < Dyadic::pow2(-299));
    }

    #[test]
    fn float_conversion() {
        assert_eq!(d(1, 4).to_f64().unwrap(), 0.0625);
        assert_eq!(Dyadic::zero().to_f64().unwrap(), 0.0);
        // |mu| for case (i) of the symmetrized coefficients at n = 3
        assert_eq!(Dyadic::pow2(-8).to_f64().unwrap(), 0.00390625);
        assert!(Dyadic::pow2(1024).to_f64().is_err());
        assert_eq!(Dyadic::pow2(1023).to_f64().unwrap(), 2f64.powi(1023));
        assert_eq!(Dyadic::pow2(-1074).to_f64().unwrap(), f64::from_bits(1));
        assert_eq!(Dyadic::pow2(-1075).to_f64().unwrap(), 0.0);
        assert_eq!(
            Dyadic::new(3, 1076).to_f64().unwrap(),
            f64::from_bits(1),
            "3/4 of the smallest subnormal rounds up"
        );
        // 2^53 + 1 is a tie, rounds to even 2^53
        let tie = Dyadic::new((1i128 << 53) + 1, 0);
        assert_eq!(tie.to_f64().unwrap(), 9007199254740992.0);
        let above = Dyadic::new((1i128 << 54) + 3, 1);
        assert_eq!(above.to_f64().unwrap(), 9007199254740994.0);
    }

    #[test]
    fn log2_magnitude() {
        assert_eq!(Dyadic::pow2(-3000).log2_abs(), -3000.0);
        assert_eq!(d(-3, 2).log2_abs(), 3f64.log2() - 2.0);
        assert_eq!(Dyadic::zero().log2_abs(), f64::NEG_INFINITY);
    }

    #[test]
    fn text_rendering() {
        assert_eq!(d(3, 3).to_string(), "3/2^3");
        assert_eq!(d(-3, 3).to_decimal_string(), "-0.375");
        assert_eq!(d(1, 4).to_decimal_string(), "0.0625");
        assert_eq!(d(5, 0).to_decimal_string(), "5");
        assert_eq!(d(5, 1).to_decimal_string(), "2.5");
        assert_eq!("3/2^3".parse::<Dyadic>().unwrap(), d(3, 3));
        assert_eq!("-12".parse::<Dyadic>().unwrap(), d(-3, -2));
        assert!("1/3".parse::<Dyadic>().is_err());
    }

    #[test]
    fn rational_view() {
        let r = d(-3, 3).to_rational();
        assert_eq!(r, BigRational::new(BigInt::from(-3), BigInt::from(8)));
        assert_eq!(
            Dyadic::pow2(3).to_rational(),
            BigRational::from_integer(BigInt::from(8))
        );
    }
}
