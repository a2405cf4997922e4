use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::zroot2::{forward_binop, parse_coeff};
use super::{parse_int, RingParseError, ZOmega};

/// A Gaussian integer `re + im·i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ZI {
    pub re: BigInt,
    pub im: BigInt,
}

impl ZI {
    pub fn new(re: impl Into<BigInt>, im: impl Into<BigInt>) -> Self {
        Self { re: re.into(), im: im.into() }
    }

    pub fn zero() -> Self {
        Self::new(0, 0)
    }

    pub fn one() -> Self {
        Self::new(1, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -&self.im }
    }

    pub fn norm(&self) -> BigInt {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_divisible_by_int(&self, m: &BigInt) -> bool {
        (&self.re % m).is_zero() && (&self.im % m).is_zero()
    }

    pub fn div_int(&self, m: &BigInt) -> Self {
        Self { re: &self.re / m, im: &self.im / m }
    }

    /// Divisibility by `1 + i`, the prime above 2.
    pub fn is_divisible_by_1pi(&self) -> bool {
        (&self.re + &self.im).is_even()
    }

    pub fn div_exact(&self, other: &Self) -> Option<Self> {
        let n = other.norm();
        if n.is_zero() {
            return None;
        }
        let p = self * &other.conj();
        p.is_divisible_by_int(&n).then(|| p.div_int(&n))
    }

    pub fn to_zomega(&self) -> ZOmega {
        ZOmega::gaussian(self.re.clone(), self.im.clone())
    }

    pub fn to_complex(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl Add<&ZI> for &ZI {
    type Output = ZI;
    fn add(self, rhs: &ZI) -> ZI {
        ZI { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl Sub<&ZI> for &ZI {
    type Output = ZI;
    fn sub(self, rhs: &ZI) -> ZI {
        ZI { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl Mul<&ZI> for &ZI {
    type Output = ZI;
    fn mul(self, rhs: &ZI) -> ZI {
        ZI {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

forward_binop!(ZI, Add, add);
forward_binop!(ZI, Sub, sub);
forward_binop!(ZI, Mul, mul);

impl Neg for &ZI {
    type Output = ZI;
    fn neg(self) -> ZI {
        ZI { re: -&self.re, im: -&self.im }
    }
}

impl Neg for ZI {
    type Output = ZI;
    fn neg(self) -> ZI {
        -&self
    }
}

impl fmt::Display for ZI {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.im.is_negative() { '-' } else { '+' };
        write!(f, "{}{}{}i", self.re, sign, self.im.abs())
    }
}

impl FromStr for ZI {
    type Err = RingParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let err = || RingParseError(s.to_string());
        let Some(body) = s.strip_suffix('i') else {
            return Ok(Self { re: parse_int(s).ok_or_else(err)?, im: BigInt::zero() });
        };
        let split = body
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(i, _)| i)
            .last();
        match split {
            Some(i) => Ok(Self {
                re: parse_int(&body[..i]).ok_or_else(err)?,
                im: parse_coeff(&body[i..]).ok_or_else(err)?,
            }),
            None => Ok(Self { re: BigInt::zero(), im: parse_coeff(body).ok_or_else(err)? }),
        }
    }
}
