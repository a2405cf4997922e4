use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{parse_int, Embedding, RingParseError};

/// An element `a + b√2` of the ring Z[√2].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ZRoot2 {
    pub a: BigInt,
    pub b: BigInt,
}

impl ZRoot2 {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        Self { a: a.into(), b: b.into() }
    }

    pub fn from_int(a: impl Into<BigInt>) -> Self {
        Self::new(a, 0)
    }

    pub fn zero() -> Self {
        Self::new(0, 0)
    }

    pub fn one() -> Self {
        Self::new(1, 0)
    }

    pub fn sqrt2() -> Self {
        Self::new(0, 1)
    }

    /// The fundamental unit `1 + √2`.
    pub fn fundamental_unit() -> Self {
        Self::new(1, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// `(a + b√2)• = a − b√2`.
    pub fn galois_conj(&self) -> Self {
        Self { a: self.a.clone(), b: -&self.b }
    }

    /// Field norm `a² − 2b²`.
    pub fn norm(&self) -> BigInt {
        &self.a * &self.a - BigInt::from(2) * &self.b * &self.b
    }

    pub fn embed(&self, which: Embedding) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        match which {
            Embedding::Sigma1 => a + b * std::f64::consts::SQRT_2,
            Embedding::Sigma2 => a - b * std::f64::consts::SQRT_2,
        }
    }

    /// Exact sign of the real number `σ₁(self)`.
    pub fn signum_sigma1(&self) -> Ordering {
        let sa = self.a.sign();
        let sb = self.b.sign();
        use num_bigint::Sign::*;
        match (sa, sb) {
            (NoSign, NoSign) => Ordering::Equal,
            (Plus, Plus) | (Plus, NoSign) | (NoSign, Plus) => Ordering::Greater,
            (Minus, Minus) | (Minus, NoSign) | (NoSign, Minus) => Ordering::Less,
            // opposite signs: compare a² with 2b²
            (Plus, Minus) | (Minus, Plus) => {
                let lhs = &self.a * &self.a;
                let rhs = BigInt::from(2) * &self.b * &self.b;
                let a_dominates = lhs.cmp(&rhs);
                match a_dominates {
                    Ordering::Equal => Ordering::Equal,
                    Ordering::Greater => {
                        if sa == Plus {
                            Ordering::Greater
                        } else {
                            Ordering::Less
                        }
                    }
                    Ordering::Less => {
                        if sb == Plus {
                            Ordering::Greater
                        } else {
                            Ordering::Less
                        }
                    }
                }
            }
        }
    }

    pub fn signum(&self, which: Embedding) -> Ordering {
        match which {
            Embedding::Sigma1 => self.signum_sigma1(),
            Embedding::Sigma2 => self.galois_conj().signum_sigma1(),
        }
    }

    /// `|σ(self)|` realised as a ring element: `self` or `-self`.
    pub fn abs_at(&self, which: Embedding) -> Self {
        if self.signum(which) == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    /// Exact comparison of `σ(self)` and `σ(other)`.
    pub fn cmp_at(&self, other: &Self, which: Embedding) -> Ordering {
        (self - other).signum(which)
    }

    pub fn is_totally_nonnegative(&self) -> bool {
        self.signum_sigma1() != Ordering::Less && self.galois_conj().signum_sigma1() != Ordering::Less
    }

    pub fn is_divisible_by_sqrt2(&self) -> bool {
        self.a.is_even()
    }

    /// `(a + b√2)/√2 = b + (a/2)√2`; requires `a` even.
    pub fn div_sqrt2(&self) -> Option<Self> {
        if !self.is_divisible_by_sqrt2() {
            return None;
        }
        Some(Self { a: self.b.clone(), b: &self.a / 2 })
    }

    pub fn mul_sqrt2(&self) -> Self {
        Self { a: BigInt::from(2) * &self.b, b: self.a.clone() }
    }

    /// Order of the prime √2 in `self`; `None` for zero.
    pub fn ord_sqrt2(&self) -> Option<u64> {
        if self.is_zero() {
            return None;
        }
        let mut x = self.clone();
        let mut k = 0;
        while let Some(y) = x.div_sqrt2() {
            x = y;
            k += 1;
        }
        Some(k)
    }

    pub fn is_divisible_by_int(&self, m: &BigInt) -> bool {
        (&self.a % m).is_zero() && (&self.b % m).is_zero()
    }

    pub fn div_int(&self, m: &BigInt) -> Self {
        Self { a: &self.a / m, b: &self.b / m }
    }

    pub fn scale(&self, m: &BigInt) -> Self {
        Self { a: &self.a * m, b: &self.b * m }
    }

    /// Exact quotient, if `other` divides `self` in Z[√2].
    pub fn div_exact(&self, other: &Self) -> Option<Self> {
        let n = other.norm();
        if n.is_zero() {
            return None;
        }
        let p = self * &other.galois_conj();
        if p.is_divisible_by_int(&n) {
            Some(p.div_int(&n))
        } else {
            None
        }
    }

    /// Euclidean division with respect to `|N(·)|`.
    pub fn div_rem(&self, other: &Self) -> (Self, Self) {
        let n = other.norm();
        assert!(!n.is_zero(), "division by zero in Z[√2]");
        let p = self * &other.galois_conj();
        let q = Self { a: round_div(&p.a, &n), b: round_div(&p.b, &n) };
        let r = self - &(&q * other);
        (q, r)
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let mut x = self.clone();
        let mut y = other.clone();
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y);
            x = y;
            y = r;
        }
        x
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// `(1+√2)^i` for any integer `i`.
    pub fn unit_pow(i: i64) -> Self {
        if i >= 0 {
            Self::fundamental_unit().pow(i as u32)
        } else {
            // (1+√2)^{-1} = √2 − 1
            Self::new(-1, 1).pow((-i) as u32)
        }
    }

    /// Square root in Z[√2] when `self` is a perfect square.
    pub fn sqrt_exact(&self) -> Option<Self> {
        if !self.is_totally_nonnegative() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let s1 = self.embed(Embedding::Sigma1).max(0.0).sqrt();
        let s2 = self.embed(Embedding::Sigma2).max(0.0).sqrt();
        for sign in [1.0, -1.0] {
            let p = (s1 + sign * s2) / 2.0;
            let q = (s1 - sign * s2) / (2.0 * std::f64::consts::SQRT_2);
            let (pr, qr) = (p.round(), q.round());
            for dp in -1..=1 {
                for dq in -1..=1 {
                    let cand = Self::new(pr as i64 + dp, qr as i64 + dq);
                    if &(&cand * &cand) == self {
                        return Some(cand.abs_at(Embedding::Sigma1));
                    }
                }
            }
        }
        None
    }
}

fn round_div(x: &BigInt, n: &BigInt) -> BigInt {
    // nearest integer to x/n
    let two = BigInt::from(2);
    let (q, r) = x.div_mod_floor(n);
    let r2 = &r * &two;
    if n.is_positive() {
        if r2 > *n {
            q + 1
        } else {
            q
        }
    } else if r2 < *n {
        q + 1
    } else {
        q
    }
}

macro_rules! forward_binop {
    ($t:ty, $tr:ident, $m:ident) => {
        impl $tr<$t> for $t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&$t> for $t {
            type Output = $t;
            fn $m(self, rhs: &$t) -> $t {
                (&self).$m(rhs)
            }
        }
        impl $tr<$t> for &$t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t {
                self.$m(&rhs)
            }
        }
    };
}
pub(crate) use forward_binop;

impl Add<&ZRoot2> for &ZRoot2 {
    type Output = ZRoot2;
    fn add(self, rhs: &ZRoot2) -> ZRoot2 {
        ZRoot2 { a: &self.a + &rhs.a, b: &self.b + &rhs.b }
    }
}

impl Sub<&ZRoot2> for &ZRoot2 {
    type Output = ZRoot2;
    fn sub(self, rhs: &ZRoot2) -> ZRoot2 {
        ZRoot2 { a: &self.a - &rhs.a, b: &self.b - &rhs.b }
    }
}

impl Mul<&ZRoot2> for &ZRoot2 {
    type Output = ZRoot2;
    fn mul(self, rhs: &ZRoot2) -> ZRoot2 {
        let two = BigInt::from(2);
        ZRoot2 {
            a: &self.a * &rhs.a + two * &self.b * &rhs.b,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }
}

forward_binop!(ZRoot2, Add, add);
forward_binop!(ZRoot2, Sub, sub);
forward_binop!(ZRoot2, Mul, mul);

impl Neg for &ZRoot2 {
    type Output = ZRoot2;
    fn neg(self) -> ZRoot2 {
        ZRoot2 { a: -&self.a, b: -&self.b }
    }
}

impl Neg for ZRoot2 {
    type Output = ZRoot2;
    fn neg(self) -> ZRoot2 {
        -&self
    }
}

impl From<i64> for ZRoot2 {
    fn from(a: i64) -> Self {
        Self::from_int(a)
    }
}

impl fmt::Display for ZRoot2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.b.is_negative() { '-' } else { '+' };
        write!(f, "{}{}{}w2", self.a, sign, self.b.abs())
    }
}

impl FromStr for ZRoot2 {
    type Err = RingParseError;

    /// Accepts `a`, `a±bw2` and `±bw2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let err = || RingParseError(s.to_string());
        let Some(body) = s.strip_suffix("w2") else {
            return Ok(Self::from_int(parse_int(s).ok_or_else(err)?));
        };
        // split at the last sign that is not the leading one
        let split = body
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(i, _)| i)
            .last();
        match split {
            Some(i) => {
                let a = parse_int(&body[..i]).ok_or_else(err)?;
                let b = parse_coeff(&body[i..]).ok_or_else(err)?;
                Ok(Self { a, b })
            }
            None => Ok(Self { a: BigInt::zero(), b: parse_coeff(body).ok_or_else(err)? }),
        }
    }
}

/// Coefficient in front of a basis symbol; a bare sign means ±1.
pub(crate) fn parse_coeff(s: &str) -> Option<BigInt> {
    match s {
        "" | "+" => Some(BigInt::one()),
        "-" => Some(-BigInt::one()),
        _ => parse_int(s),
    }
}
