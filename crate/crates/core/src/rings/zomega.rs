use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::zroot2::{forward_binop, parse_coeff};
use super::{Embedding, RingParseError, ZRoot2};

/// An element `c0 + c1·ζ + c2·ζ² + c3·ζ³` of Z[ζ₈], with `ζ⁴ = −1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ZOmega {
    pub c: [BigInt; 4],
}

impl ZOmega {
    pub fn new(c0: impl Into<BigInt>, c1: impl Into<BigInt>, c2: impl Into<BigInt>, c3: impl Into<BigInt>) -> Self {
        Self { c: [c0.into(), c1.into(), c2.into(), c3.into()] }
    }

    pub fn zero() -> Self {
        Self::new(0, 0, 0, 0)
    }

    pub fn one() -> Self {
        Self::new(1, 0, 0, 0)
    }

    pub fn zeta() -> Self {
        Self::new(0, 1, 0, 0)
    }

    pub fn i() -> Self {
        Self::new(0, 0, 1, 0)
    }

    pub fn sqrt2() -> Self {
        Self::new(0, 1, 0, -1)
    }

    /// Gaussian integer `a + b·i`.
    pub fn gaussian(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        Self::new(a, 0, b, 0)
    }

    pub fn from_int(a: impl Into<BigInt>) -> Self {
        Self::new(a, 0, 0, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    /// `x + y√2 ↦ (x, y, 0, −y)`.
    pub fn from_zroot2(x: &ZRoot2) -> Self {
        Self { c: [x.a.clone(), x.b.clone(), BigInt::zero(), -&x.b] }
    }

    /// The element as `x + y√2`, if it is real.
    pub fn to_zroot2(&self) -> Option<ZRoot2> {
        if self.c[2].is_zero() && self.c[1] == -&self.c[3] {
            Some(ZRoot2 { a: self.c[0].clone(), b: self.c[1].clone() })
        } else {
            None
        }
    }

    /// Gaussian part `(a, b)` if the element lies in Z[i].
    pub fn to_gaussian(&self) -> Option<(BigInt, BigInt)> {
        if self.c[1].is_zero() && self.c[3].is_zero() {
            Some((self.c[0].clone(), self.c[2].clone()))
        } else {
            None
        }
    }

    /// Complex conjugation `ζ ↦ ζ⁷`.
    pub fn conj(&self) -> Self {
        Self { c: [self.c[0].clone(), -&self.c[3], -&self.c[2], -&self.c[1]] }
    }

    /// The automorphism `ζ ↦ −ζ`: fixes `i`, sends `√2 ↦ −√2`.
    pub fn bullet(&self) -> Self {
        Self { c: [self.c[0].clone(), -&self.c[1], self.c[2].clone(), -&self.c[3]] }
    }

    /// `self · ζʲ`.
    pub fn mul_zeta_pow(&self, j: i64) -> Self {
        let j = j.rem_euclid(8) as usize;
        let mut out = self.clone();
        for _ in 0..j {
            out = Self { c: [-&out.c[3], out.c[0].clone(), out.c[1].clone(), out.c[2].clone()] };
        }
        out
    }

    /// `|self|²` as an element of Z[√2].
    pub fn norm_sq(&self) -> ZRoot2 {
        (self * &self.conj()).to_zroot2().expect("z·z̄ is real")
    }

    pub fn is_divisible_by_sqrt2(&self) -> bool {
        (&self.c[0] - &self.c[2]).is_even() && (&self.c[1] - &self.c[3]).is_even()
    }

    pub fn div_sqrt2(&self) -> Option<Self> {
        if !self.is_divisible_by_sqrt2() {
            return None;
        }
        let c = &self.c;
        Some(Self {
            c: [
                (&c[1] - &c[3]) / 2,
                (&c[0] + &c[2]) / 2,
                (&c[1] + &c[3]) / 2,
                (&c[2] - &c[0]) / 2,
            ],
        })
    }

    pub fn mul_sqrt2(&self) -> Self {
        let c = &self.c;
        Self { c: [&c[1] - &c[3], &c[0] + &c[2], &c[1] + &c[3], &c[2] - &c[0]] }
    }

    pub fn is_divisible_by_int(&self, m: &BigInt) -> bool {
        self.c.iter().all(|x| (x % m).is_zero())
    }

    pub fn div_int(&self, m: &BigInt) -> Self {
        Self { c: std::array::from_fn(|i| &self.c[i] / m) }
    }

    pub fn scale(&self, m: &BigInt) -> Self {
        Self { c: std::array::from_fn(|i| &self.c[i] * m) }
    }

    pub fn scale_zroot2(&self, x: &ZRoot2) -> Self {
        self * &Self::from_zroot2(x)
    }

    /// Exact quotient by a Z[√2] element, if it divides `self`.
    pub fn div_zroot2(&self, x: &ZRoot2) -> Option<Self> {
        let n = x.norm();
        if n.is_zero() {
            return None;
        }
        let p = self.scale_zroot2(&x.galois_conj());
        p.is_divisible_by_int(&n).then(|| p.div_int(&n))
    }

    /// Exact quotient in Z[ζ₈], if `other` divides `self`.
    pub fn div_exact(&self, other: &Self) -> Option<Self> {
        let n = other.norm_sq();
        if n.is_zero() {
            return None;
        }
        (self * &other.conj()).div_zroot2(&n)
    }

    pub fn embed(&self, which: Embedding) -> Complex64 {
        let z = match which {
            Embedding::Sigma1 => self.clone(),
            Embedding::Sigma2 => self.bullet(),
        };
        let f: [f64; 4] = std::array::from_fn(|i| z.c[i].to_f64().unwrap_or(f64::NAN));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(f[0] + h * (f[1] - f[3]), f[2] + h * (f[1] + f[3]))
    }

    pub fn to_complex(&self) -> Complex64 {
        self.embed(Embedding::Sigma1)
    }

    /// Largest absolute coefficient, as a rough size measure.
    pub fn max_abs_coeff(&self) -> BigInt {
        self.c.iter().map(|x| x.abs()).max().unwrap_or_default()
    }
}

impl Add<&ZOmega> for &ZOmega {
    type Output = ZOmega;
    fn add(self, rhs: &ZOmega) -> ZOmega {
        ZOmega { c: std::array::from_fn(|i| &self.c[i] + &rhs.c[i]) }
    }
}

impl Sub<&ZOmega> for &ZOmega {
    type Output = ZOmega;
    fn sub(self, rhs: &ZOmega) -> ZOmega {
        ZOmega { c: std::array::from_fn(|i| &self.c[i] - &rhs.c[i]) }
    }
}

impl Mul<&ZOmega> for &ZOmega {
    type Output = ZOmega;
    fn mul(self, rhs: &ZOmega) -> ZOmega {
        let mut out: [BigInt; 4] = Default::default();
        for i in 0..4 {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..4 {
                let p = &self.c[i] * &rhs.c[j];
                let k = i + j;
                if k < 4 {
                    out[k] += p;
                } else {
                    out[k - 4] -= p;
                }
            }
        }
        ZOmega { c: out }
    }
}

forward_binop!(ZOmega, Add, add);
forward_binop!(ZOmega, Sub, sub);
forward_binop!(ZOmega, Mul, mul);

impl Neg for &ZOmega {
    type Output = ZOmega;
    fn neg(self) -> ZOmega {
        ZOmega { c: std::array::from_fn(|i| -&self.c[i]) }
    }
}

impl Neg for ZOmega {
    type Output = ZOmega;
    fn neg(self) -> ZOmega {
        -&self
    }
}

impl fmt::Display for ZOmega {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.c[0])?;
        for (k, sym) in [(1, "z"), (2, "z2"), (3, "z3")] {
            let x = &self.c[k];
            let sign = if x.is_negative() { '-' } else { '+' };
            write!(f, "{}{}{}", sign, x.abs(), sym)?;
        }
        Ok(())
    }
}

impl FromStr for ZOmega {
    type Err = RingParseError;

    /// Sum of terms `n`, `nz`, `nz2`, `nz3` in any order.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let err = || RingParseError(s.to_string());
        if t.is_empty() {
            return Err(err());
        }
        let mut starts: Vec<usize> = t
            .char_indices()
            .filter(|&(i, c)| i > 0 && (c == '+' || c == '-'))
            .map(|(i, _)| i)
            .collect();
        starts.insert(0, 0);
        starts.push(t.len());
        let mut c: [BigInt; 4] = Default::default();
        for w in starts.windows(2) {
            let term = &t[w[0]..w[1]];
            let (body, k) = if let Some(b) = term.strip_suffix("z3") {
                (b, 3)
            } else if let Some(b) = term.strip_suffix("z2") {
                (b, 2)
            } else if let Some(b) = term.strip_suffix('z') {
                (b, 1)
            } else {
                (term, 0)
            };
            let v = if k == 0 { super::parse_int(body) } else { parse_coeff(body) };
            c[k] += v.ok_or_else(err)?;
        }
        Ok(ZOmega { c })
    }
}
