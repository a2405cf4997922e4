use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::zroot2::forward_binop;
use super::{Embedding, ZRoot2};

/// An element `num / den` of Q(√2) with `den > 0` and `gcd(a, b, den) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QSqrt2 {
    num: ZRoot2,
    den: BigInt,
}

impl QSqrt2 {
    pub fn new(num: ZRoot2, den: impl Into<BigInt>) -> Self {
        let den = den.into();
        assert!(!den.is_zero(), "zero denominator");
        let mut out = Self { num, den };
        out.normalize();
        out
    }

    pub fn from_int(x: impl Into<BigInt>) -> Self {
        Self::new(ZRoot2::from_int(x), 1)
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// `n / d` for ring elements; `None` if `d = 0`.
    pub fn from_ratio(n: &ZRoot2, d: &ZRoot2) -> Option<Self> {
        let nd = d.norm();
        if nd.is_zero() {
            return None;
        }
        Some(Self::new(n * &d.galois_conj(), nd))
    }

    fn normalize(&mut self) {
        if self.den.is_negative() {
            self.den = -&self.den;
            self.num = -&self.num;
        }
        let g = self.num.a.gcd(&self.num.b).gcd(&self.den);
        if !g.is_one() && !g.is_zero() {
            self.num = self.num.div_int(&g);
            self.den = &self.den / &g;
        }
        if self.num.is_zero() {
            self.den = BigInt::one();
        }
    }

    pub fn numerator(&self) -> &ZRoot2 {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn galois_conj(&self) -> Self {
        Self { num: self.num.galois_conj(), den: self.den.clone() }
    }

    pub fn signum(&self, which: Embedding) -> Ordering {
        self.num.signum(which)
    }

    pub fn cmp_at(&self, other: &Self, which: Embedding) -> Ordering {
        (self - other).signum(which)
    }

    pub fn abs_at(&self, which: Embedding) -> Self {
        if self.signum(which) == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Option<Self> {
        let n = self.num.norm();
        if n.is_zero() {
            return None;
        }
        Some(Self::new(self.num.galois_conj().scale(&self.den), n))
    }

    /// Rational field norm `σ₁(x)·σ₂(x)`, as `(numerator, denominator)`.
    pub fn norm(&self) -> (BigInt, BigInt) {
        let n = self.num.norm();
        let d = &self.den * &self.den;
        let g = n.gcd(&d);
        if g.is_zero() {
            (n, d)
        } else {
            (n / &g, d / g)
        }
    }

    pub fn embed(&self, which: Embedding) -> f64 {
        let d = self.den.to_f64().unwrap_or(f64::NAN);
        if d.is_finite() {
            return self.num.embed(which) / d;
        }
        // huge denominators: scale down by a common power of two first
        let bits = self.den.bits().saturating_sub(900);
        let shift = |x: &BigInt| (x >> bits).to_f64().unwrap_or(f64::NAN);
        let a = shift(&self.num.a);
        let b = shift(&self.num.b);
        let s = match which {
            Embedding::Sigma1 => 1.0,
            Embedding::Sigma2 => -1.0,
        };
        (a + s * b * std::f64::consts::SQRT_2) / shift(&self.den)
    }

    pub fn to_f64(&self) -> f64 {
        self.embed(Embedding::Sigma1)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl Add<&QSqrt2> for &QSqrt2 {
    type Output = QSqrt2;
    fn add(self, rhs: &QSqrt2) -> QSqrt2 {
        QSqrt2::new(self.num.scale(&rhs.den) + rhs.num.scale(&self.den), &self.den * &rhs.den)
    }
}

impl Sub<&QSqrt2> for &QSqrt2 {
    type Output = QSqrt2;
    fn sub(self, rhs: &QSqrt2) -> QSqrt2 {
        QSqrt2::new(self.num.scale(&rhs.den) - rhs.num.scale(&self.den), &self.den * &rhs.den)
    }
}

impl Mul<&QSqrt2> for &QSqrt2 {
    type Output = QSqrt2;
    fn mul(self, rhs: &QSqrt2) -> QSqrt2 {
        QSqrt2::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

forward_binop!(QSqrt2, Add, add);
forward_binop!(QSqrt2, Sub, sub);
forward_binop!(QSqrt2, Mul, mul);

impl Neg for &QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        QSqrt2 { num: -&self.num, den: self.den.clone() }
    }
}

impl Neg for QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        -&self
    }
}

impl From<ZRoot2> for QSqrt2 {
    fn from(x: ZRoot2) -> Self {
        Self::new(x, 1)
    }
}

impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/{}", self.num, self.den)
        }
    }
}
