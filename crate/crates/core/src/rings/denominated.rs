use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;

use super::{ZOmega, ZI};

/// Numerator rings admitting the reductions needed by [`Denominated`].
pub trait Numerator: Clone + PartialEq + fmt::Debug {
    fn is_zero(&self) -> bool;
    /// `self/√2` if it stays in the ring.
    fn div_sqrt2(&self) -> Option<Self>;
    fn div_int(&self, m: &BigInt) -> Option<Self>;
    fn mul(&self, other: &Self) -> Self;
    fn to_complex(&self) -> Complex64;
}

impl Numerator for ZOmega {
    fn is_zero(&self) -> bool {
        ZOmega::is_zero(self)
    }
    fn div_sqrt2(&self) -> Option<Self> {
        ZOmega::div_sqrt2(self)
    }
    fn div_int(&self, m: &BigInt) -> Option<Self> {
        self.is_divisible_by_int(m).then(|| ZOmega::div_int(self, m))
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn to_complex(&self) -> Complex64 {
        ZOmega::to_complex(self)
    }
}

impl Numerator for ZI {
    fn is_zero(&self) -> bool {
        ZI::is_zero(self)
    }
    // √2 ∉ Z[i]; only integer factors 2 = (√2)² are removable.
    fn div_sqrt2(&self) -> Option<Self> {
        None
    }
    fn div_int(&self, m: &BigInt) -> Option<Self> {
        self.is_divisible_by_int(m).then(|| ZI::div_int(self, m))
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn to_complex(&self) -> Complex64 {
        ZI::to_complex(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DenomBase {
    Two,
    Five,
}

impl DenomBase {
    pub fn value(self) -> u64 {
        match self {
            DenomBase::Two => 2,
            DenomBase::Five => 5,
        }
    }
}

/// `numerator / √base^k`, always kept with `k` minimal.
#[derive(Clone, Debug, PartialEq)]
pub struct Denominated<N: Numerator> {
    numerator: N,
    base: DenomBase,
    k: u32,
}

impl<N: Numerator> Denominated<N> {
    pub fn new(numerator: N, base: DenomBase, k: u32) -> Self {
        let mut out = Self { numerator, base, k };
        out.reduce();
        out
    }

    fn reduce(&mut self) {
        if self.numerator.is_zero() {
            self.k = 0;
            return;
        }
        let b = BigInt::from(self.base.value());
        loop {
            if self.k >= 1 && self.base == DenomBase::Two {
                if let Some(n) = self.numerator.div_sqrt2() {
                    self.numerator = n;
                    self.k -= 1;
                    continue;
                }
            }
            if self.k >= 2 {
                if let Some(n) = self.numerator.div_int(&b) {
                    self.numerator = n;
                    self.k -= 2;
                    continue;
                }
            }
            break;
        }
    }

    pub fn numerator(&self) -> &N {
        &self.numerator
    }

    pub fn base(&self) -> DenomBase {
        self.base
    }

    /// Least denominator exponent; zero for the zero element.
    pub fn lde(&self) -> u32 {
        self.k
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.base, other.base, "mismatched denominator bases");
        Self::new(self.numerator.mul(&other.numerator), self.base, self.k + other.k)
    }

    pub fn to_complex(&self) -> Complex64 {
        let s = (self.base.value() as f64).sqrt().powi(self.k as i32);
        self.numerator.to_complex() / s
    }
}

impl Denominated<ZOmega> {
    /// `√2 · self`.
    pub fn mul_sqrt2(&self) -> Self {
        assert_eq!(self.base, DenomBase::Two);
        if self.k >= 1 {
            Self::new(self.numerator.clone(), self.base, self.k - 1)
        } else {
            Self::new(self.numerator.mul_sqrt2(), self.base, 0)
        }
    }
}
