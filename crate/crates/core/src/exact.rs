//! Exact 2×2 matrices over Z[ζ₈, 1/√2, 1/√p].

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::rings::ZOmega;
use crate::su2::UnitaryChannel;

/// `e / (√2^k2 · √p^kp)` with entries in row-major order. `p = 1` whenever `kp = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactMatrix {
    e: [ZOmega; 4],
    k2: u32,
    kp: u32,
    p: u64,
}

/// Hashable identity of a channel: the matrix up to ζ₈ phases.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelKey {
    pub entries: [ZOmega; 4],
    pub k2: u32,
    pub kp: u32,
    pub p: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error("mismatched denominator primes {0} and {1}")]
    PrimeMismatch(u64, u64),
}

impl ExactMatrix {
    pub fn new(e: [ZOmega; 4], k2: u32, kp: u32, p: u64) -> Self {
        let mut m = Self { e, k2, kp, p: if kp == 0 { 1 } else { p } };
        m.normalize();
        m
    }

    pub fn identity() -> Self {
        Self::new([ZOmega::one(), ZOmega::zero(), ZOmega::zero(), ZOmega::one()], 0, 0, 1)
    }

    fn normalize(&mut self) {
        while self.k2 > 0 && self.e.iter().all(ZOmega::is_divisible_by_sqrt2) {
            for x in self.e.iter_mut() {
                *x = x.div_sqrt2().expect("checked");
            }
            self.k2 -= 1;
        }
        let pb = BigInt::from(self.p);
        while self.kp >= 2 && self.e.iter().all(|x| x.is_divisible_by_int(&pb)) {
            for x in self.e.iter_mut() {
                *x = x.div_int(&pb);
            }
            self.kp -= 2;
        }
        if self.kp == 0 {
            self.p = 1;
        }
    }

    pub fn entries(&self) -> &[ZOmega; 4] {
        &self.e
    }

    pub fn k2(&self) -> u32 {
        self.k2
    }

    pub fn kp(&self) -> u32 {
        self.kp
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, ExactError> {
        let p = match (self.p, other.p) {
            (1, q) | (q, 1) => q,
            (a, b) if a == b => a,
            (a, b) => return Err(ExactError::PrimeMismatch(a, b)),
        };
        let [a, b, c, d] = &self.e;
        let [w, x, y, z] = &other.e;
        let e = [a * w + b * y, a * x + b * z, c * w + d * y, c * x + d * z];
        Ok(Self::new(e, self.k2 + other.k2, self.kp + other.kp, p))
    }

    /// Matrix product; panics on mismatched primes.
    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("compatible denominators")
    }

    pub fn adjoint(&self) -> Self {
        let [a, b, c, d] = &self.e;
        Self { e: [a.conj(), c.conj(), b.conj(), d.conj()], k2: self.k2, kp: self.kp, p: self.p }
    }

    pub fn scale_phase(&self, j: i64) -> Self {
        Self { e: self.e.clone().map(|x| x.mul_zeta_pow(j)), ..self.clone() }
    }

    pub fn denominator(&self) -> f64 {
        2f64.sqrt().powi(self.k2 as i32) * (self.p as f64).sqrt().powi(self.kp as i32)
    }

    pub fn to_complex(&self) -> [[Complex64; 2]; 2] {
        let s = self.denominator();
        let v: [Complex64; 4] = std::array::from_fn(|i| self.e[i].to_complex() / s);
        [[v[0], v[1]], [v[2], v[3]]]
    }

    pub fn channel(&self) -> UnitaryChannel {
        UnitaryChannel::from_matrix(&self.to_complex()).expect("exact matrix is unitary")
    }

    /// Exact unitarity: `e·e† = 2^k2·p^kp·I`.
    pub fn is_unitary(&self) -> bool {
        let g = ExactMatrix { e: self.e.clone(), k2: 0, kp: 0, p: 1 };
        let prod = g.mul_raw(&g.adjoint());
        let n = ZOmega::from_int((BigInt::one() << self.k2) * BigInt::from(self.p).pow(self.kp));
        prod[0] == n && prod[3] == n && prod[1].is_zero() && prod[2].is_zero()
    }

    fn mul_raw(&self, other: &Self) -> [ZOmega; 4] {
        let [a, b, c, d] = &self.e;
        let [w, x, y, z] = &other.e;
        [a * w + b * y, a * x + b * z, c * w + d * y, c * x + d * z]
    }

    pub fn channel_key(&self) -> ChannelKey {
        let entries = (0..8)
            .map(|j| self.e.clone().map(|x| x.mul_zeta_pow(j)))
            .min()
            .expect("eight phases");
        ChannelKey { entries, k2: self.k2, kp: self.kp, p: self.p }
    }

    pub fn same_channel(&self, other: &Self) -> bool {
        self.channel_key() == other.channel_key()
    }
}

impl fmt::Display for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = &self.e;
        write!(f, "[{a},{b};{c},{d}]/w2^{}", self.k2)?;
        if self.kp > 0 {
            write!(f, "/sqrt{}^{}", self.p, self.kp)?;
        }
        Ok(())
    }
}

/// Wire form of an exact matrix: entries in ZOmega text form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactMatrixDto {
    pub entries: [String; 4],
    pub k2: u32,
    pub kp: u32,
    pub p: u64,
}

impl From<&ExactMatrix> for ExactMatrixDto {
    fn from(m: &ExactMatrix) -> Self {
        Self { entries: m.e.clone().map(|x| x.to_string()), k2: m.k2, kp: m.kp, p: m.p }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h() -> ExactMatrix {
        ExactMatrix::new(
            [ZOmega::one(), ZOmega::one(), ZOmega::one(), ZOmega::from_int(-1)],
            1,
            0,
            1,
        )
    }

    #[test]
    fn hadamard_squares_to_identity() {
        let hh = h().mul(&h());
        assert_eq!(hh, ExactMatrix::identity());
        assert!(h().is_unitary());
    }

    #[test]
    fn phase_invariant_key() {
        let m = h().scale_phase(3);
        assert!(m.same_channel(&h()));
        assert_ne!(m, h());
    }

    #[test]
    fn normalization_reduces_p() {
        let five = ZOmega::from_int(5);
        let m = ExactMatrix::new([five.clone(), ZOmega::zero(), ZOmega::zero(), five], 0, 2, 5);
        assert_eq!(m, ExactMatrix::identity());
        assert_eq!(m.p(), 1);
    }
}
