//! Projective single-qubit unitary channels as sign-canonical unit quaternions.
//!
//! A quaternion `(a, b, c, d)` stands for `U = aI + ibZ − icY + idX`, i.e. the matrix
//! `[[a+ib, −c+id], [c+id, a−ib]]`.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rings::{Embedding, ZRoot2};

const CANON_EPS: f64 = 1e-12;

/// Quaternion product matching 2×2 matrix multiplication of the layout above.
pub fn quat_mul<T>(x: &[T; 4], y: &[T; 4]) -> [T; 4]
where
    for<'a> &'a T: Mul<&'a T, Output = T>,
    T: Add<Output = T> + Sub<Output = T>,
{
    let [a1, b1, c1, d1] = x;
    let [a2, b2, c2, d2] = y;
    [
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 - c1 * d2 + d1 * c2,
        c1 * a2 - d1 * b2 + a1 * c2 + b1 * d2,
        c1 * b2 + d1 * a2 + a1 * d2 - b1 * c2,
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitaryChannel {
    q: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Su2Error {
    #[error("zero quaternion")]
    Zero,
    #[error("invalid quaternion point: {0}")]
    InvalidPoint(String),
    #[error("cannot parse channel from {0:?}")]
    Parse(String),
    #[error("matrix is not unitary")]
    NotUnitary,
}

impl UnitaryChannel {
    /// Normalizes and sign-canonicalizes an arbitrary nonzero 4-vector.
    pub fn new(q: [f64; 4]) -> Result<Self, Su2Error> {
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Su2Error::Zero);
        }
        Ok(Self::canonical(q.map(|x| x / n)))
    }

    /// Sign-canonicalizes an already unit quaternion.
    pub fn canonical(mut q: [f64; 4]) -> Self {
        if let Some(x) = q.iter().find(|x| x.abs() > CANON_EPS) {
            if *x < 0.0 {
                q = q.map(|v| -v);
            }
        }
        Self { q }
    }

    pub fn identity() -> Self {
        Self { q: [1.0, 0.0, 0.0, 0.0] }
    }

    pub fn pauli_x() -> Self {
        Self { q: [0.0, 0.0, 0.0, 1.0] }
    }

    pub fn pauli_y() -> Self {
        Self { q: [0.0, 0.0, 1.0, 0.0] }
    }

    pub fn pauli_z() -> Self {
        Self { q: [0.0, 1.0, 0.0, 0.0] }
    }

    pub fn quaternion(&self) -> [f64; 4] {
        self.q
    }

    /// The channel `u ∘ v`, i.e. the matrix product `U·V`.
    pub fn compose(&self, other: &Self) -> Self {
        Self::new(quat_mul(&self.q, &other.q)).expect("product of unit quaternions")
    }

    pub fn inverse(&self) -> Self {
        let [a, b, c, d] = self.q;
        Self::canonical([a, -b, -c, -d])
    }

    /// `|⟨q_u, q_v⟩| = |tr(U†V)|/2`.
    pub fn overlap(&self, other: &Self) -> f64 {
        self.q.iter().zip(&other.q).map(|(x, y)| x * y).sum::<f64>().abs()
    }

    /// Diamond distance `√(1 − ⟨q_u, q_v⟩²)`, evaluated as `|q−r|·|q+r|/2` for stability near 0.
    pub fn diamond_distance(&self, other: &Self) -> f64 {
        let mut m = 0.0;
        let mut p = 0.0;
        for i in 0..4 {
            let (x, y) = (self.q[i], other.q[i]);
            m += (x - y) * (x - y);
            p += (x + y) * (x + y);
        }
        ((m * p).sqrt() / 2.0).min(1.0)
    }

    pub fn rz(theta: f64) -> Self {
        Self::canonical([(theta / 2.0).cos(), -(theta / 2.0).sin(), 0.0, 0.0])
    }

    /// Uniform sample on S³ projected to channels.
    pub fn haar_sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            if let Ok(u) = Self::new(v) {
                return u;
            }
        }
    }

    /// SU(2) matrix `[[a+ib, −c+id], [c+id, a−ib]]`.
    pub fn to_matrix(&self) -> [[Complex64; 2]; 2] {
        let [a, b, c, d] = self.q;
        [
            [Complex64::new(a, b), Complex64::new(-c, d)],
            [Complex64::new(c, d), Complex64::new(a, -b)],
        ]
    }

    /// Channel of a unitary matrix given up to global phase.
    pub fn from_matrix(m: &[[Complex64; 2]; 2]) -> Result<Self, Su2Error> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if (det.norm() - 1.0).abs() > 1e-9 {
            return Err(Su2Error::NotUnitary);
        }
        let s = det.sqrt();
        let u00 = m[0][0] / s;
        let u10 = m[1][0] / s;
        let u01 = m[0][1] / s;
        let u11 = m[1][1] / s;
        // SU(2) structure: u11 = conj(u00), u01 = −conj(u10)
        if (u11 - u00.conj()).norm() > 1e-9 || (u01 + u10.conj()).norm() > 1e-9 {
            return Err(Su2Error::NotUnitary);
        }
        Self::new([u00.re, u00.im, u10.re, u10.im])
    }
}

impl fmt::Display for UnitaryChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.q;
        write!(f, "q:({a:.16e},{b:.16e},{c:.16e},{d:.16e})")
    }
}

impl FromStr for UnitaryChannel {
    type Err = Su2Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || Su2Error::Parse(s.to_string());
        let body = s
            .trim()
            .strip_prefix("q:(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(err)?;
        let v: Vec<f64> = body
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| err())?;
        let q: [f64; 4] = v.try_into().map_err(|_| err())?;
        Self::new(q)
    }
}

/// Deterministic RNG stream for worker `stream` under a global `seed`.
pub fn worker_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// An exact point `(α, β, γ, δ)` over Z[√2] with `α²+β²+γ²+δ² = n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuaternionPoint {
    pub coords: [ZRoot2; 4],
    pub n: ZRoot2,
}

impl QuaternionPoint {
    pub fn from_ints(c: [i64; 4]) -> Self {
        let coords = c.map(ZRoot2::from_int);
        let n = ZRoot2::from_int(c.iter().map(|x| x * x).sum::<i64>());
        Self { coords, n }
    }

    pub fn new(coords: [ZRoot2; 4], n: ZRoot2) -> Self {
        Self { coords, n }
    }

    pub fn sum_of_squares(&self) -> ZRoot2 {
        self.coords.iter().fold(ZRoot2::zero(), |acc, x| &acc + &(x * x))
    }

    /// `q = σ₁(α,β,γ,δ)/√σ₁(n)`.
    pub fn channel(&self) -> Result<UnitaryChannel, Su2Error> {
        if self.n.signum(Embedding::Sigma1) != std::cmp::Ordering::Greater {
            return Err(Su2Error::InvalidPoint(format!("n = {} is not positive", self.n)));
        }
        let s = self.sum_of_squares();
        if s != self.n {
            let which = if s.a == self.n.a && s.b != self.n.b { "σ₂" } else { "σ₁" };
            return Err(Su2Error::InvalidPoint(format!(
                "sum of squares {} differs from n = {} ({which} mismatch)",
                s, self.n
            )));
        }
        let scale = self.n.embed(Embedding::Sigma1).sqrt();
        let q = std::array::from_fn(|i| self.coords[i].embed(Embedding::Sigma1) / scale);
        Ok(UnitaryChannel::canonical(q))
    }
}

impl fmt::Display for QuaternionPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = &self.coords;
        write!(f, "p:({a},{b},{c},{d};{})", self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matmul(x: &[[Complex64; 2]; 2], y: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    out[i][j] += x[i][k] * y[k][j];
                }
            }
        }
        out
    }

    fn arb_channel() -> impl Strategy<Value = UnitaryChannel> {
        any::<u64>().prop_map(|s| UnitaryChannel::haar_sample(&mut worker_rng(s, 0)))
    }

    #[test]
    fn distance_examples() {
        let id = UnitaryChannel::identity();
        assert_eq!(id.diamond_distance(&id), 0.0);
        assert!((id.diamond_distance(&UnitaryChannel::pauli_x()) - 1.0).abs() < 1e-15);
        for th in [0.1f64, 0.5, 2.0] {
            let d = id.diamond_distance(&UnitaryChannel::rz(th));
            assert!((d - (th / 2.0).sin().abs()).abs() < 1e-14);
        }
        assert_eq!(UnitaryChannel::rz(0.0), id);
        assert!(UnitaryChannel::rz(std::f64::consts::PI).diamond_distance(&UnitaryChannel::pauli_z()) < 1e-15);
    }

    #[test]
    fn pauli_products() {
        let y = UnitaryChannel::pauli_x().compose(&UnitaryChannel::pauli_z());
        assert!(y.diamond_distance(&UnitaryChannel::pauli_y()) < 1e-15);
    }

    #[test]
    fn point_channels() {
        assert_eq!(QuaternionPoint::from_ints([1, 0, 0, 0]).channel().unwrap(), UnitaryChannel::identity());
        let h = QuaternionPoint::from_ints([1, 1, 1, 1]).channel().unwrap();
        assert!(h.quaternion().iter().all(|x| (x - 0.5).abs() < 1e-15));
        let p = QuaternionPoint::from_ints([1, 2, 0, 0]).channel().unwrap().quaternion();
        assert!((p[0] - 1.0 / 5f64.sqrt()).abs() < 1e-15 && (p[1] - 2.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!((p.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-15);
        let bad = QuaternionPoint::new(
            [ZRoot2::one(), ZRoot2::zero(), ZRoot2::zero(), ZRoot2::zero()],
            ZRoot2::zero(),
        );
        assert!(bad.channel().is_err());
        // σ₁ agrees numerically but not exactly: mismatch is detected
        let off = QuaternionPoint::new(
            [ZRoot2::one(), ZRoot2::one(), ZRoot2::zero(), ZRoot2::zero()],
            ZRoot2::new(2, 1),
        );
        assert!(off.channel().is_err());
    }

    #[test]
    fn haar_reproducible_and_balanced() {
        let a = UnitaryChannel::haar_sample(&mut worker_rng(42, 0));
        let b = UnitaryChannel::haar_sample(&mut worker_rng(42, 0));
        assert_eq!(a, b);
        let mut rng = worker_rng(42, 0);
        let n = 100_000;
        let mut mean = 0.0;
        for _ in 0..n {
            let u = UnitaryChannel::haar_sample(&mut rng);
            let q = u.quaternion();
            assert!((q.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
            mean += q[0] * q[0];
        }
        mean /= n as f64;
        assert!((mean - 0.25).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn text_round_trip() {
        let u = UnitaryChannel::haar_sample(&mut worker_rng(7, 3));
        let s = u.to_string();
        assert!(s.starts_with("q:("));
        assert_eq!(s.parse::<UnitaryChannel>().unwrap(), u);
    }

    proptest! {
        #[test]
        fn quaternion_matches_matrix(u in arb_channel(), v in arb_channel()) {
            let w = u.compose(&v);
            let m = matmul(&u.to_matrix(), &v.to_matrix());
            let w2 = UnitaryChannel::from_matrix(&m).unwrap();
            prop_assert!(w.diamond_distance(&w2) < 1e-7);
            // trace identity
            let ud = u.to_matrix();
            let vd = v.to_matrix();
            let mut tr = Complex64::new(0.0, 0.0);
            for i in 0..2 { for k in 0..2 { tr += ud[k][i].conj() * vd[k][i]; } }
            prop_assert!((tr.norm() / 2.0 - u.overlap(&v)).abs() < 1e-12);
        }

        #[test]
        fn metric_axioms(u in arb_channel(), v in arb_channel(), w in arb_channel()) {
            prop_assert_eq!(u.diamond_distance(&v), v.diamond_distance(&u));
            prop_assert!(u.diamond_distance(&w) <= u.diamond_distance(&v) + v.diamond_distance(&w) + 1e-12);
            prop_assert!(u.compose(&u.inverse()).diamond_distance(&UnitaryChannel::identity()) < 1e-7);
        }

        #[test]
        fn bi_invariance(u in arb_channel(), v in arb_channel(), w in arb_channel()) {
            let d = u.diamond_distance(&v);
            prop_assert!((w.compose(&u).diamond_distance(&w.compose(&v)) - d).abs() < 1e-12);
            prop_assert!((u.compose(&w).diamond_distance(&v.compose(&w)) - d).abs() < 1e-12);
        }

        #[test]
        fn canonical_invariant(u in arb_channel()) {
            let q = u.quaternion();
            prop_assert!((q.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(q.iter().find(|x| x.abs() > 1e-12).unwrap() > &0.0);
        }
    }
}
