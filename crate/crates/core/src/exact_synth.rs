//! Recognition and canonical-form synthesis of exactly synthesizable channels.
//!
//! Clifford+T words come from descent on the SO(3) (Bloch) representation, whose
//! least √2-denominator exponent equals the T-count. Clifford+V_p words come from
//! repeated left division by the `p+1` generators.

use std::collections::HashMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::ExactMatrix;
use crate::gates::{self, cliffords, quaternion_matrix, vp_representatives, Gate, GateError, GateSequence, GateSet};
use crate::rings::{height_qsqrt2, height_rational, Embedding, QSqrt2, ZOmega, ZRoot2, ZI};
use crate::su2::QuaternionPoint;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("input matrix is not unitary")]
    NonUnitary,
    #[error("not exactly synthesizable over {set}: {reason}")]
    NotSynthesizable { set: String, reason: String },
    #[error("flavor mismatch between exact unitaries")]
    FlavorMismatch,
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

fn not_synth(set: GateSet, reason: impl Into<String>) -> SynthError {
    SynthError::NotSynthesizable { set: set.to_string(), reason: reason.into() }
}

/// `entries / √scale` with `scale ∈ Z[√2]` totally positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledMatrix {
    pub entries: [ZOmega; 4],
    pub scale: ZRoot2,
}

type M2 = [ZOmega; 4];

fn mul2(x: &M2, y: &M2) -> M2 {
    let [a, b, c, d] = x;
    let [w, p, y2, z] = y;
    [a * w + b * y2, a * p + b * z, c * w + d * y2, c * p + d * z]
}

fn adj2(x: &M2) -> M2 {
    [x[0].conj(), x[2].conj(), x[1].conj(), x[3].conj()]
}

fn paulis() -> [M2; 3] {
    let (z0, one, i) = (ZOmega::zero(), ZOmega::one(), ZOmega::i());
    [
        [z0.clone(), one.clone(), one.clone(), z0.clone()],
        [z0.clone(), -&i, i, z0.clone()],
        [one.clone(), z0.clone(), z0, -one],
    ]
}

impl ScaledMatrix {
    pub fn new(entries: [ZOmega; 4], scale: ZRoot2) -> Self {
        Self { entries, scale }
    }

    pub fn from_exact(m: &ExactMatrix) -> Self {
        let s = (BigInt::one() << m.k2()) * BigInt::from(m.p()).pow(m.kp());
        // e/(√2^k2 √p^kp) = e/√(2^k2 p^kp)
        Self { entries: m.entries().clone(), scale: ZRoot2::from_int(s) }
    }

    /// `U(α,β,γ,δ) = [[α+iβ, −γ+iδ], [γ+iδ, α−iβ]] / √n`.
    pub fn from_point(p: &QuaternionPoint) -> Self {
        let z = |x: &ZRoot2| ZOmega::from_zroot2(x);
        let [a, b, c, d] = &p.coords;
        let i = ZOmega::i();
        let entries = [
            z(a) + &i * &z(b),
            -z(c) + &i * &z(d),
            z(c) + &i * &z(d),
            z(a) - &i * &z(b),
        ];
        Self { entries, scale: p.n.clone() }
    }

    pub fn from_int_point(q: [i64; 4]) -> Self {
        let n: i64 = q.iter().map(|x| x * x).sum();
        Self { entries: quaternion_matrix(&q), scale: ZRoot2::from_int(n) }
    }

    /// Exact check `e·e† = scale·I` with `scale` totally positive.
    pub fn is_unitary(&self) -> bool {
        if self.scale.is_zero() || !self.scale.is_totally_nonnegative() {
            return false;
        }
        let p = mul2(&self.entries, &adj2(&self.entries));
        let s = ZOmega::from_zroot2(&self.scale);
        p[0] == s && p[3] == s && p[1].is_zero() && p[2].is_zero()
    }

    fn check_unitary(&self) -> Result<(), SynthError> {
        if self.is_unitary() {
            Ok(())
        } else {
            Err(SynthError::NonUnitary)
        }
    }

    pub fn to_complex(&self) -> [[num_complex::Complex64; 2]; 2] {
        let s = self.scale.embed(Embedding::Sigma1).sqrt();
        let v: [num_complex::Complex64; 4] = std::array::from_fn(|i| self.entries[i].to_complex() / s);
        [[v[0], v[1]], [v[2], v[3]]]
    }

    /// SO(3) representation `R_ij = tr(P_i U P_j U†)/2`, exactly.
    pub fn bloch(&self) -> [[QSqrt2; 3]; 3] {
        let ps = paulis();
        let eh = adj2(&self.entries);
        let den = self.scale.scale(&BigInt::from(2));
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let m = mul2(&mul2(&ps[i], &self.entries), &mul2(&ps[j], &eh));
                let tr = (&m[0] + &m[3]).to_zroot2().expect("Hermitian products have real trace");
                QSqrt2::from_ratio(&tr, &den).expect("nonzero scale")
            })
        })
    }

    /// Gram matrix `q·qᵀ` of the unit quaternion of the channel, exactly.
    pub fn quaternion_gram(&self) -> [[QSqrt2; 4]; 4] {
        let e = &self.entries;
        let det = &e[0] * &e[3] - &e[1] * &e[2];
        let d = &self.scale;
        let d2 = d * d;
        // values x·conj(det)/D² equal x/det since |det| = D
        let over_det = |x: ZOmega| (x * det.conj(), d2.clone());
        let re = |(z, den): (ZOmega, ZRoot2)| {
            let r = (&z + &z.conj()).to_zroot2().expect("real");
            QSqrt2::from_ratio(&r, &den.scale(&BigInt::from(2))).expect("nonzero")
        };
        let im = |(z, den): (ZOmega, ZRoot2)| {
            let r = ((&z - &z.conj()) * -ZOmega::i()).to_zroot2().expect("real");
            QSqrt2::from_ratio(&r, &den.scale(&BigInt::from(2))).expect("nonzero")
        };
        let half = QSqrt2::new(ZRoot2::one(), 2);
        let n00 = re((&e[0] * &e[0].conj(), d.clone()));
        let n10 = re((&e[2] * &e[2].conj(), d.clone()));
        let sq0 = over_det(&e[0] * &e[0]);
        let sq1 = over_det(&e[2] * &e[2]);
        let pr = over_det(&e[0] * &e[2]);
        let cj = (&e[0] * &e[2].conj(), d.clone());
        let (sq0r, sq0i) = (re(sq0.clone()), im(sq0));
        let (sq1r, sq1i) = (re(sq1.clone()), im(sq1));
        let (prr, pri) = (re(pr.clone()), im(pr));
        let (cjr, cji) = (re(cj.clone()), im(cj));
        let q00 = &(&n00 + &sq0r) * &half;
        let q11 = &(&n00 - &sq0r) * &half;
        let q01 = &sq0i * &half;
        let q22 = &(&n10 + &sq1r) * &half;
        let q33 = &(&n10 - &sq1r) * &half;
        let q23 = &sq1i * &half;
        let q02 = &(&prr + &cjr) * &half;
        let q13 = &(&cjr - &prr) * &half;
        let q03 = &(&pri - &cji) * &half;
        let q12 = &(&pri + &cji) * &half;
        [
            [q00, q01.clone(), q02.clone(), q03.clone()],
            [q01, q11, q12.clone(), q13.clone()],
            [q02, q12, q22, q23.clone()],
            [q03, q13, q23, q33],
        ]
    }
}

/// Bloch matrix `m / √2^k` over Z[√2], `k` minimal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicBloch {
    m: [[ZRoot2; 3]; 3],
    k: u32,
}

impl DyadicBloch {
    fn new(m: [[ZRoot2; 3]; 3], k: u32) -> Self {
        let mut out = Self { m, k };
        while out.k > 0 && out.m.iter().flatten().all(ZRoot2::is_divisible_by_sqrt2) {
            for x in out.m.iter_mut().flatten() {
                *x = x.div_sqrt2().expect("checked");
            }
            out.k -= 1;
        }
        out
    }

    /// `None` if some entry has a denominator other than a power of 2.
    pub fn from_bloch(r: &[[QSqrt2; 3]; 3]) -> Option<Self> {
        let mut exps = [[0u32; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let d = r[i][j].denominator();
                let tz = d.trailing_zeros().unwrap_or(0);
                if (d >> tz) != BigInt::one() {
                    return None;
                }
                exps[i][j] = 2 * tz as u32;
            }
        }
        let k = *exps.iter().flatten().max().expect("nine entries");
        let m = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let mut x = r[i][j].numerator().clone();
                for _ in exps[i][j]..k {
                    x = x.mul_sqrt2();
                }
                x
            })
        });
        Some(Self::new(m, k))
    }

    pub fn of_exact(m: &ExactMatrix) -> Self {
        Self::from_bloch(&ScaledMatrix::from_exact(m).bloch()).expect("Clifford+T matrix has dyadic Bloch entries")
    }

    /// Least √2-denominator exponent, equal to the T-count.
    pub fn lde(&self) -> u32 {
        self.k
    }

    pub fn mul(&self, other: &Self) -> Self {
        let m = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..3).fold(ZRoot2::zero(), |acc, l| &acc + &(&self.m[i][l] * &other.m[l][j]))
            })
        });
        Self::new(m, self.k + other.k)
    }

    pub fn transpose(&self) -> Self {
        Self { m: std::array::from_fn(|i| std::array::from_fn(|j| self.m[j][i].clone())), k: self.k }
    }

    fn signed_permutation(&self) -> Option<[[i8; 3]; 3]> {
        if self.k != 0 {
            return None;
        }
        let mut out = [[0i8; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let x = &self.m[i][j];
                if !x.b.is_zero() || x.a.abs() > BigInt::one() {
                    return None;
                }
                out[i][j] = if x.a.is_zero() { 0 } else if x.a.is_positive() { 1 } else { -1 };
            }
        }
        Some(out)
    }
}

fn clifford_by_bloch(r: &DyadicBloch) -> Option<u8> {
    static TABLE: OnceLock<HashMap<[[i8; 3]; 3], u8>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        cliffords()
            .iter()
            .map(|c| (DyadicBloch::of_exact(&c.exact).signed_permutation().expect("Clifford"), c.index))
            .collect()
    });
    table.get(&r.signed_permutation()?).copied()
}

struct Syllable {
    word: Vec<Gate>,
    inverse: DyadicBloch,
}

fn syllables() -> &'static [Syllable; 3] {
    static S: OnceLock<[Syllable; 3]> = OnceLock::new();
    S.get_or_init(|| {
        let mk = |w: Vec<Gate>| {
            let m = GateSequence::new(GateSet::CliffordT, w.clone()).expect("T word").evaluate_exact();
            Syllable { word: w, inverse: DyadicBloch::of_exact(&m).transpose() }
        };
        [mk(vec![Gate::T]), mk(vec![Gate::H, Gate::T]), mk(vec![Gate::S, Gate::H, Gate::T])]
    })
}

/// Matsumoto–Amano word `(T|ε)(HT|SHT)*C` of a Bloch matrix.
fn ma_descent(r: &DyadicBloch) -> Result<GateSequence, SynthError> {
    let syl = syllables();
    let mut r = r.clone();
    let mut word = Vec::new();
    let mut first = true;
    while r.lde() > 0 {
        let cands = if first { &syl[..] } else { &syl[1..] };
        let mut hits = cands
            .iter()
            .map(|s| (s, s.inverse.mul(&r)))
            .filter(|(_, n)| n.lde() + 1 == r.lde());
        let (s, next) = hits
            .next()
            .ok_or_else(|| SynthError::Internal(format!("no reducing syllable at lde {}", r.lde())))?;
        if hits.next().is_some() {
            return Err(SynthError::Internal(format!("ambiguous syllable at lde {}", r.lde())));
        }
        word.extend(s.word.iter().copied());
        r = next;
        first = false;
    }
    let c = clifford_by_bloch(&r).ok_or_else(|| SynthError::Internal("lde-0 remainder is not a Clifford".into()))?;
    word.push(Gate::C(c));
    Ok(GateSequence::new(GateSet::CliffordT, word)?)
}

/// `(1/√2^k)·[[z, −w̄ζ^m], [w, z̄ζ^m]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TUnitary {
    pub z: ZOmega,
    pub w: ZOmega,
    pub k: u32,
    pub phase_m: u8,
}

impl TUnitary {
    pub fn from_exact(m: &ExactMatrix) -> Option<Self> {
        if m.kp() != 0 {
            return None;
        }
        let [z, x, w, y] = m.entries();
        let phase_m = (0..8u8).find(|&j| {
            y == &z.conj().mul_zeta_pow(j as i64) && x == &(-w.conj()).mul_zeta_pow(j as i64)
        })?;
        Some(Self { z: z.clone(), w: w.clone(), k: m.k2(), phase_m })
    }

    pub fn to_exact(&self) -> ExactMatrix {
        let j = self.phase_m as i64;
        ExactMatrix::new(
            [self.z.clone(), (-self.w.conj()).mul_zeta_pow(j), self.w.clone(), self.z.conj().mul_zeta_pow(j)],
            self.k,
            0,
            1,
        )
    }

    /// Unitarity `|z|² + |w|² = 2^k`.
    pub fn is_valid(&self) -> bool {
        &self.z.norm_sq() + &self.w.norm_sq() == ZRoot2::from_int(BigInt::one() << self.k)
    }
}

/// `[[z, −w̄], [w, z̄]] / (√p^k · √2^ℓ · (1−i)^m)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VUnitary {
    pub z: ZI,
    pub w: ZI,
    pub k: u32,
    pub l: u8,
    pub m: u8,
    pub p: u64,
}

impl VUnitary {
    pub fn to_exact(&self) -> ExactMatrix {
        // 1/(1−i) = ζ/√2
        let j = self.m as i64;
        let e = [
            self.z.to_zomega().mul_zeta_pow(j),
            (-self.w.conj()).to_zomega().mul_zeta_pow(j),
            self.w.to_zomega().mul_zeta_pow(j),
            self.z.conj().to_zomega().mul_zeta_pow(j),
        ];
        ExactMatrix::new(e, self.l as u32 + self.m as u32, self.k, self.p)
    }

    /// Finds the representation with least `(m, ℓ)` over global phases `ζʲ`.
    pub fn from_exact(u: &ExactMatrix, p: u64) -> Option<Self> {
        if u.p() != 1 && u.p() != p {
            return None;
        }
        let one_minus_i = ZOmega::gaussian(1, -1);
        for m in 0..4u8 {
            for l in 0..3u8 {
                for j in 0..8i64 {
                    let mut e = u.entries().clone().map(|x| x.mul_zeta_pow(j));
                    for _ in 0..m {
                        e = e.map(|x| &x * &one_minus_i);
                    }
                    // multiply by √2^(ℓ − k2)
                    let shift = l as i64 - u.k2() as i64;
                    let mut ok = true;
                    for _ in 0..shift.max(0) {
                        e = e.map(|x| x.mul_sqrt2());
                    }
                    for _ in 0..(-shift).max(0) {
                        let next: Option<Vec<ZOmega>> = e.iter().map(ZOmega::div_sqrt2).collect();
                        match next {
                            Some(v) => e = v.try_into().expect("four"),
                            None => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if !ok {
                        continue;
                    }
                    let g: Option<Vec<(BigInt, BigInt)>> = e.iter().map(ZOmega::to_gaussian).collect();
                    let Some(g) = g else { continue };
                    let z = ZI::new(g[0].0.clone(), g[0].1.clone());
                    let w = ZI::new(g[2].0.clone(), g[2].1.clone());
                    let x = ZI::new(g[1].0.clone(), g[1].1.clone());
                    let y = ZI::new(g[3].0.clone(), g[3].1.clone());
                    if x == -w.conj() && y == z.conj() {
                        return Some(Self { z, w, k: u.kp(), l, m, p });
                    }
                }
            }
        }
        None
    }

    /// Unitarity `|z|² + |w|² = p^k·2^ℓ·2^m`.
    pub fn is_valid(&self) -> bool {
        let rhs = BigInt::from(self.p).pow(self.k) << (self.l as u32 + self.m as u32);
        self.z.norm() + self.w.norm() == rhs
    }

    /// `det U` is a power of `i`.
    pub fn det_is_power_of_i(&self) -> bool {
        let e = self.to_exact();
        let en = e.entries();
        let det = &en[0] * &en[3] - &en[1] * &en[2];
        let s = (BigInt::one() << e.k2()) * BigInt::from(e.p()).pow(e.kp());
        let s = ZOmega::from_int(s);
        // det(e)/√(2^k2 p^kp)² ∈ {±1, ±i}
        (0..4).any(|j| det == s.mul_zeta_pow(2 * j))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactUnitary {
    T(TUnitary),
    V(VUnitary),
}

impl ExactUnitary {
    pub fn to_exact(&self) -> ExactMatrix {
        match self {
            ExactUnitary::T(t) => t.to_exact(),
            ExactUnitary::V(v) => v.to_exact(),
        }
    }
}

/// Recognizes a Clifford+T channel; the returned form agrees with `m` up to a ζ₈ phase.
pub fn recognize_t(m: &ScaledMatrix) -> Result<TUnitary, SynthError> {
    m.check_unitary()?;
    let r = m.bloch();
    let dy = DyadicBloch::from_bloch(&r)
        .ok_or_else(|| not_synth(GateSet::CliffordT, "SO(3) entries leave Z[1/√2]"))?;
    let word = ma_descent(&dy)?;
    let e = word.evaluate_exact();
    if ScaledMatrix::from_exact(&e).bloch() != r {
        return Err(SynthError::Internal("synthesized word does not reproduce the channel".into()));
    }
    let e = closest_phase(&e, m);
    TUnitary::from_exact(&e).ok_or_else(|| SynthError::Internal("determinant is not a ζ₈ power".into()))
}

fn closest_phase(e: &ExactMatrix, target: &ScaledMatrix) -> ExactMatrix {
    let t = target.to_complex();
    (0..8)
        .map(|j| e.scale_phase(j))
        .min_by(|a, b| {
            let da = dist(&a.to_complex(), &t);
            let db = dist(&b.to_complex(), &t);
            da.total_cmp(&db)
        })
        .expect("eight phases")
}

fn dist(a: &[[num_complex::Complex64; 2]; 2], b: &[[num_complex::Complex64; 2]; 2]) -> f64 {
    (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| (a[i][j] - b[i][j]).norm_sqr()).sum()
}

pub fn ma_normal_form(u: &TUnitary) -> GateSequence {
    ma_descent(&DyadicBloch::of_exact(&u.to_exact())).expect("descent is total on Clifford+T unitaries")
}

pub fn t_count(u: &TUnitary) -> usize {
    DyadicBloch::of_exact(&u.to_exact()).lde() as usize
}

/// Recognizes a Clifford+V_p channel.
pub fn recognize_v(m: &ScaledMatrix, p: u64) -> Result<VUnitary, SynthError> {
    let set = GateSet::v(p)?;
    m.check_unitary()?;
    let r = m.bloch();
    let pb = BigInt::from(p);
    for x in r.iter().flatten() {
        if !x.numerator().b.is_zero() {
            return Err(not_synth(set, "SO(3) entries are irrational"));
        }
        let mut d = x.denominator().clone();
        while (&d % &pb).is_zero() {
            d /= &pb;
        }
        if !d.is_one() {
            return Err(not_synth(set, format!("SO(3) entries leave Z[1/{p}]")));
        }
    }
    let point = integer_quaternion(&m.quaternion_gram())
        .ok_or_else(|| not_synth(set, "quaternion ratios are irrational"))?;
    let n: BigInt = point.iter().map(|x| x * x).sum();
    let (kp, rest) = strip_factor(n, &pb);
    let (k2, rest) = strip_factor(rest, &BigInt::from(2));
    if !rest.is_one() || k2 > 2 {
        return Err(not_synth(set, "quaternion norm has prime factors outside {2, p}"));
    }
    let q: [i64; 4] = std::array::from_fn(|i| i64::try_from(&point[i]).unwrap_or(0));
    let e = if point.iter().all(|x| i64::try_from(x).is_ok()) {
        quaternion_matrix(&q)
    } else {
        big_quaternion_matrix(&point)
    };
    let u = ExactMatrix::new(e, k2, kp, p);
    if ScaledMatrix::from_exact(&u).bloch() != r {
        return Err(SynthError::Internal("reconstructed quaternion has a different channel".into()));
    }
    VUnitary::from_exact(&u, p).ok_or_else(|| SynthError::Internal("no V canonical representation".into()))
}

fn big_quaternion_matrix(q: &[BigInt; 4]) -> [ZOmega; 4] {
    let [a, b, c, d] = q.clone();
    [
        ZOmega::gaussian(a.clone(), b.clone()),
        ZOmega::gaussian(-&c, d.clone()),
        ZOmega::gaussian(c, d),
        ZOmega::gaussian(a, -b),
    ]
}

fn strip_factor(mut n: BigInt, f: &BigInt) -> (u32, BigInt) {
    let mut k = 0;
    while !n.is_zero() && (&n % f).is_zero() {
        n /= f;
        k += 1;
    }
    (k, n)
}

/// Primitive integer quaternion proportional to a rational Gram matrix row.
fn integer_quaternion(k: &[[QSqrt2; 4]; 4]) -> Option<[BigInt; 4]> {
    if k.iter().flatten().any(|x| !x.numerator().b.is_zero()) {
        return None;
    }
    let i = (0..4)
        .max_by(|&a, &b| k[a][a].cmp_at(&k[b][b], Embedding::Sigma1))
        .expect("four rows");
    let row = &k[i];
    let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denominator()));
    let v: Vec<BigInt> = row.iter().map(|x| &x.numerator().a * (&lcm / x.denominator())).collect();
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return None;
    }
    Some(std::array::from_fn(|j| &v[j] / &g))
}

/// Canonical V-word `V_p^{(i₁)}…V_p^{(i_r)} C` by left division.
pub fn v_synthesize(u: &VUnitary) -> GateSequence {
    v_divide(&u.to_exact(), u.p).expect("division is total on Clifford+V unitaries")
}

fn v_divide(u: &ExactMatrix, p: u64) -> Result<GateSequence, SynthError> {
    let reps = vp_representatives(p)?;
    let adj: Vec<ExactMatrix> = reps.iter().map(|v| v.exact.adjoint()).collect();
    let mut cur = u.clone();
    let mut word = Vec::new();
    while cur.kp() > 0 {
        let mut hit = None;
        for (idx, a) in adj.iter().enumerate() {
            let next = a.mul(&cur);
            if next.kp() + 1 == cur.kp() {
                if hit.is_some() {
                    return Err(SynthError::Internal(format!("ambiguous V division at k = {}", cur.kp())));
                }
                hit = Some((idx, next));
            }
        }
        let (idx, next) = hit.ok_or_else(|| SynthError::Internal(format!("no reducing V at k = {}", cur.kp())))?;
        word.push(Gate::V { p, i: idx as u32 + 1 });
        cur = next;
    }
    let c = gates::clifford_index(&cur.channel_key())
        .ok_or_else(|| SynthError::Internal("V remainder is not a Clifford".into()))?;
    word.push(Gate::C(c));
    Ok(GateSequence::new(GateSet::CliffordV(p), word)?)
}

pub fn v_count(u: &VUnitary) -> usize {
    u.k as usize
}

/// `|tr(U†V)|² / 4` in Q(√2).
pub fn exact_overlap_matrices(u: &ExactMatrix, v: &ExactMatrix) -> QSqrt2 {
    let a = u.entries();
    let b = v.entries();
    let tr = &(&a[0].conj() * &b[0]) + &(&a[2].conj() * &b[2]);
    let tr = &tr + &(&(&a[1].conj() * &b[1]) + &(&a[3].conj() * &b[3]));
    let num = tr.norm_sq();
    let den = (BigInt::from(4) << (u.k2() + v.k2())) * BigInt::from(u.p()).pow(u.kp()) * BigInt::from(v.p()).pow(v.kp());
    QSqrt2::new(num, den)
}

pub fn exact_overlap(u: &ExactUnitary, v: &ExactUnitary) -> Result<QSqrt2, SynthError> {
    match (u, v) {
        (ExactUnitary::T(_), ExactUnitary::T(_)) => {}
        (ExactUnitary::V(a), ExactUnitary::V(b)) if a.p == b.p => {}
        _ => return Err(SynthError::FlavorMismatch),
    }
    Ok(exact_overlap_matrices(&u.to_exact(), &v.to_exact()))
}

/// Least-denominator height: `H(√2^k) = 2^k` for Clifford+T.
pub fn ldh_t(u: &TUnitary) -> QSqrt2 {
    height_qsqrt2(&ZRoot2::sqrt2().pow(u.k), &ZRoot2::one()).expect("nonzero")
}

/// Least-denominator height `p^⌊k/2⌋` for Clifford+V_p.
pub fn ldh_v(u: &VUnitary) -> BigInt {
    height_rational(&BigInt::from(u.p).pow(u.k / 2), &BigInt::one()).expect("nonzero")
}

/// Result of the `synth exact` operation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactSynthesis {
    pub g_count: usize,
    pub lde: u32,
    pub word: String,
}

pub fn synthesize_exact(set: GateSet, m: &ScaledMatrix) -> Result<ExactSynthesis, SynthError> {
    match set {
        GateSet::CliffordT => {
            let u = recognize_t(m)?;
            let w = ma_normal_form(&u);
            Ok(ExactSynthesis { g_count: w.g_count(), lde: u.k, word: w.to_string() })
        }
        GateSet::CliffordV(p) => {
            let u = recognize_v(m, p)?;
            let w = v_synthesize(&u);
            Ok(ExactSynthesis { g_count: w.g_count(), lde: u.k, word: w.to_string() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::worker_rng;
    use rand::Rng;
    use std::collections::{HashMap, HashSet};

    fn t_word(s: &str) -> GateSequence {
        GateSequence::parse_for(GateSet::CliffordT, s).unwrap()
    }

    fn tu(s: &str) -> TUnitary {
        TUnitary::from_exact(&t_word(s).evaluate_exact()).unwrap()
    }

    /// Independent T-count oracle: layer t holds channels first reached with t T gates
    /// when multiplying by `T·C` for all Cliffords `C`.
    fn bfs_t_counts(max_t: usize) -> HashMap<crate::exact::ChannelKey, usize> {
        let cl: Vec<ExactMatrix> = cliffords().iter().map(|c| c.exact.clone()).collect();
        let t = Gate::T.exact();
        let mut seen: HashMap<_, usize> = cl.iter().map(|c| (c.channel_key(), 0)).collect();
        let mut layer = cl.clone();
        for depth in 1..=max_t {
            let mut next = Vec::new();
            for u in &layer {
                let ut = u.mul(&t);
                for c in &cl {
                    let n = ut.mul(c);
                    let key = n.channel_key();
                    if !seen.contains_key(&key) {
                        seen.insert(key, depth);
                        next.push(n);
                    }
                }
            }
            layer = next;
        }
        seen
    }

    fn random_ma_word(rng: &mut impl Rng, t: usize) -> String {
        let mut toks = Vec::new();
        for i in 0..t {
            let choices: &[&str] = if i == 0 { &["T", "H T", "S H T"] } else { &["H T", "S H T"] };
            toks.push(choices[rng.random_range(0..choices.len())]);
        }
        toks.push(["C0", "C5", "C11", "C23", "C17"][rng.random_range(0..5)]);
        toks.join(" ")
    }

    #[test]
    fn recognize_t_examples() {
        let t = recognize_t(&ScaledMatrix::from_exact(&Gate::T.exact())).unwrap();
        assert_eq!(t.k, 0);
        assert_eq!(t_count(&t), 1);
        let h = recognize_t(&ScaledMatrix::from_exact(&Gate::H.exact())).unwrap();
        assert_eq!((h.k, h.z.clone(), h.w.clone()), (1, ZOmega::one(), ZOmega::one()));
        // entry 1/√3: U(1,1,1,0)/√3
        let m = ScaledMatrix::from_int_point([1, 1, 1, 0]);
        assert!(m.is_unitary());
        assert!(matches!(recognize_t(&m), Err(SynthError::NotSynthesizable { .. })));
        let bad = ScaledMatrix::new([ZOmega::one(), ZOmega::one(), ZOmega::zero(), ZOmega::one()], ZRoot2::one());
        assert_eq!(recognize_t(&bad), Err(SynthError::NonUnitary));
    }

    #[test]
    fn twisted_scale_is_recognized() {
        // diag(1+ζ, 1+ζ̄)/√(2+√2) is the T channel up to phase
        let z = &ZOmega::one() + &ZOmega::zeta();
        let m = ScaledMatrix::new([z.clone(), ZOmega::zero(), ZOmega::zero(), z.conj()], ZRoot2::new(2, 1));
        let u = recognize_t(&m).unwrap();
        assert_eq!(t_count(&u), 1);
    }

    #[test]
    fn ma_examples() {
        assert_eq!(ma_normal_form(&tu("")).to_string(), "C0");
        let w = ma_normal_form(&tu("T H T"));
        assert_eq!(w.g_count(), 2);
        assert!(w.evaluate_exact().same_channel(&t_word("T H T").evaluate_exact()));
        for c in cliffords() {
            let u = TUnitary::from_exact(&c.exact).unwrap();
            assert_eq!(ma_normal_form(&u).g_count(), 0);
        }
    }

    #[test]
    fn t_count_matches_bfs() {
        let oracle = bfs_t_counts(6);
        let mut checked = 0;
        for (key, &t) in &oracle {
            let m = ExactMatrix::new(key.entries.clone(), key.k2, key.kp, key.p);
            let u = TUnitary::from_exact(&m).unwrap();
            assert_eq!(t_count(&u), t);
            let w = ma_normal_form(&u);
            assert_eq!(w.g_count(), t);
            assert!(w.evaluate_exact().same_channel(&m));
            checked += 1;
        }
        assert!(checked > 1000);
    }

    #[test]
    fn ma_round_trip_random() {
        let mut rng = worker_rng(11, 0);
        for n in 0..1000 {
            let t = n % 13;
            let s = random_ma_word(&mut rng, t);
            let word = t_word(&s);
            let u = TUnitary::from_exact(&word.evaluate_exact()).unwrap();
            assert!(u.is_valid());
            let w = ma_normal_form(&u);
            assert!(w.evaluate_exact().same_channel(&u.to_exact()), "{s}");
            assert_eq!(w.to_string(), s);
            let lde = u.k as i64;
            assert!(2 * lde - 3 <= t as i64 && (t as i64) <= 2 * lde + 1, "lde {lde} t {t}");
        }
    }

    #[test]
    fn ma_words_distinct() {
        let mut keys = HashSet::new();
        let mut words = vec![String::new()];
        let mut all = Vec::new();
        for t in 0..=5 {
            if t > 0 {
                let sy: &[&str] = if t == 1 { &["T", "H T", "S H T"] } else { &["H T", "S H T"] };
                words = words
                    .iter()
                    .flat_map(|w| sy.iter().map(move |s| format!("{w} {s}")))
                    .collect();
            }
            for w in &words {
                for c in 0..24 {
                    all.push(format!("{w} C{c}"));
                }
            }
        }
        for w in &all {
            assert!(keys.insert(t_word(w).evaluate_exact().channel_key()), "{w}");
        }
    }

    #[test]
    fn v_gate_and_division() {
        let reps = vp_representatives(5).unwrap();
        let u = recognize_v(&ScaledMatrix::from_exact(&reps[0].exact), 5).unwrap();
        assert_eq!(v_count(&u), 1);
        let w = v_synthesize(&u);
        assert_eq!(w.g_count(), 1);
        assert_eq!(w.word[0], Gate::V { p: 5, i: 1 });
        assert!(u.is_valid() && u.det_is_power_of_i());
    }

    #[test]
    fn v_count_matches_enumeration() {
        for p in [3u64, 5, 7, 13] {
            let reps = vp_representatives(p).unwrap();
            let max_r = if p <= 5 { 3 } else { 2 };
            let mut seen: HashMap<_, usize> = HashMap::new();
            let mut words: Vec<Vec<u32>> = vec![vec![]];
            for r in 0..=max_r {
                if r > 0 {
                    words = words
                        .iter()
                        .flat_map(|w| {
                            (1..=p as u32 + 1)
                                .filter(|&i| w.last().is_none_or(|&l| reps[l as usize - 1].inverse_index != i))
                                .map(|i| [w.clone(), vec![i]].concat())
                                .collect::<Vec<_>>()
                        })
                        .collect();
                    assert_eq!(words.len() as u64, (p + 1) * p.pow(r as u32 - 1));
                }
                for w in &words {
                    for c in cliffords() {
                        let mut toks: Vec<Gate> = w.iter().map(|&i| Gate::V { p, i }).collect();
                        toks.push(Gate::C(c.index));
                        let seq = GateSequence::new(GateSet::CliffordV(p), toks).unwrap();
                        let e = seq.evaluate_exact();
                        seen.entry(e.channel_key()).or_insert(r);
                        let u = recognize_v(&ScaledMatrix::from_exact(&e), p).unwrap();
                        assert_eq!(v_count(&u), r);
                        let back = v_synthesize(&u);
                        assert_eq!(back, seq);
                    }
                }
            }
            let expected: usize = (0..=max_r).map(|r| 24 * if r == 0 { 1 } else { ((p + 1) * p.pow(r as u32 - 1)) as usize }).sum();
            assert_eq!(seen.len(), expected, "p={p}");
        }
    }

    #[test]
    fn v_round_trip_long_words() {
        let reps = vp_representatives(5).unwrap();
        let mut rng = worker_rng(5, 1);
        for _ in 0..100 {
            let k = rng.random_range(0..=8);
            let mut toks = Vec::new();
            let mut last: Option<u32> = None;
            for _ in 0..k {
                let i = loop {
                    let i = rng.random_range(1..=6u32);
                    if last.is_none_or(|l| reps[l as usize - 1].inverse_index != i) {
                        break i;
                    }
                };
                toks.push(Gate::V { p: 5, i });
                last = Some(i);
            }
            toks.push(Gate::C(rng.random_range(0..24)));
            let seq = GateSequence::new(GateSet::CliffordV(5), toks).unwrap();
            let e = seq.evaluate_exact();
            let u = VUnitary::from_exact(&e, 5).unwrap();
            assert!(u.to_exact().same_channel(&e));
            assert_eq!(v_synthesize(&u), seq);
            assert_eq!(ldh_v(&u), BigInt::from(5).pow(u.k / 2));
        }
    }

    #[test]
    fn v_rejects_irrational() {
        let m = ScaledMatrix::from_exact(&Gate::T.exact());
        assert!(matches!(recognize_v(&m, 5), Err(SynthError::NotSynthesizable { .. })));
        let m = ScaledMatrix::from_int_point([1, 1, 1, 0]);
        assert!(matches!(recognize_v(&m, 5), Err(SynthError::NotSynthesizable { .. })));
        assert!(recognize_v(&m, 3).is_ok());
    }

    #[test]
    fn overlap_examples() {
        let id = ExactUnitary::T(tu(""));
        let h = ExactUnitary::T(tu("H"));
        let t = ExactUnitary::T(tu("T"));
        assert_eq!(exact_overlap(&id, &id).unwrap(), QSqrt2::one());
        // tr(H) = 0 for H = (X+Z)/√2; tr(S) = 1+i gives the value 1/2
        assert_eq!(exact_overlap(&id, &h).unwrap(), QSqrt2::zero());
        let s = ExactUnitary::T(tu("S"));
        assert_eq!(exact_overlap(&id, &s).unwrap(), QSqrt2::new(ZRoot2::one(), 2));
        assert_eq!(exact_overlap(&id, &t).unwrap(), QSqrt2::new(ZRoot2::new(2, 1), 4));
        let v = ExactUnitary::V(VUnitary::from_exact(&vp_representatives(5).unwrap()[0].exact, 5).unwrap());
        assert_eq!(exact_overlap(&id, &v), Err(SynthError::FlavorMismatch));
        let mut rng = worker_rng(3, 0);
        for _ in 0..50 {
            let a = tu(&random_ma_word(&mut rng, 6));
            let b = tu(&random_ma_word(&mut rng, 4));
            let ov = exact_overlap_matrices(&a.to_exact(), &b.to_exact()).to_f64();
            let d = a.to_exact().channel().diamond_distance(&b.to_exact().channel());
            assert!((1.0 - ov - d * d).abs() < 1e-12);
        }
    }

    #[test]
    fn ldh_is_power_of_two() {
        let u = tu("T H T S H T");
        assert_eq!(ldh_t(&u), QSqrt2::from_int(BigInt::one() << u.k));
    }

    #[test]
    fn gram_matches_float_quaternion() {
        let mut rng = worker_rng(9, 0);
        for _ in 0..20 {
            let e = t_word(&random_ma_word(&mut rng, 5)).evaluate_exact();
            let g = ScaledMatrix::from_exact(&e).quaternion_gram();
            let q = e.channel().quaternion();
            for i in 0..4 {
                for j in 0..4 {
                    assert!((g[i][j].to_f64() - q[i] * q[j]).abs() < 1e-12);
                }
            }
        }
    }
}
