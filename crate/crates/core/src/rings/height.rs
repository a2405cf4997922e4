use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Embedding, QSqrt2, ZRoot2};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HeightError {
    #[error("zero denominator or zero numerator-denominator pair")]
    ZeroRepresentation,
    #[error("unsupported field {0:?}; expected Q or Q(sqrt2)")]
    UnsupportedField(String),
    #[error("cannot parse field element: {0}")]
    Parse(String),
}

/// A field element given as numerator/denominator over its ring of integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldElement {
    Rational(BigInt, BigInt),
    QSqrt2(ZRoot2, ZRoot2),
}

impl FieldElement {
    /// Builds an element from a field tag (`Q` or `Q(sqrt2)`) and text numerator/denominator.
    pub fn parse(field: &str, num: &str, den: &str) -> Result<Self, HeightError> {
        let perr = |e: &dyn std::fmt::Display| HeightError::Parse(e.to_string());
        match field.trim() {
            "Q" => Ok(FieldElement::Rational(
                num.trim().parse().map_err(|e| perr(&e))?,
                den.trim().parse().map_err(|e| perr(&e))?,
            )),
            "Q(sqrt2)" | "Q(w2)" => Ok(FieldElement::QSqrt2(
                num.parse().map_err(|e| perr(&e))?,
                den.parse().map_err(|e| perr(&e))?,
            )),
            other => Err(HeightError::UnsupportedField(other.to_string())),
        }
    }
}

/// Relative multiplicative height. The value is returned exactly; for Q it is an integer.
pub fn height(x: &FieldElement) -> Result<QSqrt2, HeightError> {
    match x {
        FieldElement::Rational(p, q) => height_rational(p, q).map(QSqrt2::from_int),
        FieldElement::QSqrt2(n, d) => height_qsqrt2(n, d),
    }
}

/// `H_Q(p/q) = max(|p|, |q|)` after cancelling common factors.
pub fn height_rational(p: &BigInt, q: &BigInt) -> Result<BigInt, HeightError> {
    if q.is_zero() {
        return Err(HeightError::ZeroRepresentation);
    }
    let g = p.gcd(q);
    Ok((p.abs() / &g).max(q.abs() / g))
}

/// `H_{Q(√2)}(n/d)`: product over both real embeddings of `max(|σ n|, |σ d|)` for coprime `n, d`.
/// Z[√2] is a PID, so after cancelling the gcd every finite place contributes 1.
/// The result is the algebraic integer `a·b•` read through σ₁.
pub fn height_qsqrt2(n: &ZRoot2, d: &ZRoot2) -> Result<QSqrt2, HeightError> {
    if d.is_zero() {
        return Err(HeightError::ZeroRepresentation);
    }
    let g = n.gcd(d);
    let n = n.div_exact(&g).expect("gcd divides");
    let d = d.div_exact(&g).expect("gcd divides");
    let pick = |w: Embedding| {
        let an = n.abs_at(w);
        let ad = d.abs_at(w);
        if an.cmp_at(&ad, w) == Ordering::Less {
            ad
        } else {
            an
        }
    };
    let a = pick(Embedding::Sigma1);
    let b = pick(Embedding::Sigma2);
    Ok(QSqrt2::from(&a * &b.galois_conj()))
}

/// `‖x‖_σ₁ · ‖x‖_σ₂ · ‖x‖_√2` as an exact rational `(num, den)`.
/// Equals 1 exactly when the support of `x` lies in the two real places and √2.
pub fn s_place_product(x: &QSqrt2) -> Option<(BigInt, BigInt)> {
    if x.is_zero() {
        return None;
    }
    let (nn, nd) = x.norm();
    let num_ord = x.numerator().ord_sqrt2()? as i64;
    // den is rational: ord_√2(den) = 2·ord_2(den)
    let den_ord = 2 * x.denominator().trailing_zeros().unwrap_or(0) as i64;
    let ord = num_ord - den_ord;
    let two_pow = BigInt::one() << ord.unsigned_abs();
    let (mut p, mut q) = (nn.abs(), nd.abs());
    if ord >= 0 {
        q *= two_pow;
    } else {
        p *= two_pow;
    }
    let g = p.gcd(&q);
    Some((p / &g, q / g))
}

/// All nonzero `x ∈ Z[√2]` with `H(x) ≤ bound`, in lexicographic order of `(a, b)`.
/// The search box follows from `|σ₁ x|, |σ₂ x| ≤ bound`.
pub fn bounded_height_integers(bound: u64) -> Vec<ZRoot2> {
    let bnd = QSqrt2::from_int(bound);
    let bmax = (bound as f64 / std::f64::consts::SQRT_2).ceil() as i64;
    let amax = bound as i64;
    let one = ZRoot2::one();
    let mut out = Vec::new();
    for a in -amax..=amax {
        for b in -bmax..=bmax {
            let x = ZRoot2::new(a, b);
            if x.is_zero() {
                continue;
            }
            let h = height_qsqrt2(&x, &one).expect("nonzero denominator");
            if h.cmp_at(&bnd, Embedding::Sigma1) != Ordering::Greater {
                out.push(x);
            }
        }
    }
    out
}
