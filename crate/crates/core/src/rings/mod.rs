//! Exact arithmetic in Z[√2], Z[i], Z[ζ₈] and their denominated extensions,
//! plus heights over Q and Q(√2).

mod denominated;
mod height;
mod qsqrt2;
mod zi;
mod zomega;
mod zroot2;

pub use denominated::{DenomBase, Denominated, Numerator};
pub use height::{
    bounded_height_integers, height, height_qsqrt2, height_rational, s_place_product, FieldElement,
    HeightError,
};
pub use qsqrt2::QSqrt2;
pub use zi::ZI;
pub use zomega::ZOmega;
pub use zroot2::ZRoot2;

use num_bigint::BigInt;

/// The two real embeddings of Q(√2); `Sigma2` sends √2 to −√2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Embedding {
    Sigma1,
    Sigma2,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse ring element from {0:?}")]
pub struct RingParseError(pub String);

pub(crate) fn parse_int(s: &str) -> Option<BigInt> {
    let s = s.strip_prefix('+').unwrap_or(s);
    if s.is_empty() || s.starts_with(['+', '-']) && s.len() == 1 {
        return None;
    }
    s.parse().ok()
}
