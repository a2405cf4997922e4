//! Gate sets, gate tokens and words.
//!
//! A word `g₁ g₂ … gₙ` denotes the matrix product `g₁·g₂·…·gₙ`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::exact::{ChannelKey, ExactMatrix};
use crate::rings::ZOmega;
use crate::su2::{quat_mul, UnitaryChannel};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GateError {
    #[error("malformed token {0:?}")]
    MalformedToken(String),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("token {token} does not belong to gate set {set}")]
    SetMismatch { token: String, set: String },
    #[error("unknown gate set {0:?}")]
    UnknownSet(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateSet {
    CliffordT,
    CliffordV(u64),
}

impl GateSet {
    pub fn v(p: u64) -> Result<Self, GateError> {
        if is_odd_prime(p) {
            Ok(GateSet::CliffordV(p))
        } else {
            Err(GateError::NotOddPrime(p))
        }
    }

    /// `2` for Clifford+T, `p` for Clifford+V_p: the log base of G-count scaling.
    pub fn base(&self) -> u64 {
        match self {
            GateSet::CliffordT => 2,
            GateSet::CliffordV(p) => *p,
        }
    }

    pub fn generators(&self) -> Vec<Gate> {
        match *self {
            GateSet::CliffordT => vec![Gate::T],
            GateSet::CliffordV(p) => (1..=p as u32 + 1).map(|i| Gate::V { p, i }).collect(),
        }
    }
}

impl fmt::Display for GateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateSet::CliffordT => write!(f, "t"),
            GateSet::CliffordV(p) => write!(f, "v{p}"),
        }
    }
}

impl FromStr for GateSet {
    type Err = GateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        let t = t.strip_prefix("clifford+").unwrap_or(&t);
        if t == "t" {
            return Ok(GateSet::CliffordT);
        }
        let digits = t.strip_prefix("v_").or_else(|| t.strip_prefix('v'));
        match digits.and_then(|d| d.parse::<u64>().ok()) {
            Some(p) => GateSet::v(p),
            None => Err(GateError::UnknownSet(s.to_string())),
        }
    }
}

impl Serialize for GateSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GateSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn is_odd_prime(p: u64) -> bool {
    p >= 3 && p % 2 == 1 && (3..).step_by(2).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H,
    S,
    T,
    /// Clifford by table index `0..24`.
    C(u8),
    /// `V_p^{(i)}` with `i ∈ 1..=p+1`.
    V { p: u64, i: u32 },
}

impl Gate {
    pub fn is_clifford(&self) -> bool {
        matches!(self, Gate::H | Gate::S | Gate::C(_))
    }

    pub fn exact(&self) -> ExactMatrix {
        match *self {
            Gate::H => h_exact(),
            Gate::S => s_exact(),
            Gate::T => t_exact(),
            Gate::C(k) => cliffords()[k as usize].exact.clone(),
            Gate::V { p, i } => vp_representatives(p).expect("validated prime")[i as usize - 1].exact.clone(),
        }
    }

    pub fn channel(&self) -> UnitaryChannel {
        match *self {
            Gate::C(k) => cliffords()[k as usize].channel,
            Gate::V { p, i } => vp_representatives(p).expect("validated prime")[i as usize - 1].channel,
            _ => self.exact().channel(),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H => write!(f, "H"),
            Gate::S => write!(f, "S"),
            Gate::T => write!(f, "T"),
            Gate::C(k) => write!(f, "C{k}"),
            Gate::V { p, i } => write!(f, "V{p}:{i}"),
        }
    }
}

impl FromStr for Gate {
    type Err = GateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || GateError::MalformedToken(s.to_string());
        match s {
            "H" => return Ok(Gate::H),
            "S" => return Ok(Gate::S),
            "T" => return Ok(Gate::T),
            _ => {}
        }
        if let Some(k) = s.strip_prefix('C') {
            let k: u8 = k.parse().map_err(|_| err())?;
            if k >= 24 || !s[1..].chars().all(|c| c.is_ascii_digit()) {
                return Err(err());
            }
            return Ok(Gate::C(k));
        }
        if let Some(rest) = s.strip_prefix('V') {
            let (p, i) = rest.split_once(':').ok_or_else(err)?;
            let p: u64 = p.parse().map_err(|_| err())?;
            let i: u32 = i.parse().map_err(|_| err())?;
            if !is_odd_prime(p) || i == 0 || i as u64 > p + 1 {
                return Err(err());
            }
            return Ok(Gate::V { p, i });
        }
        Err(err())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateSequence {
    pub set: GateSet,
    pub word: Vec<Gate>,
}

impl GateSequence {
    pub fn new(set: GateSet, word: Vec<Gate>) -> Result<Self, GateError> {
        for g in &word {
            let ok = match (g, set) {
                (Gate::T, GateSet::CliffordT) => true,
                (Gate::V { p, .. }, GateSet::CliffordV(q)) => *p == q,
                (Gate::T, _) | (Gate::V { .. }, _) => false,
                _ => true,
            };
            if !ok {
                return Err(GateError::SetMismatch { token: g.to_string(), set: set.to_string() });
            }
        }
        Ok(Self { set, word })
    }

    pub fn g_count(&self) -> usize {
        self.word.iter().filter(|g| !g.is_clifford()).count()
    }

    /// Parses a word, inferring the set from its tokens; Clifford-only words default to Clifford+T.
    pub fn parse(s: &str) -> Result<Self, GateError> {
        let word: Vec<Gate> = s.split_whitespace().map(str::parse).collect::<Result<_, _>>()?;
        let set = word
            .iter()
            .find_map(|g| match g {
                Gate::T => Some(GateSet::CliffordT),
                Gate::V { p, .. } => Some(GateSet::CliffordV(*p)),
                _ => None,
            })
            .unwrap_or(GateSet::CliffordT);
        Self::new(set, word)
    }

    pub fn parse_for(set: GateSet, s: &str) -> Result<Self, GateError> {
        let word = s.split_whitespace().map(str::parse).collect::<Result<_, _>>()?;
        Self::new(set, word)
    }

    pub fn evaluate_exact(&self) -> ExactMatrix {
        self.word.iter().fold(ExactMatrix::identity(), |acc, g| acc.mul(&g.exact()))
    }

    pub fn evaluate_channel(&self) -> UnitaryChannel {
        let q = self
            .word
            .iter()
            .fold([1.0, 0.0, 0.0, 0.0], |acc, g| quat_mul(&acc, &g.channel().quaternion()));
        UnitaryChannel::new(q).expect("unit product")
    }

    /// Float channel and exact form.
    pub fn evaluate(&self) -> (UnitaryChannel, ExactMatrix) {
        (self.evaluate_channel(), self.evaluate_exact())
    }
}

impl fmt::Display for GateSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let toks: Vec<String> = self.word.iter().map(|g| g.to_string()).collect();
        write!(f, "{}", toks.join(" "))
    }
}

fn h_exact() -> ExactMatrix {
    ExactMatrix::new([ZOmega::one(), ZOmega::one(), ZOmega::one(), ZOmega::from_int(-1)], 1, 0, 1)
}

fn s_exact() -> ExactMatrix {
    ExactMatrix::new([ZOmega::one(), ZOmega::zero(), ZOmega::zero(), ZOmega::i()], 0, 0, 1)
}

fn t_exact() -> ExactMatrix {
    ExactMatrix::new([ZOmega::one(), ZOmega::zero(), ZOmega::zero(), ZOmega::zeta()], 0, 0, 1)
}

#[derive(Clone, Debug)]
pub struct CliffordEntry {
    pub index: u8,
    /// Shortest word over `H`, `S` found first by breadth-first search.
    pub word: Vec<Gate>,
    pub exact: ExactMatrix,
    pub channel: UnitaryChannel,
}

/// The 24 single-qubit Clifford channels, indexed by breadth-first order from the identity
/// with generators tried in the order `H`, `S`.
pub fn cliffords() -> &'static [CliffordEntry] {
    static TABLE: OnceLock<Vec<CliffordEntry>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let gens = [(Gate::H, h_exact()), (Gate::S, s_exact())];
        let mut seen: HashMap<ChannelKey, ()> = HashMap::new();
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        let id = ExactMatrix::identity();
        seen.insert(id.channel_key(), ());
        queue.push_back((Vec::new(), id));
        while let Some((word, m)) = queue.pop_front() {
            out.push((word.clone(), m.clone()));
            for (g, gm) in &gens {
                let n = m.mul(gm);
                if seen.insert(n.channel_key(), ()).is_none() {
                    let mut w = word.clone();
                    w.push(*g);
                    queue.push_back((w, n));
                }
            }
        }
        assert_eq!(out.len(), 24);
        out.into_iter()
            .enumerate()
            .map(|(i, (word, exact))| CliffordEntry {
                index: i as u8,
                channel: exact.channel(),
                word,
                exact,
            })
            .collect()
    })
}

/// Clifford index of a channel key, if it is a Clifford.
pub fn clifford_index(key: &ChannelKey) -> Option<u8> {
    static INDEX: OnceLock<HashMap<ChannelKey, u8>> = OnceLock::new();
    INDEX
        .get_or_init(|| cliffords().iter().map(|c| (c.exact.channel_key(), c.index)).collect())
        .get(key)
        .copied()
}

#[derive(Clone, Debug)]
pub struct VGate {
    pub index: u32,
    /// `(α, β, γ, δ)` with `α²+β²+γ²+δ² = p`.
    pub point: [i64; 4],
    pub exact: ExactMatrix,
    pub channel: UnitaryChannel,
    /// Index of the unique `j` with `V_i·V_j` a Pauli unit.
    pub inverse_index: u32,
}

pub type VTable = Arc<Vec<VGate>>;

/// Integer solutions of `α²+β²+γ²+δ² = n`, in lexicographic order.
pub fn four_square_solutions(n: i64) -> Vec<[i64; 4]> {
    let r = (n as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                let rest = n - a * a - b * b - c * c;
                if rest < 0 {
                    continue;
                }
                let d = (rest as f64).sqrt().round() as i64;
                if d * d == rest {
                    out.push([a, b, c, d]);
                    if d != 0 {
                        out.push([a, b, c, -d]);
                    }
                }
            }
        }
    }
    out.sort();
    out
}

const PAULI_UNITS: [[i64; 4]; 8] = [
    [1, 0, 0, 0],
    [-1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, -1, 0, 0],
    [0, 0, 1, 0],
    [0, 0, -1, 0],
    [0, 0, 0, 1],
    [0, 0, 0, -1],
];

fn right_orbit(q: &[i64; 4]) -> Vec<[i64; 4]> {
    PAULI_UNITS.iter().map(|u| quat_mul(q, u)).collect()
}

fn orbit_representative(q: &[i64; 4]) -> [i64; 4] {
    right_orbit(q)
        .into_iter()
        .filter(|x| x[0] > 0 && x[0] % 2 == 1)
        .min()
        .expect("every orbit of an odd prime norm has an odd coordinate")
}

/// Matrix `[[α+iβ, −γ+iδ], [γ+iδ, α−iβ]]` of an integer quaternion.
pub fn quaternion_matrix(q: &[i64; 4]) -> [ZOmega; 4] {
    let [a, b, c, d] = *q;
    [ZOmega::gaussian(a, b), ZOmega::gaussian(-c, d), ZOmega::gaussian(c, d), ZOmega::gaussian(a, -b)]
}

/// The `p+1` generators `V_p^{(i)} = (αI + iβZ − iγY + iδX)/√p`, one per right Pauli orbit.
pub fn vp_representatives(p: u64) -> Result<VTable, GateError> {
    if !is_odd_prime(p) {
        return Err(GateError::NotOddPrime(p));
    }
    static CACHE: OnceLock<Mutex<HashMap<u64, VTable>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().expect("cache lock").get(&p) {
        return Ok(t.clone());
    }
    let mut reps: Vec<[i64; 4]> =
        four_square_solutions(p as i64).iter().map(orbit_representative).collect();
    reps.sort();
    reps.dedup();
    assert_eq!(reps.len() as u64, p + 1);
    let pos: HashMap<[i64; 4], u32> = reps.iter().enumerate().map(|(i, q)| (*q, i as u32 + 1)).collect();
    let table: Vec<VGate> = reps
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let conj = [q[0], -q[1], -q[2], -q[3]];
            let exact = ExactMatrix::new(quaternion_matrix(q), 0, 1, p);
            VGate {
                index: i as u32 + 1,
                point: *q,
                channel: UnitaryChannel::new(q.map(|x| x as f64)).expect("nonzero"),
                exact,
                inverse_index: pos[&orbit_representative(&conj)],
            }
        })
        .collect();
    let table = Arc::new(table);
    cache.lock().expect("cache lock").insert(p, table.clone());
    Ok(table)
}
