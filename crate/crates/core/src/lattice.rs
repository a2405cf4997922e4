//! Integer points on the spheres `S_Z(p^k)` and `S_{Z[√2]}(2^k)`, and a nearest-channel
//! database over their induced channels.

use std::collections::HashMap;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::gates::GateSet;
use crate::rings::ZRoot2;
use crate::su2::{QuaternionPoint, UnitaryChannel};

/// Largest number of sphere points a database build may enumerate.
pub const POINT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LatticeError {
    #[error("projected {projected} points exceeds the budget of {budget}")]
    BudgetExceeded { projected: u64, budget: u64 },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Coordinates `a + b√2` stored as `(a, b)`; integer points have `b = 0`.
pub type Coord = (i64, i64);

fn sq(x: Coord) -> Coord {
    (x.0 * x.0 + 2 * x.1 * x.1, 2 * x.0 * x.1)
}

fn add(x: Coord, y: Coord) -> Coord {
    (x.0 + y.0, x.1 + y.1)
}

/// Exact `x ≥ 0` at both embeddings, for `x = a + b√2`.
fn totally_nonneg(x: Coord) -> bool {
    let (a, b) = (x.0 as i128, x.1 as i128);
    let ge = |a: i128, b: i128| match (a >= 0, b >= 0) {
        (true, true) => true,
        (false, false) => a == 0 && b == 0,
        (true, false) => a * a >= 2 * b * b,
        (false, true) => 2 * b * b >= a * a,
    };
    ge(a, b) && ge(a, -b)
}

/// All `(α, β, γ, δ) ∈ Z⁴` with `α²+β²+γ²+δ² = n`, sorted.
pub fn enumerate_sz(n: u64) -> Vec<[i64; 4]> {
    let n = n as i64;
    let r = isqrt(n);
    let mut two: Vec<Vec<(i64, i64)>> = vec![Vec::new(); n as usize + 1];
    for a in -r..=r {
        for b in -r..=r {
            let s = a * a + b * b;
            if s <= n {
                two[s as usize].push((a, b));
            }
        }
    }
    let mut out: Vec<[i64; 4]> = (0..=n as usize)
        .into_par_iter()
        .flat_map_iter(|s| {
            let rest = &two[n as usize - s];
            let two = &two;
            two[s].iter().flat_map(move |&(a, b)| rest.iter().map(move |&(c, d)| [a, b, c, d]))
        })
        .collect();
    out.sort_unstable();
    out
}

/// `r₄(n)` through the two-squares table, without materializing the points.
pub fn count_sz(n: u64) -> u64 {
    let n = n as i64;
    let r = isqrt(n);
    let mut two = vec![0u64; n as usize + 1];
    for a in -r..=r {
        for b in -r..=r {
            let s = a * a + b * b;
            if s <= n {
                two[s as usize] += 1;
            }
        }
    }
    (0..=n as usize).map(|s| two[s] * two[n as usize - s]).sum()
}

fn isqrt(n: i64) -> i64 {
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Elements `x ∈ Z[√2]` with `x²` totally at most `bound`.
fn zroot2_candidates(bound: Coord) -> Vec<Coord> {
    let b1 = (bound.0 as f64 + bound.1 as f64 * std::f64::consts::SQRT_2).max(0.0).sqrt();
    let b2 = (bound.0 as f64 - bound.1 as f64 * std::f64::consts::SQRT_2).max(0.0).sqrt();
    let amax = ((b1 + b2) / 2.0).ceil() as i64 + 1;
    let bmax = ((b1 + b2) / (2.0 * std::f64::consts::SQRT_2)).ceil() as i64 + 1;
    let mut out = Vec::new();
    for a in -amax..=amax {
        for b in -bmax..=bmax {
            let s = sq((a, b));
            if totally_nonneg((bound.0 - s.0, bound.1 - s.1)) {
                out.push((a, b));
            }
        }
    }
    out
}

/// All `(α, β, γ, δ) ∈ Z[√2]⁴` with `α²+β²+γ²+δ² = 2^k` exactly, sorted.
pub fn enumerate_szroot2(k: u32) -> Vec<[Coord; 4]> {
    let n: Coord = (1i64 << k, 0);
    let cands = zroot2_candidates(n);
    // two-square sums grouped by value
    let mut pairs: Vec<(Coord, u32, u32)> = Vec::new();
    for (i, &x) in cands.iter().enumerate() {
        let sx = sq(x);
        for (j, &y) in cands.iter().enumerate() {
            let s = add(sx, sq(y));
            if totally_nonneg((n.0 - s.0, n.1 - s.1)) {
                pairs.push((s, i as u32, j as u32));
            }
        }
    }
    pairs.sort_unstable();
    let mut groups: HashMap<Coord, (usize, usize)> = HashMap::new();
    let mut start = 0;
    while start < pairs.len() {
        let key = pairs[start].0;
        let mut end = start;
        while end < pairs.len() && pairs[end].0 == key {
            end += 1;
        }
        groups.insert(key, (start, end));
        start = end;
    }
    let keys: Vec<(Coord, (usize, usize))> = groups.iter().map(|(k, v)| (*k, *v)).collect();
    let mut out: Vec<[Coord; 4]> = keys
        .par_iter()
        .flat_map_iter(|&(key, (s0, e0))| {
            let rest = (n.0 - key.0, n.1 - key.1);
            let (s1, e1) = groups.get(&rest).copied().unwrap_or((0, 0));
            let pairs = &pairs;
            let cands = &cands;
            (s0..e0).flat_map(move |p| {
                (s1..e1).map(move |q| {
                    let (_, a, b) = pairs[p];
                    let (_, c, d) = pairs[q];
                    [cands[a as usize], cands[b as usize], cands[c as usize], cands[d as usize]]
                })
            })
        })
        .collect();
    out.sort_unstable();
    out
}

pub fn to_point(c: &[Coord; 4], n: Coord) -> QuaternionPoint {
    QuaternionPoint::new(c.map(|(a, b)| ZRoot2::new(a, b)), ZRoot2::new(n.0, n.1))
}

fn point_channel(c: &[Coord; 4]) -> UnitaryChannel {
    let s = std::f64::consts::SQRT_2;
    UnitaryChannel::new(c.map(|(a, b)| a as f64 + b as f64 * s)).expect("nonzero point")
}

/// Sum of squares of a point at the level's norm.
pub fn level_norm(set: GateSet, k: u32) -> Coord {
    match set {
        GateSet::CliffordT => (1i64 << k, 0),
        GateSet::CliffordV(p) => ((p as i64).pow(k), 0),
    }
}

/// Points counted by the budget guard for a single level.
pub fn projected_level_points(set: GateSet, k: u32) -> u64 {
    match set {
        // r₄(p^k) = 8σ(p^k)
        GateSet::CliffordV(p) => {
            let num = (p as u128).pow(k + 1) - 1;
            (8 * num / (p as u128 - 1)).min(u64::MAX as u128) as u64
        }
        // measured: |S_{Z[√2]}(2^k)| = 8, 32, then 48·(4^{k−1} − 1) for k ≥ 2
        GateSet::CliffordT => match k {
            0 => 8,
            1 => 32,
            _ => 48u64.saturating_mul(4u64.saturating_pow(k - 1) - 1),
        },
    }
}

/// Stored point with exact coordinates and the level it first appears on.
#[derive(Clone, Debug, PartialEq)]
pub struct DbEntry {
    pub coords: [Coord; 4],
    pub level: u32,
    pub channel: UnitaryChannel,
}

impl DbEntry {
    pub fn point(&self, set: GateSet) -> QuaternionPoint {
        to_point(&self.coords, level_norm(set, self.level))
    }
}

/// Uniform R⁴ grid of occupied cells; every channel is stored at `q` and `−q`.
#[derive(Clone, Debug)]
struct GridIndex {
    h: f64,
    cells: HashMap<[i32; 4], Vec<(u32, [f64; 4])>>,
}

impl GridIndex {
    fn build(entries: &[DbEntry], ids: &[u32]) -> Self {
        let n = (2 * ids.len()).max(1) as f64;
        let h = (2.0 * std::f64::consts::PI.powi(2) / n).cbrt().clamp(1e-3, 0.5);
        let mut cells: HashMap<[i32; 4], Vec<(u32, [f64; 4])>> = HashMap::new();
        for &id in ids {
            let q = entries[id as usize].channel.quaternion();
            for s in [1.0, -1.0] {
                let v = q.map(|x| s * x);
                cells.entry(Self::cell(h, &v)).or_default().push((id, v));
            }
        }
        Self { h, cells }
    }

    fn cell(h: f64, v: &[f64; 4]) -> [i32; 4] {
        v.map(|x| (x / h).floor() as i32)
    }

    /// Nearest stored vector to `t` in Euclidean R⁴ distance.
    fn nearest(&self, t: &[f64; 4]) -> Option<(u32, f64)> {
        let c = Self::cell(self.h, t);
        let rmax = (2.0 / self.h).ceil() as i32 + 2;
        let mut best: Option<(u32, f64)> = None;
        for r in 0..=rmax {
            visit_shell(c, r, |cell| {
                if let Some(list) = self.cells.get(&cell) {
                    for (id, v) in list {
                        let d2: f64 = (0..4).map(|i| (v[i] - t[i]).powi(2)).sum();
                        match best {
                            Some((bid, bd)) if bd < d2 || (bd == d2 && bid <= *id) => {}
                            _ => best = Some((*id, d2)),
                        }
                    }
                }
            });
            // unvisited cells lie at distance ≥ r·h
            if let Some((_, d2)) = best {
                if d2.sqrt() < r as f64 * self.h {
                    break;
                }
            }
        }
        best
    }
}

/// Calls `f` on every cell at Chebyshev distance exactly `r` from `c`.
fn visit_shell(c: [i32; 4], r: i32, mut f: impl FnMut([i32; 4])) {
    if r == 0 {
        f(c);
        return;
    }
    for a in -r..=r {
        for b in -r..=r {
            for d in -r..=r {
                let on_face = a.abs() == r || b.abs() == r || d.abs() == r;
                if on_face {
                    for e in -r..=r {
                        f([c[0] + a, c[1] + b, c[2] + d, c[3] + e]);
                    }
                } else {
                    f([c[0] + a, c[1] + b, c[2] + d, c[3] - r]);
                    f([c[0] + a, c[1] + b, c[2] + d, c[3] + r]);
                }
            }
        }
    }
}

/// Channels induced by sphere points, one entry per channel, grouped by first level.
#[derive(Clone, Debug)]
pub struct PointDatabase {
    pub set: GateSet,
    pub entries: Vec<DbEntry>,
    level_ids: Vec<Vec<u32>>,
    grids: Vec<GridIndex>,
}

/// Reduced representative: divide out √2 (T) or p (V) and fix the overall sign.
fn reduced(set: GateSet, c: &[Coord; 4]) -> ([Coord; 4], u32) {
    let mut c = *c;
    let mut drop = 0;
    match set {
        GateSet::CliffordT => {
            while c.iter().all(|x| x.0 % 2 == 0) {
                // (a + b√2)/√2 = b + (a/2)√2
                c = c.map(|(a, b)| (b, a / 2));
                drop += 1;
            }
        }
        GateSet::CliffordV(p) => {
            let p = p as i64;
            while c.iter().all(|x| x.0 % p == 0) {
                c = c.map(|(a, b)| (a / p, b / p));
                drop += 2;
            }
        }
    }
    // |a + b√2| ≥ 1/|a − b√2| is far above f64 rounding at these magnitudes
    let s = std::f64::consts::SQRT_2;
    if let Some(x) = c.iter().find(|x| **x != (0, 0)) {
        if x.0 as f64 + x.1 as f64 * s < 0.0 {
            c = c.map(|(a, b)| (-a, -b));
        }
    }
    (c, drop)
}

impl PointDatabase {
    pub fn build(set: GateSet, k_max: u32) -> Result<Self, LatticeError> {
        let projected: u64 = (0..=k_max).map(|k| projected_level_points(set, k)).fold(0u64, u64::saturating_add);
        if projected > POINT_BUDGET {
            return Err(LatticeError::BudgetExceeded { projected, budget: POINT_BUDGET });
        }
        let mut entries = Vec::new();
        let mut level_ids = Vec::new();
        for k in 0..=k_max {
            let pts = level_points(set, k);
            let mut ids = Vec::new();
            let mut seen = std::collections::HashSet::new();
            for c in pts {
                let (r, drop) = reduced(set, &c);
                if drop > 0 || !seen.insert(r) {
                    continue;
                }
                ids.push(entries.len() as u32);
                entries.push(DbEntry { coords: r, level: k, channel: point_channel(&r) });
            }
            level_ids.push(ids);
        }
        let grids = level_ids.iter().map(|ids| GridIndex::build(&entries, ids)).collect();
        Ok(Self { set, entries, level_ids, grids })
    }

    pub fn k_max(&self) -> u32 {
        self.level_ids.len() as u32 - 1
    }

    /// Entries introduced at exactly level `k`.
    pub fn level(&self, k: u32) -> impl Iterator<Item = &DbEntry> {
        self.level_ids[k as usize].iter().map(|&i| &self.entries[i as usize])
    }

    pub fn level_size(&self, k: u32) -> usize {
        self.level_ids[k as usize].len()
    }

    /// Channels available with levels `≤ k`; for V these are cumulative across parities.
    pub fn size_up_to(&self, k: u32) -> usize {
        (0..=k.min(self.k_max())).map(|j| self.level_size(j)).sum()
    }

    /// G-count bound of a level: `2k+1` for T, `k` for V.
    pub fn g_bound(&self, k: u32) -> u32 {
        match self.set {
            GateSet::CliffordT => 2 * k + 1,
            GateSet::CliffordV(_) => k,
        }
    }

    /// Minimum-distance entry over levels `≤ k`; ties go to the lower entry index.
    pub fn query_nearest(&self, target: &UnitaryChannel, k: u32) -> Option<(&DbEntry, f64)> {
        let t = target.quaternion();
        let mut best: Option<(u32, f64)> = None;
        for j in 0..=k.min(self.k_max()) {
            if let Some((id, d2)) = self.grids[j as usize].nearest(&t) {
                match best {
                    Some((bid, bd)) if bd < d2 || (bd == d2 && bid < id) => {}
                    _ => best = Some((id, d2)),
                }
            }
        }
        best.map(|(id, _)| {
            let e = &self.entries[id as usize];
            (e, e.channel.diamond_distance(target))
        })
    }

    /// Linear-scan reference for [`Self::query_nearest`].
    pub fn linear_nearest(&self, target: &UnitaryChannel, k: u32) -> Option<(&DbEntry, f64)> {
        (0..=k.min(self.k_max()))
            .flat_map(|j| self.level(j))
            .map(|e| (e, e.channel.diamond_distance(target)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Monte-Carlo estimate of `max_U min_x d(U, x)` over levels `≤ k`.
    pub fn covering_radius<R: Rng + ?Sized>(&self, k: u32, samples: usize, rng: &mut R) -> f64 {
        let targets: Vec<UnitaryChannel> = (0..samples).map(|_| UnitaryChannel::haar_sample(rng)).collect();
        targets
            .par_iter()
            .map(|t| self.query_nearest(t, k).map_or(1.0, |(_, d)| d))
            .reduce(|| 0.0, f64::max)
    }

    /// Fraction of Haar samples farther than `eps` from every level-`≤ k` channel.
    pub fn uncovered_fraction<R: Rng + ?Sized>(&self, k: u32, eps: f64, samples: usize, rng: &mut R) -> f64 {
        let targets: Vec<UnitaryChannel> = (0..samples).map(|_| UnitaryChannel::haar_sample(rng)).collect();
        let n = targets
            .par_iter()
            .filter(|t| self.query_nearest(t, k).is_none_or(|(_, d)| d > eps))
            .count();
        n as f64 / samples.max(1) as f64
    }
}

/// All sphere points of one level, unreduced.
pub fn level_points(set: GateSet, k: u32) -> Vec<[Coord; 4]> {
    match set {
        GateSet::CliffordT => enumerate_szroot2(k),
        GateSet::CliffordV(p) => enumerate_sz(p.pow(k)).into_iter().map(|c| c.map(|x| (x, 0))).collect(),
    }
}

/// Writes `level, alpha_a, alpha_b, beta_a, beta_b, gamma_a, gamma_b, delta_a, delta_b, n`.
pub fn write_points_csv<W: Write>(set: GateSet, k: u32, out: W) -> Result<usize, LatticeError> {
    let projected = projected_level_points(set, k);
    if projected > POINT_BUDGET {
        return Err(LatticeError::BudgetExceeded { projected, budget: POINT_BUDGET });
    }
    let io = |e: csv::Error| LatticeError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "level", "alpha_a", "alpha_b", "beta_a", "beta_b", "gamma_a", "gamma_b", "delta_a", "delta_b", "n",
    ])
    .map_err(io)?;
    let n = level_norm(set, k);
    let pts = level_points(set, k);
    for c in &pts {
        let mut rec = vec![k.to_string()];
        for (a, b) in c {
            rec.push(a.to_string());
            rec.push(b.to_string());
        }
        rec.push(n.0.to_string());
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| LatticeError::Io(e.to_string()))?;
    Ok(pts.len())
}
