//! Experiment suites: G-count scaling, edge-case targets, the Liouville-type construction and
//! covering trends. Every suite returns its invariant checks alongside the data.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{gcount_approx, level_channels_near, ApproxError, MAX_BUDGET_T, MAX_BUDGET_V};
use crate::exact::ExactMatrix;
use crate::exact_synth::{exact_overlap_matrices, ma_normal_form, recognize_t, recognize_v, t_count, ScaledMatrix, SynthError};
use crate::gates::{GateSequence, GateSet};
use crate::lattice::{LatticeError, PointDatabase};
use crate::prob_synth::prob_gcount;
use crate::rings::{Embedding, QSqrt2, ZRoot2};
use crate::su2::{quat_mul, worker_rng, UnitaryChannel};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("target {name} rejected: {reason}")]
    NotEdge { name: String, reason: String },
    #[error("liouville search failed at n = {n}; deepest level reached {deepest_level}")]
    LiouvilleSearch { n: u32, deepest_level: u32 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("io: {0}")]
    Io(String),
}

/// One named invariant check of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.to_string(), passed, detail: detail.into() }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

/// Applies `QSYNTH_THREADS` to the global rayon pool; a no-op once the pool exists.
pub fn init_thread_pool() {
    if let Some(n) = std::env::var("QSYNTH_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

// ---------------------------------------------------------------- config

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub gate_set: GateSet,
    pub budget: u32,
    #[serde(default)]
    pub seed: u64,
    /// Also record `prob_gcount` at each ε.
    #[serde(default)]
    pub prob: bool,
    /// Also check `prob_gcount(u, G, ε²) ≥ det_count` at each ε.
    #[serde(default)]
    pub transfer: bool,
    /// Fill `elapsed_ms`; off by default so that output is byte-deterministic.
    #[serde(default)]
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    /// `haar:N`, `rz:θ`, `point:a,b,c,d`, `edge:NAME` or `edge:all`.
    pub specs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub eps: Option<Vec<f64>>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub csv: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub run: RunSection,
    pub targets: TargetSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiouvilleConfig {
    pub n_max: u32,
    #[serde(default = "default_c_prime")]
    pub c_prime: f64,
}

fn default_c_prime() -> f64 {
    12.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoveringConfig {
    pub gate_set: GateSet,
    pub k_max: u32,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    10_000
}

/// A config file; each suite reads its own sections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub run: Option<RunSection>,
    pub targets: Option<TargetSection>,
    pub grid: Option<GridSection>,
    pub output: Option<OutputSection>,
    pub liouville: Option<LiouvilleConfig>,
    pub covering: Option<CoveringConfig>,
}

impl ExperimentFile {
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn scaling(&self) -> Result<ScalingConfig, ExperimentError> {
        let run = self.run.clone().ok_or_else(|| ExperimentError::Config("missing [run]".into()))?;
        let targets = self.targets.clone().ok_or_else(|| ExperimentError::Config("missing [targets]".into()))?;
        let cfg = ScalingConfig {
            run,
            targets,
            grid: self.grid.clone().unwrap_or_default(),
            output: self.output.clone().unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn liouville(&self) -> Result<LiouvilleConfig, ExperimentError> {
        self.liouville.clone().ok_or_else(|| ExperimentError::Config("missing [liouville]".into()))
    }

    pub fn covering(&self) -> Result<CoveringConfig, ExperimentError> {
        self.covering.clone().ok_or_else(|| ExperimentError::Config("missing [covering]".into()))
    }
}

impl GridSection {
    /// Explicit list, or `points` geometric steps from `from` down to `to` (default 0.3 → 0.05, 6).
    pub fn resolve(&self) -> Result<Vec<f64>, ExperimentError> {
        let eps = match &self.eps {
            Some(e) => e.clone(),
            None => {
                let (a, b, n) = (self.from.unwrap_or(0.3), self.to.unwrap_or(0.05), self.points.unwrap_or(6));
                if n < 2 || !(a > b && b > 0.0) {
                    return Err(ExperimentError::Config("geometric grid needs from > to > 0 and points ≥ 2".into()));
                }
                let r = (b / a).powf(1.0 / (n - 1) as f64);
                (0..n).map(|i| if i + 1 == n { b } else { a * r.powi(i as i32) }).collect()
            }
        };
        if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
            return Err(ExperimentError::Config("ε values must lie in (0, 1]".into()));
        }
        if eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(ExperimentError::Config("ε grid must be strictly decreasing".into()));
        }
        Ok(eps)
    }
}

impl ScalingConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.grid.resolve()?;
        let limit = match self.run.gate_set {
            GateSet::CliffordT => MAX_BUDGET_T,
            GateSet::CliffordV(_) => MAX_BUDGET_V,
        };
        if self.run.budget > limit {
            return Err(ExperimentError::Config(format!("budget {} exceeds {limit}", self.run.budget)));
        }
        if self.targets.specs.is_empty() {
            return Err(ExperimentError::Config("no targets".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- targets

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub id: String,
    pub kind: String,
    pub channel: UnitaryChannel,
}

/// Edge-case target: a quaternion ratio over the integers that is not exactly synthesizable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeTarget {
    pub name: String,
    pub ratio: [i64; 4],
    /// `α²+β²+γ²+δ²`; the channel is `ratio/√norm`.
    pub norm: i64,
    pub channel: UnitaryChannel,
}

const EDGE_CANDIDATES: [(&str, [i64; 4]); 4] =
    [("ones3", [1, 1, 1, 0]), ("q1234", [1, 2, 3, 4]), ("q1123", [1, 1, 2, 3]), ("q2110", [2, 1, 1, 0])];

/// Accepts `ratio` as an edge target for `set` only if exact recognition rejects it.
pub fn edge_case_candidate(set: GateSet, name: &str, ratio: [i64; 4]) -> Result<EdgeTarget, ExperimentError> {
    let norm: i64 = ratio.iter().map(|x| x * x).sum();
    let reject = |reason: String| ExperimentError::NotEdge { name: name.to_string(), reason };
    if norm == 0 {
        return Err(reject("zero quaternion".into()));
    }
    let m = ScaledMatrix::from_int_point(ratio);
    let verdict = match set {
        GateSet::CliffordT => recognize_t(&m).map(|_| ()),
        GateSet::CliffordV(p) => recognize_v(&m, p).map(|_| ()),
    };
    match verdict {
        Ok(()) => Err(reject(format!("exactly synthesizable over {set}"))),
        Err(SynthError::NotSynthesizable { .. }) => {
            let channel = UnitaryChannel::new(ratio.map(|x| x as f64)).expect("nonzero");
            Ok(EdgeTarget { name: name.to_string(), ratio, norm, channel })
        }
        Err(e) => Err(reject(format!("recognition error: {e}"))),
    }
}

/// Built-in edge targets, each verified non-synthesizable over `set`.
pub fn edge_case_targets(set: GateSet) -> Result<Vec<EdgeTarget>, ExperimentError> {
    EDGE_CANDIDATES.iter().map(|(n, r)| edge_case_candidate(set, n, *r)).collect()
}

pub fn resolve_targets(set: GateSet, specs: &[String], seed: u64) -> Result<Vec<Target>, ExperimentError> {
    let bad = |s: &str| ExperimentError::Config(format!("bad target spec {s:?}"));
    let mut out = Vec::new();
    let mut haar_index = 0u64;
    for spec in specs {
        let (kind, arg) = spec.split_once(':').ok_or_else(|| bad(spec))?;
        match kind.trim() {
            "haar" => {
                let n: u64 = arg.trim().parse().map_err(|_| bad(spec))?;
                for _ in 0..n {
                    let channel = UnitaryChannel::haar_sample(&mut worker_rng(seed, haar_index));
                    out.push(Target { id: format!("haar-{haar_index}"), kind: "haar".into(), channel });
                    haar_index += 1;
                }
            }
            "rz" => {
                let th: f64 = arg.trim().parse().map_err(|_| bad(spec))?;
                out.push(Target { id: format!("rz-{}", arg.trim()), kind: "rz".into(), channel: UnitaryChannel::rz(th) });
            }
            "point" => {
                let v: Vec<i64> = arg.split(',').map(|x| x.trim().parse()).collect::<Result<_, _>>().map_err(|_| bad(spec))?;
                let q: [i64; 4] = v.try_into().map_err(|_| bad(spec))?;
                let channel = UnitaryChannel::new(q.map(|x| x as f64)).map_err(|_| bad(spec))?;
                let id = format!("point-{}", q.map(|x| x.to_string()).join("_"));
                out.push(Target { id, kind: "point".into(), channel });
            }
            "edge" => {
                let all = edge_case_targets(set)?;
                let name = arg.trim();
                let chosen: Vec<EdgeTarget> = if name == "all" {
                    all
                } else {
                    let r = EDGE_CANDIDATES.iter().find(|(n, _)| *n == name).ok_or_else(|| bad(spec))?.1;
                    vec![edge_case_candidate(set, name, r)?]
                };
                out.extend(chosen.into_iter().map(|e| Target { id: format!("edge-{}", e.name), kind: "edge".into(), channel: e.channel }));
            }
            "q" => {
                let channel: UnitaryChannel = spec.parse().map_err(|_| bad(spec))?;
                out.push(Target { id: format!("q-{}", out.len()), kind: "quaternion".into(), channel });
            }
            _ => return Err(bad(spec)),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- scaling

/// One `(target, ε)` cell. Counts are blank when the budget was exhausted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub target_id: String,
    pub kind: String,
    pub eps: f64,
    pub det_count: Option<u32>,
    pub prob_count: Option<u32>,
    pub best_distance: f64,
    pub elapsed_ms: Option<u64>,
}

pub const SCALING_HEADER: [&str; 7] = ["target_id", "kind", "eps", "det_count", "prob_count", "best_distance", "elapsed_ms"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// `{target_id: slope}`, `null` where fewer than three counts were found.
    pub summary: BTreeMap<String, Option<f64>>,
    pub checks: Vec<Check>,
}

impl ScalingReport {
    pub fn csv(&self) -> Result<String, ExperimentError> {
        write_scaling_csv(&self.rows)
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("map of floats")
    }
}

pub fn write_scaling_csv(rows: &[ScalingRow]) -> Result<String, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SCALING_HEADER).map_err(|e| ExperimentError::Io(e.to_string()))?;
    for r in rows {
        w.write_record([
            r.target_id.clone(),
            r.kind.clone(),
            format!("{}", r.eps),
            r.det_count.map(|c| c.to_string()).unwrap_or_default(),
            r.prob_count.map(|c| c.to_string()).unwrap_or_default(),
            format!("{:.17e}", r.best_distance),
            r.elapsed_ms.map(|c| c.to_string()).unwrap_or_default(),
        ])
        .map_err(|e| ExperimentError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8 csv"))
}

/// Parses CSV with the [`SCALING_HEADER`] schema; errors name the 1-based data row.
pub fn read_scaling_csv(text: &str) -> Result<Vec<ScalingRow>, ExperimentError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| ExperimentError::Io(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != SCALING_HEADER {
        return Err(ExperimentError::Io(format!("unexpected header {header:?}")));
    }
    let opt_u = |s: &str| -> Result<Option<u64>, ()> { if s.is_empty() { Ok(None) } else { s.parse().map(Some).map_err(|_| ()) } };
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let bad = || ExperimentError::Io(format!("row {}: schema mismatch", i + 1));
        let rec = rec.map_err(|_| bad())?;
        if rec.len() != SCALING_HEADER.len() {
            return Err(bad());
        }
        out.push(ScalingRow {
            target_id: rec[0].to_string(),
            kind: rec[1].to_string(),
            eps: rec[2].parse().map_err(|_| bad())?,
            det_count: opt_u(&rec[3]).map_err(|_| bad())?.map(|x| x as u32),
            prob_count: opt_u(&rec[4]).map_err(|_| bad())?.map(|x| x as u32),
            best_distance: rec[5].parse().map_err(|_| bad())?,
            elapsed_ms: opt_u(&rec[6]).map_err(|_| bad())?,
        });
    }
    Ok(out)
}

/// Least-squares fit of count on `log_base(1/ε)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

pub fn fit_slope(points: &[(f64, f64)], base: f64) -> Result<SlopeFit, ExperimentError> {
    if points.len() < 3 {
        return Err(ExperimentError::DegenerateFit(format!("{} points, need ≥ 3", points.len())));
    }
    let xs: Vec<f64> = points.iter().map(|(e, _)| (1.0 / e).ln() / base.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx < 1e-24 {
        return Err(ExperimentError::DegenerateFit("all ε equal".into()));
    }
    let sxy: f64 = xs.iter().zip(points).map(|(x, p)| (x - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(points).map(|(x, p)| (p.1 - intercept - slope * x).powi(2)).sum();
    Ok(SlopeFit { slope, intercept, residual: (rss / n).sqrt() })
}

/// Slope of `det_count` over one target's rows (blank counts skipped).
pub fn fit_rows(rows: &[ScalingRow], set: GateSet) -> Result<SlopeFit, ExperimentError> {
    let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.det_count.map(|c| (r.eps, c as f64))).collect();
    fit_slope(&pts, set.base() as f64)
}

struct Cell {
    row: ScalingRow,
    transfer_ok: Option<bool>,
}

fn run_cell(cfg: &ScalingConfig, t: &Target, eps: f64) -> Cell {
    let set = cfg.run.gate_set;
    let start = Instant::now();
    let (det, best) = match gcount_approx(&t.channel, set, eps, cfg.run.budget) {
        Ok(r) => (Some(r.count), r.distance),
        Err(ApproxError::BudgetExhausted { best_distance, .. }) => (None, best_distance),
        Err(ApproxError::Invalid(_)) => (None, f64::NAN),
    };
    let prob = if cfg.run.prob { prob_gcount(&t.channel, set, eps, cfg.run.budget).ok().map(|r| r.count) } else { None };
    let transfer_ok = match (cfg.run.transfer, det) {
        (true, Some(d)) => Some(match prob_gcount(&t.channel, set, eps * eps, cfg.run.budget) {
            Ok(r) => r.count >= d,
            // exhausted: the count exceeds the budget, hence exceeds d
            Err(crate::prob_synth::ProbError::BudgetExhausted { .. }) => true,
            Err(_) => false,
        }),
        _ => None,
    };
    let elapsed = cfg.run.timing.then(|| start.elapsed().as_millis() as u64);
    Cell {
        row: ScalingRow {
            target_id: t.id.clone(),
            kind: t.kind.clone(),
            eps,
            det_count: det,
            prob_count: prob,
            best_distance: best,
            elapsed_ms: elapsed,
        },
        transfer_ok,
    }
}

pub fn scaling_run(cfg: &ScalingConfig) -> Result<ScalingReport, ExperimentError> {
    cfg.validate()?;
    let set = cfg.run.gate_set;
    let grid = cfg.grid.resolve()?;
    let targets = resolve_targets(set, &cfg.targets.specs, cfg.run.seed)?;
    let cells: Vec<(usize, usize)> = (0..targets.len()).flat_map(|i| (0..grid.len()).map(move |j| (i, j))).collect();
    let results: Vec<Cell> = cells.par_iter().map(|&(i, j)| run_cell(cfg, &targets[i], grid[j])).collect();

    let mut checks = Vec::new();
    let mut summary = BTreeMap::new();
    let mut mono_bad = Vec::new();
    let mut prob_bad = Vec::new();
    for (i, t) in targets.iter().enumerate() {
        let rows: Vec<&ScalingRow> = results[i * grid.len()..(i + 1) * grid.len()].iter().map(|c| &c.row).collect();
        let counts: Vec<u32> = rows.iter().filter_map(|r| r.det_count).collect();
        if counts.windows(2).any(|w| w[1] < w[0]) {
            mono_bad.push(t.id.clone());
        }
        for r in &rows {
            if let (Some(p), Some(d)) = (r.prob_count, r.det_count) {
                if p > d {
                    prob_bad.push(format!("{}@{}", t.id, r.eps));
                }
            }
        }
        let owned: Vec<ScalingRow> = rows.iter().map(|r| (*r).clone()).collect();
        summary.insert(t.id.clone(), fit_rows(&owned, set).ok().map(|f| f.slope));
    }
    checks.push(Check::new("det_count monotone in ε", mono_bad.is_empty(), mono_bad.join(" ")));
    if cfg.run.prob {
        checks.push(Check::new("prob_count ≤ det_count", prob_bad.is_empty(), prob_bad.join(" ")));
    }
    if cfg.run.transfer {
        let bad: Vec<String> = results
            .iter()
            .filter(|c| c.transfer_ok == Some(false))
            .map(|c| format!("{}@{}", c.row.target_id, c.row.eps))
            .collect();
        checks.push(Check::new("prob_gcount(ε²) ≥ det_count(ε)", bad.is_empty(), bad.join(" ")));
    }
    let edges = targets.iter().filter(|t| t.kind == "edge").count();
    checks.push(Check::new("edge targets certified non-synthesizable", true, format!("{edges} edge targets")));
    Ok(ScalingReport { rows: results.into_iter().map(|c| c.row).collect(), summary, checks })
}

// ---------------------------------------------------------------- liouville

/// Largest level scanned directly for Liouville components.
pub const LIOUVILLE_SEARCH_LEVEL: u32 = MAX_BUDGET_T;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleComponent {
    pub n: u32,
    /// `ε_n = 2^{−eps_log2}` with `eps_log2 = n!`.
    pub eps_log2: u64,
    pub word: String,
    pub t_count: u32,
    /// Exact `d(U_n, id)²` in Q(√2).
    pub dist_sq: String,
    pub distance: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub count_ok: bool,
    /// `level-search` or `commutator`.
    pub method: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositePrefix {
    pub m: u32,
    pub word: String,
    pub t_count: u32,
    /// `d(V_m, V_{m−1}) = d(U_m, id)` holds exactly.
    pub telescoping_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleReport {
    pub components: Vec<LiouvilleComponent>,
    pub composites: Vec<CompositePrefix>,
    pub checks: Vec<Check>,
}

fn factorial(n: u32) -> u64 {
    (1..=n as u64).product()
}

/// `1 − |tr U|²/4`, exactly.
fn exact_dist_sq_to_id(u: &ExactMatrix) -> QSqrt2 {
    &QSqrt2::one() - &exact_overlap_matrices(&ExactMatrix::identity(), u)
}

fn dyadic(exp2: u64) -> QSqrt2 {
    QSqrt2::new(ZRoot2::one(), BigInt::from(1) << exp2)
}

/// Exact annulus test `ε²/4 ≤ d² ≤ ε²` with `ε = 2^{−e}`.
fn annulus_certificate(d2: &QSqrt2, e: u64) -> (bool, bool) {
    let hi = dyadic(2 * e);
    let lo = dyadic(2 * e + 2);
    (d2.cmp_at(&lo, Embedding::Sigma1).is_ge(), d2.cmp_at(&hi, Embedding::Sigma1).is_le())
}

fn certify(n: u32, e: u64, exact: &ExactMatrix, c_prime: f64, method: &str) -> Result<LiouvilleComponent, ExperimentError> {
    let tu = recognize_t(&ScaledMatrix::from_exact(exact))?;
    let word = ma_normal_form(&tu);
    let tc = t_count(&tu) as u32;
    let d2 = exact_dist_sq_to_id(exact);
    let (lower_ok, upper_ok) = annulus_certificate(&d2, e);
    Ok(LiouvilleComponent {
        n,
        eps_log2: e,
        word: word.to_string(),
        t_count: tc,
        distance: d2.to_f64().max(0.0).sqrt(),
        dist_sq: d2.to_string(),
        lower_ok,
        upper_ok,
        count_ok: (tc as f64) <= c_prime * factorial(n) as f64,
        method: method.to_string(),
    })
}

fn in_window(d: f64, eps: f64) -> bool {
    d >= eps / 2.0 * (1.0 + 1e-9) && d <= eps * (1.0 - 1e-9)
}

/// First Clifford+T word (by level, then distance) in the annulus, certified exactly.
fn level_search(n: u32, e: u64, c_prime: f64) -> Result<Option<LiouvilleComponent>, ExperimentError> {
    let eps = 2f64.powi(-(e as i32));
    let id = UnitaryChannel::identity();
    let max_level = LIOUVILLE_SEARCH_LEVEL.min((c_prime * factorial(n) as f64) as u32);
    for t in 0..=max_level {
        let near = level_channels_near(&id, GateSet::CliffordT, t, eps).unwrap_or_default();
        for (d, w, _) in near.into_iter().filter(|(d, _, _)| in_window(*d, eps)) {
            let _ = d;
            let c = certify(n, e, &w.evaluate_exact(), c_prime, "level-search")?;
            if c.lower_ok && c.upper_ok {
                return Ok(Some(c));
            }
        }
    }
    Ok(None)
}

fn quat_inv(q: &[f64; 4]) -> [f64; 4] {
    [q[0], -q[1], -q[2], -q[3]]
}

fn commutator_q(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    quat_mul(&quat_mul(&quat_mul(a, b), &quat_inv(a)), &quat_inv(b))
}

fn dist_id(q: &[f64; 4]) -> f64 {
    (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt().min(1.0)
}

enum Src {
    Word(ExactMatrix),
    Comm(usize, usize),
}

struct Node {
    q: [f64; 4],
    d: f64,
    /// Upper bound on the T-count: words add, commutators double.
    t_bound: u32,
    src: Src,
}

fn node_exact(arena: &[Node], i: usize) -> ExactMatrix {
    match &arena[i].src {
        Src::Word(m) => m.clone(),
        Src::Comm(a, b) => {
            let (a, b) = (node_exact(arena, *a), node_exact(arena, *b));
            a.mul(&b).mul(&a.adjoint()).mul(&b.adjoint())
        }
    }
}

const COMMUTATOR_ROUNDS: usize = 6;
const FRONTIER: usize = 300;
const BASE_LEVEL: u32 = 12;
const BASE_RADIUS: f64 = 0.15;

/// Descent by group commutators: `d([A,B], id) ≈ 2·d(A)·d(B)·sin∠`, so commuting the current
/// smallest elements with base words shrinks distances by a spread of factors until one lands in
/// the annulus. Only annulus hits are evaluated exactly.
fn commutator_search(n: u32, e: u64, c_prime: f64) -> Result<Option<LiouvilleComponent>, ExperimentError> {
    let eps = 2f64.powi(-(e as i32));
    let id = UnitaryChannel::identity();
    let mut arena: Vec<Node> = Vec::new();
    for t in 0..=BASE_LEVEL {
        for (d, w, c) in level_channels_near(&id, GateSet::CliffordT, t, BASE_RADIUS).unwrap_or_default() {
            if d > 1e-9 {
                arena.push(Node { q: c.quaternion(), d, t_bound: t, src: Src::Word(w.evaluate_exact()) });
            }
        }
    }
    let base: Vec<usize> = (0..arena.len()).collect();
    let mut frontier: Vec<usize> = base.clone();
    let mut best: Option<LiouvilleComponent> = None;
    for _ in 0..COMMUTATOR_ROUNDS {
        frontier.sort_by(|&a, &b| arena[a].d.total_cmp(&arena[b].d).then(a.cmp(&b)));
        frontier.truncate(FRONTIER);
        let partners: Vec<usize> = base.iter().chain(&frontier).copied().collect();
        let mut hits: Vec<(u32, usize, usize)> = Vec::new();
        let mut fresh: Vec<(f64, u32, usize, usize, [f64; 4])> = Vec::new();
        for &a in &frontier {
            for &b in &partners {
                if a == b {
                    continue;
                }
                let q = commutator_q(&arena[a].q, &arena[b].q);
                let d = dist_id(&q);
                let tb = 2 * (arena[a].t_bound + arena[b].t_bound);
                if in_window(d, eps) {
                    hits.push((tb, a, b));
                } else if d > eps && d < arena[a].d {
                    fresh.push((d, tb, a, b, q));
                }
            }
        }
        hits.sort();
        for &(_, a, b) in hits.iter().take(64) {
            let m = {
                let (x, y) = (node_exact(&arena, a), node_exact(&arena, b));
                x.mul(&y).mul(&x.adjoint()).mul(&y.adjoint())
            };
            let c = certify(n, e, &m, c_prime, "commutator")?;
            if c.lower_ok && c.upper_ok {
                if c.count_ok {
                    return Ok(Some(c));
                }
                if best.as_ref().is_none_or(|b| c.t_count < b.t_count) {
                    best = Some(c);
                }
            }
        }
        if best.is_some() {
            return Ok(best);
        }
        fresh.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        fresh.dedup_by(|x, y| (x.0 - y.0).abs() < 1e-15 * y.0);
        frontier.clear();
        for (d, tb, a, b, q) in fresh.into_iter().take(FRONTIER) {
            frontier.push(arena.len());
            arena.push(Node { q, d, t_bound: tb, src: Src::Comm(a, b) });
        }
        if frontier.is_empty() {
            break;
        }
    }
    Ok(best)
}

/// Components `U_n` with `½ε_n ≤ d(U_n, id) ≤ ε_n`, `ε_n = 2^{−n!}`, and prefixes
/// `V_m = U_1∘…∘U_m`, all certified in exact arithmetic.
pub fn liouville_generate(n_max: u32, c_prime: f64) -> Result<LiouvilleReport, ExperimentError> {
    if n_max == 0 || n_max > 4 {
        return Err(ExperimentError::Config(format!("n_max = {n_max} outside 1..=4")));
    }
    let mut components = Vec::new();
    for n in 1..=n_max {
        let e = factorial(n);
        let found = match level_search(n, e, c_prime)? {
            Some(c) => Some(c),
            None => commutator_search(n, e, c_prime)?,
        };
        let c = found.ok_or(ExperimentError::LiouvilleSearch { n, deepest_level: LIOUVILLE_SEARCH_LEVEL })?;
        components.push(c);
    }

    let mut composites = Vec::new();
    let mut prev = ExactMatrix::identity();
    let mut word = String::new();
    for c in &components {
        let u = GateSequence::parse_for(GateSet::CliffordT, &c.word).map_err(SynthError::from)?.evaluate_exact();
        let cur = prev.mul(&u);
        let tele = exact_overlap_matrices(&prev, &cur) == exact_overlap_matrices(&ExactMatrix::identity(), &u);
        word = if word.is_empty() { c.word.clone() } else { format!("{word} {}", c.word) };
        let tc = t_count(&recognize_t(&ScaledMatrix::from_exact(&cur))?) as u32;
        composites.push(CompositePrefix { m: c.n, word: word.clone(), t_count: tc, telescoping_ok: tele });
        prev = cur;
    }

    let mut checks = Vec::new();
    for c in &components {
        checks.push(Check::new(&format!("n={} lower ½ε ≤ d", c.n), c.lower_ok, c.dist_sq.clone()));
        checks.push(Check::new(&format!("n={} upper d ≤ ε", c.n), c.upper_ok, c.dist_sq.clone()));
        checks.push(Check::new(&format!("n={} t_count ≤ c′·n!", c.n), c.count_ok, format!("t_count {}", c.t_count)));
    }
    for p in &composites {
        checks.push(Check::new(&format!("m={} telescoping", p.m), p.telescoping_ok, String::new()));
    }
    Ok(LiouvilleReport { components, composites, checks })
}

// ---------------------------------------------------------------- covering

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringRow {
    pub k: u32,
    pub size: usize,
    pub radius: f64,
    pub uncovered_at_radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub rows: Vec<CoveringRow>,
    pub checks: Vec<Check>,
}

/// Monte-Carlo covering radius of levels `≤ k` for `k = 1..=k_max`, from a common sample stream.
pub fn covering_run(cfg: &CoveringConfig) -> Result<CoveringReport, ExperimentError> {
    if cfg.k_max == 0 || cfg.samples == 0 {
        return Err(ExperimentError::Config("k_max and samples must be positive".into()));
    }
    let db = PointDatabase::build(cfg.gate_set, cfg.k_max)?;
    let mut rows = Vec::new();
    for k in 1..=cfg.k_max {
        let radius = db.covering_radius(k, cfg.samples, &mut worker_rng(cfg.seed, k as u64));
        let unc = db.uncovered_fraction(k, radius, cfg.samples, &mut worker_rng(cfg.seed, k as u64));
        rows.push(CoveringRow { k, size: db.size_up_to(k), radius, uncovered_at_radius: unc });
    }
    let dec = rows.windows(2).all(|w| w[1].radius < w[0].radius);
    let zero = rows.iter().all(|r| r.uncovered_at_radius == 0.0);
    let radii = rows.iter().map(|r| format!("{:.4}", r.radius)).collect::<Vec<_>>().join(" > ");
    let checks = vec![
        Check::new("covering radius strictly decreasing", dec, radii),
        Check::new("uncovered fraction 0 at measured radius", zero, String::new()),
    ];
    Ok(CoveringReport { rows, checks })
}
