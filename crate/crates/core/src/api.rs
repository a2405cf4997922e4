//! Request/response types shared by the HTTP service and its client, and the
//! operations behind each endpoint.

use serde::{Deserialize, Serialize};

use crate::approx::{gcount_approx, ApproxError, ApproxResult};
use crate::exact_synth::{synthesize_exact, ExactSynthesis, ScaledMatrix, SynthError};
use crate::experiments::{
    all_passed, covering_run, liouville_generate, resolve_targets, Check, CoveringConfig, CoveringReport,
    ExperimentError, LiouvilleConfig, LiouvilleReport, ScalingConfig, ScalingReport,
};
use crate::gates::GateSet;
use crate::lattice::{write_points_csv, LatticeError};
use crate::prob_synth::{prob_gcount, ProbError, ProbResult};
use crate::rings::{ZOmega, ZRoot2};
use crate::su2::UnitaryChannel;

/// Coarse error class; the service maps it to an HTTP status.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Malformed or out-of-range input.
    Invalid,
    /// Well-formed input the operation cannot satisfy (not synthesizable, budget exhausted).
    Unsatisfiable,
    /// A numerical certificate could not be established.
    Internal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("{message}")]
pub struct ApiError {
    pub kind: ErrorKind,
    pub message: String,
}

impl ApiError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Invalid, message: message.into() }
    }

    fn new(kind: ErrorKind, e: impl std::fmt::Display) -> Self {
        Self { kind, message: e.to_string() }
    }
}

impl From<SynthError> for ApiError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::NotSynthesizable { .. } => Self::new(ErrorKind::Unsatisfiable, e),
            SynthError::Internal(_) => Self::new(ErrorKind::Internal, e),
            _ => Self::new(ErrorKind::Invalid, e),
        }
    }
}

impl From<ApproxError> for ApiError {
    fn from(e: ApproxError) -> Self {
        match e {
            ApproxError::BudgetExhausted { .. } => Self::new(ErrorKind::Unsatisfiable, e),
            ApproxError::Invalid(_) => Self::new(ErrorKind::Invalid, e),
        }
    }
}

impl From<ProbError> for ApiError {
    fn from(e: ProbError) -> Self {
        match e {
            ProbError::BudgetExhausted { .. } => Self::new(ErrorKind::Unsatisfiable, e),
            ProbError::Invalid(_) => Self::new(ErrorKind::Invalid, e),
            ProbError::Oracle { .. } | ProbError::Optimization { .. } => Self::new(ErrorKind::Internal, e),
        }
    }
}

impl From<ExperimentError> for ApiError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Config(_) | ExperimentError::NotEdge { .. } => Self::new(ErrorKind::Invalid, e),
            ExperimentError::Lattice(LatticeError::BudgetExceeded { .. }) => Self::new(ErrorKind::Invalid, e),
            _ => Self::new(ErrorKind::Internal, e),
        }
    }
}

impl From<LatticeError> for ApiError {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::BudgetExceeded { .. } => Self::new(ErrorKind::Invalid, e),
            _ => Self::new(ErrorKind::Internal, e),
        }
    }
}

// ---------------------------------------------------------------- exact

/// Exactly one of `matrix` or `point` must be present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactSynthRequest {
    pub set: GateSet,
    #[serde(default)]
    pub matrix: Option<MatrixInput>,
    /// Quaternion coordinates in Z[√2] text form; the matrix is `U(point)/√(Σ x²)`.
    #[serde(default)]
    pub point: Option<[String; 4]>,
}

/// `entries / √scale`, entries row-major in Z[ζ₈] text form (`1+z-2z3`), scale in Z[√2] text form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixInput {
    pub entries: [String; 4],
    pub scale: String,
}

impl ExactSynthRequest {
    pub fn scaled_matrix(&self) -> Result<ScaledMatrix, ApiError> {
        let bad = |what: &str, e: &dyn std::fmt::Display| ApiError::invalid(format!("bad {what}: {e}"));
        match (&self.matrix, &self.point) {
            (Some(m), None) => {
                let mut entries = Vec::with_capacity(4);
                for s in &m.entries {
                    entries.push(s.parse::<ZOmega>().map_err(|e| bad("matrix entry", &e))?);
                }
                let scale: ZRoot2 = m.scale.parse().map_err(|e| bad("scale", &e))?;
                Ok(ScaledMatrix::new(entries.try_into().expect("four entries"), scale))
            }
            (None, Some(p)) => {
                let mut coords = Vec::with_capacity(4);
                for s in p {
                    coords.push(s.parse::<ZRoot2>().map_err(|e| bad("point coordinate", &e))?);
                }
                let n = coords.iter().fold(ZRoot2::zero(), |acc, x| acc + x * x);
                let coords: [ZRoot2; 4] = coords.try_into().expect("four coordinates");
                Ok(ScaledMatrix::from_point(&crate::su2::QuaternionPoint::new(coords, n)))
            }
            _ => Err(ApiError::invalid("exactly one of `matrix` or `point` is required")),
        }
    }
}

pub fn synth_exact(req: &ExactSynthRequest) -> Result<ExactSynthesis, ApiError> {
    let m = req.scaled_matrix()?;
    Ok(synthesize_exact(req.set, &m)?)
}

// ---------------------------------------------------------------- approx / prob

/// Shared by `synth approx` and `prob-synth`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxRequest {
    /// `q:(a,b,c,d)`, `rz:θ`, `point:a,b,c,d` or `edge:NAME`.
    pub target: String,
    pub set: GateSet,
    pub eps: f64,
    pub budget: u32,
}

/// Resolves a target spec that names exactly one channel.
pub fn parse_target(set: GateSet, spec: &str) -> Result<UnitaryChannel, ApiError> {
    if spec.trim_start().starts_with("haar") {
        return Err(ApiError::invalid("haar targets are only available in experiments"));
    }
    let mut ts = resolve_targets(set, &[spec.to_string()], 0)?;
    match ts.len() {
        1 => Ok(ts.remove(0).channel),
        n => Err(ApiError::invalid(format!("target {spec:?} names {n} channels, expected one"))),
    }
}

pub fn synth_approx(req: &ApproxRequest) -> Result<ApproxResult, ApiError> {
    let u = parse_target(req.set, &req.target)?;
    Ok(gcount_approx(&u, req.set, req.eps, req.budget)?)
}

pub fn prob_synth(req: &ApproxRequest) -> Result<ProbResult, ApiError> {
    let u = parse_target(req.set, &req.target)?;
    Ok(prob_gcount(&u, req.set, req.eps, req.budget)?)
}

// ---------------------------------------------------------------- enumerate

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerateRequest {
    pub set: GateSet,
    pub level: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerateResponse {
    pub set: GateSet,
    pub level: u32,
    pub count: usize,
    /// Point CSV with header `level, alpha_a, alpha_b, ..., delta_b, n`.
    pub csv: String,
}

pub fn enumerate(req: &EnumerateRequest) -> Result<EnumerateResponse, ApiError> {
    let mut buf = Vec::new();
    let count = write_points_csv(req.set, req.level, &mut buf)?;
    let csv = String::from_utf8(buf).expect("csv writer emits utf-8");
    Ok(EnumerateResponse { set: req.set, level: req.level, count, csv })
}

// ---------------------------------------------------------------- experiments

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingResponse {
    pub passed: bool,
    pub report: ScalingReport,
    /// Rendered CSV, identical to what `experiment scaling` writes.
    pub csv: String,
    /// `{target_id: slope}`.
    pub summary: String,
}

pub fn experiment_scaling(cfg: &ScalingConfig) -> Result<ScalingResponse, ApiError> {
    let report = crate::experiments::scaling_run(cfg)?;
    let csv = report.csv()?;
    let summary = report.summary_json();
    Ok(ScalingResponse { passed: all_passed(&report.checks), report, csv, summary })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleResponse {
    pub passed: bool,
    pub report: LiouvilleReport,
}

pub fn experiment_liouville(cfg: &LiouvilleConfig) -> Result<LiouvilleResponse, ApiError> {
    let report = liouville_generate(cfg.n_max, cfg.c_prime)?;
    Ok(LiouvilleResponse { passed: all_passed(&report.checks), report })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringResponse {
    pub passed: bool,
    pub report: CoveringReport,
}

pub fn experiment_covering(cfg: &CoveringConfig) -> Result<CoveringResponse, ApiError> {
    let report = covering_run(cfg)?;
    Ok(CoveringResponse { passed: all_passed(&report.checks), report })
}

/// Failed checks of a report, for terse client output.
pub fn failed_checks(checks: &[Check]) -> Vec<&Check> {
    checks.iter().filter(|c| !c.passed).collect()
}
