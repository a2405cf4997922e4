//! Typed HTTP client for the synthesis service.

use serde::de::DeserializeOwned;
use serde::Serialize;

use qsynth_core::api::{
    ApiError, ApproxRequest, CoveringResponse, EnumerateRequest, EnumerateResponse, ExactSynthRequest,
    LiouvilleResponse, ScalingResponse,
};
use qsynth_core::approx::ApproxResult;
use qsynth_core::exact_synth::ExactSynthesis;
use qsynth_core::experiments::{CoveringConfig, LiouvilleConfig, ScalingConfig};
use qsynth_core::prob_synth::ProbResult;

pub const DEFAULT_SERVER: &str = "http://127.0.0.1:7878";

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("transport: {0}")]
    Transport(#[from] reqwest::Error),
    /// The service answered with an error body.
    #[error("server ({status}): {error}")]
    Api { status: u16, error: ApiError },
    #[error("unexpected response ({status}): {body}")]
    Unexpected { status: u16, body: String },
}

#[derive(Clone, Debug)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    pub fn new(base: impl Into<String>) -> Self {
        let base = base.into().trim_end_matches('/').to_string();
        Self { base, http: reqwest::Client::new() }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    async fn post<Req: Serialize, Resp: DeserializeOwned>(&self, path: &str, req: &Req) -> Result<Resp, ClientError> {
        let r = self.http.post(format!("{}{path}", self.base)).json(req).send().await?;
        decode(r).await
    }

    pub async fn health(&self) -> Result<serde_json::Value, ClientError> {
        let r = self.http.get(format!("{}/health", self.base)).send().await?;
        decode(r).await
    }

    pub async fn synth_exact(&self, req: &ExactSynthRequest) -> Result<ExactSynthesis, ClientError> {
        self.post("/v1/synth/exact", req).await
    }

    pub async fn synth_approx(&self, req: &ApproxRequest) -> Result<ApproxResult, ClientError> {
        self.post("/v1/synth/approx", req).await
    }

    pub async fn prob_synth(&self, req: &ApproxRequest) -> Result<ProbResult, ClientError> {
        self.post("/v1/prob-synth", req).await
    }

    pub async fn enumerate(&self, req: &EnumerateRequest) -> Result<EnumerateResponse, ClientError> {
        self.post("/v1/enumerate", req).await
    }

    pub async fn experiment_scaling(&self, cfg: &ScalingConfig) -> Result<ScalingResponse, ClientError> {
        self.post("/v1/experiment/scaling", cfg).await
    }

    pub async fn experiment_liouville(&self, cfg: &LiouvilleConfig) -> Result<LiouvilleResponse, ClientError> {
        self.post("/v1/experiment/liouville", cfg).await
    }

    pub async fn experiment_covering(&self, cfg: &CoveringConfig) -> Result<CoveringResponse, ClientError> {
        self.post("/v1/experiment/covering", cfg).await
    }
}

async fn decode<T: DeserializeOwned>(r: reqwest::Response) -> Result<T, ClientError> {
    let status = r.status().as_u16();
    let body = r.text().await?;
    if (200..300).contains(&status) {
        return serde_json::from_str(&body).map_err(|_| ClientError::Unexpected { status, body });
    }
    match serde_json::from_str::<ApiError>(&body) {
        Ok(error) => Err(ClientError::Api { status, error }),
        Err(_) => Err(ClientError::Unexpected { status, body }),
    }
}
