//! Stateless HTTP API over `iqft-core`.
//!
//! Every request carries its own image (multipart upload), so handlers share
//! nothing but the configuration read at startup.
//!
//! | route                  | input                                                  |
//! |------------------------|--------------------------------------------------------|
//! | `POST /api/segment`    | `image`, `mode`, `theta1..3`, `normalize`, `timing`    |
//! | `POST /api/evaluate`   | `image`, `mask`, `method`, `theta1..3`, `k`, `seed`, ... |
//! | `GET /api/thresholds`  | `?theta=` or `?ith=`                                   |
//! | `GET/POST /api/sweep`  | `?thetas=` plus `image`, optional `mask`, `mode`       |
//! | `GET /healthz`         | none                                                   |
//!
//! Angles use the same grammar as the CLI (`pi`, `3pi/4`, `0.5`).

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use axum::extract::multipart::{MultipartError, MultipartRejection};
use axum::extract::{DefaultBodyLimit, Multipart, Query};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use iqft_core::exec::Execution;
use iqft_core::imageio::{decode_image_auto, load_mask, RgbImage};
use iqft_core::iqft::{theta_from_threshold, thresholds_from_theta, AngleParams};
use iqft_core::metrics::{count_segments, EvaluationReport, GroundTruthMask};
use iqft_core::pipeline::{
    evaluate, segment_detailed, sweep, Method, MethodConfig, Mode, SweepReport,
};
use iqft_core::theta::{format_theta, parse_theta, parse_theta_list};
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;

pub const DEFAULT_MAX_BODY_BYTES: usize = 16 * 1024 * 1024;

#[derive(Clone, Copy, Debug)]
pub struct Config {
    pub max_body_bytes: usize,
    pub exec: Execution,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            max_body_bytes: DEFAULT_MAX_BODY_BYTES,
            exec: Execution::default(),
        }
    }
}

pub fn router(config: Config) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/api/segment", post(move |m| segment(config, m)))
        .route("/api/evaluate", post(move |m| evaluate_handler(config, m)))
        .route("/api/thresholds", get(thresholds))
        .route(
            "/api/sweep",
            get(move |q, m| sweep_handler(config, q, m))
                .post(move |q, m| sweep_handler(config, q, m)),
        )
        .layer(DefaultBodyLimit::max(config.max_body_bytes))
        .layer(CorsLayer::permissive())
}

/// Run-length encodes a label stream as `(label, run)` pairs.
pub fn rle_encode(labels: &[u8]) -> Vec<(u8, u32)> {
    let mut out: Vec<(u8, u32)> = Vec::new();
    for &l in labels {
        match out.last_mut() {
            Some((last, run)) if *last == l => *run += 1,
            _ => out.push((l, 1)),
        }
    }
    out
}

pub fn rle_decode(runs: &[(u8, u32)]) -> Vec<u8> {
    runs.iter()
        .flat_map(|&(l, n)| std::iter::repeat_n(l, n as usize))
        .collect()
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }
}

impl From<iqft_core::Error> for ApiError {
    fn from(e: iqft_core::Error) -> Self {
        Self::bad_request(e.to_string())
    }
}

impl From<MultipartError> for ApiError {
    fn from(e: MultipartError) -> Self {
        Self {
            status: e.status(),
            message: e.body_text(),
        }
    }
}

impl From<MultipartRejection> for ApiError {
    fn from(e: MultipartRejection) -> Self {
        Self {
            status: e.status(),
            message: e.body_text(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        #[derive(Serialize)]
        struct Body {
            error: String,
        }
        (
            self.status,
            Json(Body {
                error: self.message,
            }),
        )
            .into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Multipart form split into file-like and text fields.
#[derive(Default)]
struct Form {
    files: HashMap<String, Vec<u8>>,
    text: HashMap<String, String>,
}

const FILE_FIELDS: [&str; 2] = ["image", "mask"];

impl Form {
    async fn read(multipart: Result<Multipart, MultipartRejection>) -> Result<Self, ApiError> {
        let mut mp = multipart?;
        let mut form = Form::default();
        while let Some(field) = mp.next_field().await? {
            let name = field.name().unwrap_or_default().to_string();
            if FILE_FIELDS.contains(&name.as_str()) {
                form.files.insert(name, field.bytes().await?.to_vec());
            } else {
                form.text.insert(name, field.text().await?);
            }
        }
        Ok(form)
    }

    fn image(&self) -> Result<RgbImage, ApiError> {
        let bytes = self
            .files
            .get("image")
            .ok_or_else(|| ApiError::bad_request("missing multipart field \"image\""))?;
        Ok(decode_image_auto(bytes)?)
    }

    fn mask(&self) -> Result<Option<GroundTruthMask>, ApiError> {
        self.files
            .get("mask")
            .map(|b| load_mask(b).map_err(ApiError::from))
            .transpose()
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.text
            .get(key)
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
    }

    fn flag(&self, key: &str, default: bool) -> Result<bool, ApiError> {
        match self.get(key).map(str::to_ascii_lowercase).as_deref() {
            None => Ok(default),
            Some("1" | "true" | "yes" | "on") => Ok(true),
            Some("0" | "false" | "no" | "off") => Ok(false),
            Some(other) => Err(ApiError::bad_request(format!(
                "{key}: expected a boolean, got {other:?}"
            ))),
        }
    }

    fn number<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ApiError> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| ApiError::bad_request(format!("{key}: cannot parse {s:?}"))),
        }
    }

    fn mode(&self) -> Result<Mode, ApiError> {
        Ok(self.get("mode").unwrap_or("rgb").parse()?)
    }

    /// `theta1..3`, each defaulting to `theta` and then to pi.
    fn params(&self) -> Result<AngleParams, ApiError> {
        let base = self.get("theta").unwrap_or("pi");
        let t = |k: &str| parse_theta(self.get(k).unwrap_or(base));
        Ok(AngleParams::new(t("theta1")?, t("theta2")?, t("theta3")?)?)
    }
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        message: e.to_string(),
    })?
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentResponse {
    pub width: u32,
    pub height: u32,
    pub mode: Mode,
    pub theta: [String; 3],
    pub normalize: bool,
    /// `[label, run]` pairs in row-major order.
    pub labels: Vec<(u8, u32)>,
    pub label_histogram: Vec<u64>,
    pub segment_count: usize,
    pub probabilities_summary: BTreeMap<u8, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

async fn segment(
    config: Config,
    multipart: Result<Multipart, MultipartRejection>,
) -> ApiResult<SegmentResponse> {
    let form = Form::read(multipart).await?;
    blocking(move || {
        let img = form.image()?;
        let mode = form.mode()?;
        let params = form.params()?;
        let normalize = form.flag("normalize", true)?;
        let timing = form.flag("timing", false)?;
        let start = Instant::now();
        let outcome = segment_detailed(&img, mode, &params, normalize, config.exec)?;
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        let summary = outcome.summary();
        Ok(Json(SegmentResponse {
            width: img.width(),
            height: img.height(),
            mode,
            theta: params.as_array().map(format_theta),
            normalize,
            labels: rle_encode(outcome.labels.labels()),
            label_histogram: summary.label_histogram,
            segment_count: summary.segment_count,
            probabilities_summary: summary.probabilities_summary,
            runtime_ms: timing.then_some(elapsed),
        }))
    })
    .await
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluateResponse {
    pub method: Method,
    pub segment_count: usize,
    #[serde(flatten)]
    pub report: EvaluationReport,
}

async fn evaluate_handler(
    config: Config,
    multipart: Result<Multipart, MultipartRejection>,
) -> ApiResult<EvaluateResponse> {
    let form = Form::read(multipart).await?;
    blocking(move || {
        let img = form.image()?;
        let mask = form
            .mask()?
            .ok_or_else(|| ApiError::bad_request("missing multipart field \"mask\""))?;
        let method: Method = form.get("method").unwrap_or("iqft").parse()?;
        let cfg = MethodConfig {
            params: form.params()?,
            normalize: form.flag("normalize", true)?,
            k: form.number("k", 2usize)?,
            seed: form.number("seed", 0u64)?,
            exec: config.exec,
        };
        let (labels, mut report) = evaluate(&img, &mask, method, &cfg)?;
        if !form.flag("timing", false)? {
            report.runtime_ms = None;
        }
        Ok(Json(EvaluateResponse {
            method,
            segment_count: count_segments(&labels),
            report,
        }))
    })
    .await
}

#[derive(Debug, Deserialize)]
pub struct ThresholdQuery {
    theta: Option<String>,
    ith: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResponse {
    pub theta: f64,
    pub theta_label: String,
    pub thresholds: Vec<f64>,
}

async fn thresholds(
    query: Result<Query<ThresholdQuery>, axum::extract::rejection::QueryRejection>,
) -> ApiResult<ThresholdResponse> {
    let Query(q) = query.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let theta = match (q.theta, q.ith) {
        (Some(t), None) => parse_theta(&t)?,
        (None, Some(i)) => theta_from_threshold(i)?,
        _ => return Err(ApiError::bad_request("give exactly one of theta or ith")),
    };
    let set = thresholds_from_theta(theta)?;
    Ok(Json(ThresholdResponse {
        theta,
        theta_label: format_theta(theta),
        thresholds: set.thresholds().to_vec(),
    }))
}

#[derive(Debug, Default, Deserialize)]
pub struct SweepQuery {
    thetas: Option<String>,
}

async fn sweep_handler(
    config: Config,
    query: Result<Query<SweepQuery>, axum::extract::rejection::QueryRejection>,
    multipart: Result<Multipart, MultipartRejection>,
) -> ApiResult<SweepReport> {
    let Query(q) = query.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let form = Form::read(multipart).await?;
    blocking(move || {
        let list = q
            .thetas
            .as_deref()
            .or(form.get("thetas"))
            .ok_or_else(|| ApiError::bad_request("missing thetas"))?;
        let thetas = parse_theta_list(list)?;
        let img = form.image()?;
        let mask = form.mask()?;
        let report = sweep(
            &img,
            &thetas,
            form.mode()?,
            form.flag("normalize", true)?,
            mask.as_ref(),
            config.exec,
        )?;
        Ok(Json(report))
    })
    .await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rle_roundtrip() {
        let labels = [0, 0, 0, 3, 3, 1, 0, 0];
        let runs = rle_encode(&labels);
        assert_eq!(runs, vec![(0, 3), (3, 2), (1, 1), (0, 2)]);
        assert_eq!(rle_decode(&runs), labels);
        assert!(rle_encode(&[]).is_empty());
    }
}
