//! Single-flight scan sessions: Idle, then Capturing and Uploading, ending in
//! Presenting, Empty or Failed until dismissed back to Idle.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, MutexGuard};

use privscan_core::detect::sidecar_to_json;
use privscan_core::wire::{decode_result, ErrorBody, ScanResult};
use privscan_core::{RasterImage, UiElement};
use reqwest::multipart::{Form, Part};
use thiserror::Error;
use tokio::task::JoinHandle;

use crate::capture::{compress_capture, sanitize_capture, CaptureInsets};
use crate::decode::{decode_two_stage, MAX_DECODE_DIM};

pub const ENDPOINT_ENV: &str = "PRIVSCAN_ENDPOINT";
pub const DEFAULT_ENDPOINT: &str = "http://127.0.0.1:8080";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SessionState {
    Idle,
    Capturing,
    Uploading,
    Presenting,
    Empty,
    Failed,
}

impl SessionState {
    pub fn is_busy(self) -> bool {
        matches!(self, Self::Capturing | Self::Uploading)
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("a scan is already active ({0:?})")]
pub struct BusyError(pub SessionState);

/// A result with its images decoded, ordered by data type id.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodedScan {
    pub result: ScanResult,
    pub images: BTreeMap<String, RasterImage>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanSession {
    pub state: SessionState,
    pub result: Option<DecodedScan>,
    pub error: Option<String>,
}

impl ScanSession {
    fn idle() -> Self {
        Self { state: SessionState::Idle, result: None, error: None }
    }
}

/// What to scan.
#[derive(Clone, Debug)]
pub struct ScanJob {
    pub capture: RasterImage,
    pub insets: CaptureInsets,
    pub policy_url: String,
    pub sidecar: Option<Vec<UiElement>>,
    /// JSON text for the `options` part.
    pub options: Option<String>,
}

impl ScanJob {
    pub fn new(capture: RasterImage, policy_url: impl Into<String>) -> Self {
        Self { capture, insets: CaptureInsets::default(), policy_url: policy_url.into(), sidecar: None, options: None }
    }
}

/// Resolves to the terminal session once the upload finishes.
pub struct ScanHandle(JoinHandle<ScanSession>);

impl ScanHandle {
    pub async fn wait(self) -> ScanSession {
        self.0.await.unwrap_or_else(|e| ScanSession {
            state: SessionState::Failed,
            result: None,
            error: Some(format!("scan task failed: {e}")),
        })
    }
}

/// One client instance owns one session. Must be used inside a tokio runtime.
#[derive(Clone)]
pub struct ScanClient {
    endpoint: String,
    http: reqwest::Client,
    session: Arc<Mutex<ScanSession>>,
}

impl ScanClient {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self { endpoint: endpoint.into().trim_end_matches('/').to_string(), http: reqwest::Client::new(), session: Arc::new(Mutex::new(ScanSession::idle())) }
    }

    /// Endpoint from `PRIVSCAN_ENDPOINT`, else the local default.
    pub fn from_env() -> Self {
        Self::new(std::env::var(ENDPOINT_ENV).unwrap_or_else(|_| DEFAULT_ENDPOINT.to_string()))
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn lock(&self) -> MutexGuard<'_, ScanSession> {
        self.session.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn state(&self) -> SessionState {
        self.lock().state
    }

    pub fn session(&self) -> ScanSession {
        self.lock().clone()
    }

    /// Returns a finished session to Idle. Fails while a scan is in flight.
    pub fn dismiss(&self) -> Result<(), BusyError> {
        let mut s = self.lock();
        if s.state.is_busy() {
            return Err(BusyError(s.state));
        }
        *s = ScanSession::idle();
        Ok(())
    }

    fn set(&self, state: SessionState, result: Option<DecodedScan>, error: Option<String>) -> ScanSession {
        let mut s = self.lock();
        *s = ScanSession { state, result, error };
        s.clone()
    }

    /// Starts a scan. Capturing runs before this returns; the upload continues in
    /// the background and the handle resolves to the terminal session.
    pub fn submit_scan(&self, job: ScanJob) -> Result<ScanHandle, BusyError> {
        {
            let mut s = self.lock();
            if s.state != SessionState::Idle {
                return Err(BusyError(s.state));
            }
            *s = ScanSession { state: SessionState::Capturing, result: None, error: None };
        }
        let png = sanitize_capture(&job.capture, &job.insets)
            .map_err(|e| e.to_string())
            .and_then(|img| compress_capture(&img).map_err(|e| e.to_string()));
        let png = match png {
            Ok(p) => p,
            Err(e) => {
                let done = self.set(SessionState::Failed, None, Some(e));
                return Ok(ScanHandle(tokio::spawn(async move { done })));
            }
        };
        self.set(SessionState::Uploading, None, None);
        let client = self.clone();
        Ok(ScanHandle(tokio::spawn(async move {
            match client.upload(png, job).await {
                Ok(scan) if scan.result.detections.is_empty() => client.set(SessionState::Empty, Some(scan), None),
                Ok(scan) => client.set(SessionState::Presenting, Some(scan), None),
                Err(e) => client.set(SessionState::Failed, None, Some(e)),
            }
        })))
    }

    async fn upload(&self, png: Vec<u8>, job: ScanJob) -> Result<DecodedScan, String> {
        let mut form = Form::new()
            .part("screenshot", Part::bytes(png).file_name("capture.png").mime_str("image/png").map_err(|e| e.to_string())?)
            .text("policy_url", job.policy_url);
        if let Some(elements) = &job.sidecar {
            form = form.part("ui_sidecar", Part::bytes(sidecar_to_json(elements)));
        }
        if let Some(options) = job.options {
            form = form.text("options", options);
        }
        let result = post_scan(&self.http, &self.endpoint, form).await?;
        let mut images = BTreeMap::new();
        for (ty, png) in &result.images {
            let img = decode_two_stage(png, MAX_DECODE_DIM).map_err(|e| format!("image for `{ty}`: {e}"))?;
            images.insert(ty.clone(), img);
        }
        Ok(DecodedScan { result, images })
    }
}

/// One `POST /v1/scan`. Non-200 answers become their error text.
pub async fn post_scan(http: &reqwest::Client, endpoint: &str, form: Form) -> Result<ScanResult, String> {
    let url = format!("{}/v1/scan", endpoint.trim_end_matches('/'));
    let resp = http.post(&url).multipart(form).send().await.map_err(|e| format!("cannot reach {url}: {e}"))?;
    let status = resp.status();
    let body = resp.bytes().await.map_err(|e| format!("reading response: {e}"))?;
    if !status.is_success() {
        return Err(match serde_json::from_slice::<ErrorBody>(&body) {
            Ok(b) => match b.upstream_status {
                Some(u) => format!("{} ({status}): {} [upstream {u}]", b.error, b.message),
                None => format!("{} ({status}): {}", b.error, b.message),
            },
            Err(_) => format!("service answered {status}"),
        });
    }
    let result = decode_result(&body).map_err(|e| format!("malformed scan result: {e}"))?;
    result.check()?;
    Ok(result)
}
