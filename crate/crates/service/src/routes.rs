use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Instant;

use axum::extract::multipart::MultipartRejection;
use axum::extract::{DefaultBodyLimit, Multipart, State};
use axum::http::header;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use privscan_core::detect::parse_sidecar;
use privscan_core::wire::{encode_result, Health};
use tokio::net::TcpListener;
use tokio::sync::Semaphore;
use tokio::task::JoinHandle;

use crate::pipeline::{handle_scan, ScanOptions, ScanRequest, Service, MAX_SCREENSHOT_BYTES};
use crate::ScanError;

pub const PORT_ENV: &str = "PRIVSCAN_PORT";
pub const DEFAULT_PORT: u16 = 8080;

/// Room above the screenshot cap so oversized uploads reach the handler and get a
/// proper BadImage answer instead of a bare 413.
const BODY_LIMIT: usize = 3 * MAX_SCREENSHOT_BYTES;

struct Gate {
    permits: Semaphore,
    admitted: AtomicUsize,
    capacity: usize,
}

/// Holds a place in the gate until dropped.
struct Ticket<'a>(&'a Gate);

impl Drop for Ticket<'_> {
    fn drop(&mut self) {
        self.0.admitted.fetch_sub(1, Ordering::AcqRel);
    }
}

impl Gate {
    fn admit(&self) -> Option<Ticket<'_>> {
        let prev = self.admitted.fetch_add(1, Ordering::AcqRel);
        let ticket = Ticket(self);
        (prev < self.capacity).then_some(ticket)
    }
}

#[derive(Clone)]
struct AppState {
    service: Arc<Service>,
    gate: Arc<Gate>,
}

pub fn router(service: Arc<Service>) -> Router {
    let limits = service.limits;
    let gate = Gate {
        permits: Semaphore::new(limits.max_in_flight.max(1)),
        admitted: AtomicUsize::new(0),
        capacity: limits.max_in_flight.max(1) + limits.max_queued,
    };
    Router::new()
        .route("/v1/scan", post(scan))
        .route("/healthz", get(healthz))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(AppState { service, gate: Arc::new(gate) })
}

async fn healthz() -> Json<Health> {
    Json(Health { status: "ok".to_string(), version: env!("CARGO_PKG_VERSION").to_string() })
}

async fn scan(State(state): State<AppState>, multipart: Result<Multipart, MultipartRejection>) -> Response {
    let started = Instant::now();
    let Some(_ticket) = state.gate.admit() else {
        return ScanError::Overloaded("too many scans in progress; retry later".to_string()).into_response();
    };
    let request = match multipart {
        Ok(m) => read_request(m).await,
        Err(e) => Err(ScanError::BadRequest(e.body_text())),
    };
    let request = match request {
        Ok(r) => r,
        Err(e) => return e.into_response(),
    };
    let Ok(_permit) = state.gate.permits.acquire().await else {
        return ScanError::Internal("scan gate closed".to_string()).into_response();
    };
    let service = state.service.clone();
    let outcome = tokio::task::spawn_blocking(move || handle_scan(&service, request, started)).await;
    match outcome {
        Ok(Ok(result)) => ([(header::CONTENT_TYPE, "application/json")], encode_result(&result)).into_response(),
        Ok(Err(e)) => {
            log::warn!("scan failed: {} {e}", e.kind());
            e.into_response()
        }
        Err(e) => {
            log::error!("scan task died: {e}");
            ScanError::Internal("scan task failed".to_string()).into_response()
        }
    }
}

async fn read_request(mut multipart: Multipart) -> Result<ScanRequest, ScanError> {
    let bad = |e: axum::extract::multipart::MultipartError| ScanError::BadRequest(e.body_text());
    let (mut screenshot, mut policy_url) = (None, None);
    let mut request = ScanRequest::default();
    while let Some(field) = multipart.next_field().await.map_err(bad)? {
        let name = field.name().unwrap_or_default().to_string();
        let bytes = field.bytes().await.map_err(bad)?;
        match name.as_str() {
            "screenshot" => screenshot = Some(bytes.to_vec()),
            "policy_url" => {
                let url = String::from_utf8(bytes.to_vec()).map_err(|_| ScanError::BadUrl("policy_url is not UTF-8".to_string()))?;
                policy_url = Some(url.trim().to_string());
            }
            "ui_sidecar" => request.ui_sidecar = Some(parse_sidecar(&bytes).map_err(|e| ScanError::BadSidecar(e.to_string()))?),
            "options" => request.options = ScanOptions::parse(&bytes)?,
            other => return Err(ScanError::BadRequest(format!("unexpected part `{other}`"))),
        }
    }
    request.screenshot = screenshot.ok_or_else(|| ScanError::BadImage("missing `screenshot` part".to_string()))?;
    request.policy_url = policy_url.ok_or_else(|| ScanError::BadUrl("missing `policy_url` part".to_string()))?;
    Ok(request)
}

/// `PRIVSCAN_PORT`, or 8080 when unset.
pub fn port_from_env() -> Result<u16, String> {
    match std::env::var(PORT_ENV) {
        Err(_) => Ok(DEFAULT_PORT),
        Ok(v) => v.trim().parse().map_err(|_| format!("{PORT_ENV}=`{v}` is not a port number")),
    }
}

/// Serves until ctrl-c.
pub async fn serve(listener: TcpListener, service: Arc<Service>) -> std::io::Result<()> {
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// Binds `addr` and serves in the background; returns the bound address.
pub async fn spawn(addr: SocketAddr, service: Arc<Service>) -> std::io::Result<(SocketAddr, JoinHandle<std::io::Result<()>>)> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    let handle = tokio::spawn(async move { axum::serve(listener, router(service)).await });
    Ok((local, handle))
}
