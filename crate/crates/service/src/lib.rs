//! The scan service: `POST /v1/scan` runs context detection, segment extraction and
//! CPP presentation on one screenshot; `GET /healthz` reports liveness.

mod error;
mod pipeline;
mod routes;

pub use error::ScanError;
pub use pipeline::{handle_scan, Limits, ScanOptions, ScanRequest, Service, MAX_SCREENSHOT_BYTES};
pub use routes::{port_from_env, router, serve, spawn, DEFAULT_PORT, PORT_ENV};
