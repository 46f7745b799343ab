//! Latency bench: mean per-stage timings over the three screen conditions, laid out
//! as Context Detection / Segment Extraction / CPP Presentation / Overall rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::net::SocketAddr;
use std::sync::Arc;

use privscan_core::bundled::{self, Condition};
use privscan_core::policy::{CacheStore, UreqGet};
use privscan_core::ScanTimings;
use privscan_service::Service;
use reqwest::multipart::{Form, Part};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::session::post_scan;

pub const CONDITIONS: [(Condition, &str); 3] =
    [(Condition::IconOnly, "Icon Only"), (Condition::TextOnly, "Text Only"), (Condition::Mixed, "Mixed")];
pub const ROWS: [&str; 4] = ["Context Detection", "Segment Extraction", "CPP Presentation", "Overall"];

#[derive(Debug, Error, PartialEq, Eq)]
#[error("bench aborted: {0}")]
pub struct BenchAbortedError(pub String);

/// Arithmetic means in milliseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanTimings {
    pub context_detection_ms: f64,
    pub segment_extraction_ms: f64,
    pub cpp_presentation_ms: f64,
    pub overall_ms: f64,
}

impl MeanTimings {
    pub fn of(runs: &[ScanTimings]) -> Self {
        let n = runs.len().max(1) as f64;
        let mean = |f: fn(&ScanTimings) -> u64| runs.iter().map(|t| f(t) as f64).sum::<f64>() / n;
        Self {
            context_detection_ms: mean(|t| t.context_detection_ms),
            segment_extraction_ms: mean(|t| t.segment_extraction_ms),
            cpp_presentation_ms: mean(|t| t.cpp_presentation_ms),
            overall_ms: mean(|t| t.overall_ms),
        }
    }

    pub fn mean_of(columns: &[MeanTimings]) -> Self {
        let n = columns.len().max(1) as f64;
        let mean = |f: fn(&MeanTimings) -> f64| columns.iter().map(f).sum::<f64>() / n;
        Self {
            context_detection_ms: mean(|m| m.context_detection_ms),
            segment_extraction_ms: mean(|m| m.segment_extraction_ms),
            cpp_presentation_ms: mean(|m| m.cpp_presentation_ms),
            overall_ms: mean(|m| m.overall_ms),
        }
    }

    /// Values in [`ROWS`] order.
    pub fn rows(&self) -> [f64; 4] {
        [self.context_detection_ms, self.segment_extraction_ms, self.cpp_presentation_ms, self.overall_ms]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub n: usize,
    pub endpoint: String,
    pub policy_url: String,
    pub icon_only: MeanTimings,
    pub text_only: MeanTimings,
    pub mixed: MeanTimings,
    pub average: MeanTimings,
    /// Raw timings per condition label.
    pub runs: BTreeMap<String, Vec<ScanTimings>>,
}

impl BenchReport {
    /// Column label and values, in table order.
    pub fn columns(&self) -> [(&'static str, &MeanTimings); 4] {
        [("Icon Only", &self.icon_only), ("Text Only", &self.text_only), ("Mixed", &self.mixed), ("Average", &self.average)]
    }

    /// Aligned text table in whole milliseconds.
    pub fn render_table(&self) -> String {
        let mut out = format!("{:<20}", "");
        for (label, _) in self.columns() {
            let _ = write!(out, "{label:>12}");
        }
        out.push('\n');
        for (i, row) in ROWS.iter().enumerate() {
            let _ = write!(out, "{row:<20}");
            for (_, m) in self.columns() {
                let _ = write!(out, "{:>12}", format!("{:.0} ms", m.rows()[i]));
            }
            out.push('\n');
        }
        let _ = writeln!(out, "(mean of {} runs per screenshot)", self.n);
        out
    }
}

fn fixture_form(condition: Condition, policy_url: &str) -> Form {
    let fx = bundled::fixture(condition);
    Form::new()
        .part("screenshot", Part::bytes(fx.png.to_vec()).file_name(format!("{}.png", fx.name)))
        .text("policy_url", policy_url.to_string())
        .part("ui_sidecar", Part::bytes(fx.sidecar.to_vec()))
}

/// Runs `n` sequential scans per condition against `endpoint` after one untimed
/// warm-up scan. Any failed scan aborts the whole bench.
pub async fn run_bench(endpoint: &str, policy_url: &str, n: usize) -> Result<BenchReport, BenchAbortedError> {
    if n == 0 {
        return Err(BenchAbortedError("need at least one run per condition".to_string()));
    }
    let http = reqwest::Client::new();
    post_scan(&http, endpoint, fixture_form(Condition::Mixed, policy_url)).await.map_err(BenchAbortedError)?;

    let mut runs = BTreeMap::new();
    let mut means = Vec::new();
    for (condition, label) in CONDITIONS {
        let mut timings = Vec::with_capacity(n);
        for _ in 0..n {
            let result = post_scan(&http, endpoint, fixture_form(condition, policy_url)).await.map_err(BenchAbortedError)?;
            timings.push(result.timings);
        }
        means.push(MeanTimings::of(&timings));
        runs.insert(label.to_string(), timings);
    }
    Ok(BenchReport {
        n,
        endpoint: endpoint.to_string(),
        policy_url: policy_url.to_string(),
        icon_only: means[0],
        text_only: means[1],
        mixed: means[2],
        average: MeanTimings::mean_of(&means),
        runs,
    })
}

/// Serves the bundled dummy policy on loopback at `/privacy`.
pub async fn serve_dummy_policy() -> std::io::Result<SocketAddr> {
    use axum::response::Html;
    let app = axum::Router::new().route("/privacy", axum::routing::get(|| async { Html(bundled::DUMMY_POLICY_HTML) }));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?;
    tokio::spawn(async move { axum::serve(listener, app).await });
    Ok(addr)
}

/// Boots a loopback service with a fresh cache plus a loopback policy server,
/// then runs [`run_bench`] against them.
pub async fn run_local_bench(n: usize) -> Result<BenchReport, BenchAbortedError> {
    let abort = |e: std::io::Error| BenchAbortedError(e.to_string());
    let policy = serve_dummy_policy().await.map_err(abort)?;
    let cache_dir = tempfile::tempdir().map_err(abort)?;
    let cache = CacheStore::open(cache_dir.path()).map_err(|e| BenchAbortedError(e.to_string()))?;
    let service = Service::new(cache, Arc::new(UreqGet::default()));
    let (addr, _) = privscan_service::spawn("127.0.0.1:0".parse().expect("valid addr"), Arc::new(service)).await.map_err(abort)?;
    run_bench(&format!("http://{addr}"), &format!("http://{policy}/privacy"), n).await
}
