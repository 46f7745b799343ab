use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use privscan_core::bundled::{self, Condition};
use privscan_core::policy::{CacheStore, HttpGet, HttpResponse};
use privscan_core::wire::{decode_result, ErrorBody, Health, ScanResult};
use privscan_core::RasterImage;
use privscan_service::{spawn, Limits, Service};
use reqwest::multipart::{Form, Part};

const POLICY_URL: &str = "https://beancorner.example/privacy";

struct StubPolicy {
    calls: AtomicUsize,
    status: u16,
    delay: Duration,
}

impl StubPolicy {
    fn new(status: u16) -> Arc<Self> {
        Arc::new(Self { calls: AtomicUsize::new(0), status, delay: Duration::ZERO })
    }
}

impl HttpGet for StubPolicy {
    fn get(&self, _url: &str) -> Result<HttpResponse, String> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        std::thread::sleep(self.delay);
        Ok(HttpResponse { status: self.status, body: bundled::DUMMY_POLICY_HTML.as_bytes().to_vec() })
    }
}

struct Harness {
    addr: SocketAddr,
    stub: Arc<StubPolicy>,
    _cache: tempfile::TempDir,
}

async fn start(stub: Arc<StubPolicy>, limits: Limits) -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let service = Service::new(CacheStore::open(dir.path()).unwrap(), stub.clone()).with_limits(limits);
    let (addr, _) = spawn("127.0.0.1:0".parse().unwrap(), Arc::new(service)).await.unwrap();
    Harness { addr, stub, _cache: dir }
}

fn form(png: Vec<u8>, sidecar: Option<&[u8]>, url: &str) -> Form {
    let mut f = Form::new().part("screenshot", Part::bytes(png).file_name("screen.png")).text("policy_url", url.to_string());
    if let Some(s) = sidecar {
        f = f.part("ui_sidecar", Part::bytes(s.to_vec()));
    }
    f
}

fn fixture_form(c: Condition) -> Form {
    let fx = bundled::fixture(c);
    form(fx.png.to_vec(), Some(fx.sidecar), POLICY_URL)
}

async fn post(h: &Harness, f: Form) -> reqwest::Response {
    reqwest::Client::new().post(format!("http://{}/v1/scan", h.addr)).multipart(f).send().await.unwrap()
}

async fn scan_ok(h: &Harness, f: Form) -> ScanResult {
    let resp = post(h, f).await;
    assert_eq!(resp.status(), 200);
    let result = decode_result(&resp.bytes().await.unwrap()).unwrap();
    result.check().unwrap();
    result
}

async fn scan_err(h: &Harness, f: Form) -> (u16, ErrorBody) {
    let resp = post(h, f).await;
    let status = resp.status().as_u16();
    (status, serde_json::from_slice(&resp.bytes().await.unwrap()).unwrap())
}

#[tokio::test]
async fn healthz_reports_ok() {
    let h = start(StubPolicy::new(200), Limits::default()).await;
    let body: Health = serde_json::from_slice(
        &reqwest::get(format!("http://{}/healthz", h.addr)).await.unwrap().bytes().await.unwrap(),
    )
    .unwrap();
    assert_eq!(body.status, "ok");
    assert_eq!(body.version, env!("CARGO_PKG_VERSION"));
}

#[tokio::test]
async fn mixed_page_returns_location_image_at_screen_size() {
    let h = start(StubPolicy::new(200), Limits::default()).await;
    let result = scan_ok(&h, fixture_form(Condition::Mixed)).await;
    let screen = RasterImage::from_png(bundled::fixture(Condition::Mixed).png).unwrap();
    let img = RasterImage::from_png(&result.images["location"]).unwrap();
    assert_eq!((img.width(), img.height()), (screen.width(), screen.height()));
    assert!(!result.cards["location"].undisclosed);
    assert!(result.timings.overall_ms >= result.timings.component_sum());
}

#[tokio::test]
async fn rewards_page_is_an_empty_success() {
    let h = start(StubPolicy::new(200), Limits::default()).await;
    let result = scan_ok(&h, fixture_form(Condition::NoElements)).await;
    assert!(result.detections.is_empty() && result.images.is_empty() && result.cards.is_empty());
    assert_eq!((result.timings.segment_extraction_ms, result.timings.cpp_presentation_ms), (0, 0));
    assert_eq!(h.stub.calls.load(Ordering::SeqCst), 0);
}

#[tokio::test]
async fn second_identical_scan_is_served_from_cache() {
    let h = start(StubPolicy::new(200), Limits::default()).await;
    let first = scan_ok(&h, fixture_form(Condition::IconOnly)).await;
    let second = scan_ok(&h, fixture_form(Condition::IconOnly)).await;
    assert!(!first.policy_from_cache);
    assert!(second.policy_from_cache);
    assert_eq!(h.stub.calls.load(Ordering::SeqCst), 1);
    assert_eq!(first.images, second.images);
}

#[tokio::test]
async fn oversized_screenshot_is_bad_image() {
    let h = start(StubPolicy::new(200), Limits::default()).await;
    let (status, body) = scan_err(&h, form(vec![0u8; 6 * 1024 * 1024], None, POLICY_URL)).await;
    assert_eq!((status, body.error.as_str()), (400, "BadImage"));
}

#[tokio::test]
async fn undecodable_screenshot_is_bad_image() {
    let h = start(StubPolicy::new(200), Limits::default()).await;
    let (status, body) = scan_err(&h, form(b"not a png".to_vec(), None, POLICY_URL)).await;
    assert_eq!((status, body.error.as_str()), (400, "BadImage"));
}

#[tokio::test]
async fn malformed_url_is_bad_url() {
    let h = start(StubPolicy::new(200), Limits::default()).await;
    let png = bundled::fixture(Condition::Mixed).png.to_vec();
    let (status, body) = scan_err(&h, form(png, None, "ftp://example.com/p")).await;
    assert_eq!((status, body.error.as_str()), (400, "BadUrl"));
}

#[tokio::test]
async fn sidecar_schema_violation_is_422() {
    let h = start(StubPolicy::new(200), Limits::default()).await;
    let png = bundled::fixture(Condition::Mixed).png.to_vec();
    let (status, body) = scan_err(&h, form(png, Some(br#"{"elements":[{"box":[5,5,1,1],"text":"x"}]}"#), POLICY_URL)).await;
    assert_eq!((status, body.error.as_str()), (422, "BadSidecar"));
}

#[tokio::test]
async fn upstream_failure_is_502_with_status() {
    let h = start(StubPolicy::new(503), Limits::default()).await;
    let (status, body) = scan_err(&h, fixture_form(Condition::Mixed)).await;
    assert_eq!((status, body.error.as_str(), body.upstream_status), (502, "PolicyFetchFailed", Some(503)));
}

#[tokio::test]
async fn invalid_options_are_rejected() {
    let h = start(StubPolicy::new(200), Limits::default()).await;
    let f = fixture_form(Condition::Mixed).text("options", r#"{"ncc_threshold": 1.5}"#);
    let (status, body) = scan_err(&h, f).await;
    assert_eq!((status, body.error.as_str()), (400, "BadOptions"));
}

#[tokio::test]
async fn stricter_threshold_option_is_applied() {
    let h = start(StubPolicy::new(200), Limits::default()).await;
    let fx = bundled::fixture(Condition::IconOnly);
    let f = form(fx.png.to_vec(), None, POLICY_URL).text("options", r#"{"ncc_threshold": 0.999, "summarizer": "deterministic"}"#);
    let result = scan_ok(&h, f).await;
    assert!(result.detections.iter().all(|d| d.score >= 0.999));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn overflow_gets_429_and_health_stays_responsive() {
    let stub = Arc::new(StubPolicy { calls: AtomicUsize::new(0), status: 200, delay: Duration::from_millis(1500) });
    let h = Arc::new(start(stub, Limits { max_in_flight: 1, max_queued: 0 }).await);
    let slow = {
        let h = h.clone();
        tokio::spawn(async move { post(&h, fixture_form(Condition::Mixed)).await.status().as_u16() })
    };
    tokio::time::sleep(Duration::from_millis(300)).await;
    let t = std::time::Instant::now();
    let health = reqwest::get(format!("http://{}/healthz", h.addr)).await.unwrap();
    assert_eq!(health.status(), 200);
    assert!(t.elapsed() < Duration::from_millis(500));
    let (status, body) = scan_err(&h, fixture_form(Condition::Mixed)).await;
    assert_eq!((status, body.error.as_str()), (429, "Overloaded"));
    assert_eq!(slow.await.unwrap(), 200);
}
