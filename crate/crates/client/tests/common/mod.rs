#![allow(dead_code)]

use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use privscan_core::bundled::{self, Condition};
use privscan_core::detect::parse_sidecar;
use privscan_core::policy::{CacheStore, HttpGet, HttpResponse};
use privscan_core::RasterImage;
use privscan_client::ScanJob;
use privscan_service::{spawn, Service};

pub const POLICY_URL: &str = "https://beancorner.example/privacy";

/// Serves the bundled policy, counting calls, after an optional delay.
pub struct StubPolicy {
    pub calls: AtomicUsize,
    pub delay: Duration,
}

impl StubPolicy {
    pub fn new(delay: Duration) -> Arc<Self> {
        Arc::new(Self { calls: AtomicUsize::new(0), delay })
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl HttpGet for StubPolicy {
    fn get(&self, _url: &str) -> Result<HttpResponse, String> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        std::thread::sleep(self.delay);
        Ok(HttpResponse { status: 200, body: bundled::DUMMY_POLICY_HTML.as_bytes().to_vec() })
    }
}

pub struct Local {
    pub addr: SocketAddr,
    pub stub: Arc<StubPolicy>,
    _cache: tempfile::TempDir,
}

impl Local {
    pub fn endpoint(&self) -> String {
        format!("http://{}", self.addr)
    }
}

pub async fn start(delay: Duration) -> Local {
    let dir = tempfile::tempdir().unwrap();
    let stub = StubPolicy::new(delay);
    let service = Service::new(CacheStore::open(dir.path()).unwrap(), stub.clone());
    let (addr, _) = spawn("127.0.0.1:0".parse().unwrap(), Arc::new(service)).await.unwrap();
    Local { addr, stub, _cache: dir }
}

pub fn fixture_job(c: Condition) -> ScanJob {
    let fx = bundled::fixture(c);
    let mut job = ScanJob::new(RasterImage::from_png(fx.png).unwrap(), POLICY_URL);
    job.sidecar = Some(parse_sidecar(fx.sidecar).unwrap());
    job
}
