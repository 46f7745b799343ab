use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use privscan_core::detect::{detect_context, Detections, TemplateSet};
use privscan_core::policy::{fetch_policy, normalize_url, CacheStore, FetchError, HttpGet, UreqGet};
use privscan_core::present::{present, summarizer_from_env, ExtractiveSummarizer, HttpSummarizer, LayoutConfig, Summarizer};
use privscan_core::present::{SUMMARIZER_KEY_ENV, SUMMARIZER_URL_ENV};
use privscan_core::segments::extract_segments;
use privscan_core::wire::{CardMeta, ScanResult};
use privscan_core::{bundled, DetectionParams, RasterImage, ScanTimings, Taxonomy, UiElement};
use serde::Deserialize;

use crate::ScanError;

pub const MAX_SCREENSHOT_BYTES: usize = 5 * 1024 * 1024;

/// Admission control: scans running at once, and scans allowed to wait for a slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_in_flight: usize,
    pub max_queued: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self { max_in_flight: 8, max_queued: 32 }
    }
}

/// Everything a scan needs that outlives the request.
pub struct Service {
    pub taxonomy: Taxonomy,
    pub templates: TemplateSet,
    pub params: DetectionParams,
    pub layout: LayoutConfig,
    pub cache: CacheStore,
    pub fetcher: Arc<dyn HttpGet>,
    pub summarizer: Arc<dyn Summarizer>,
    /// Backend for `"summarizer": "external"` requests, when configured.
    pub external: Option<Arc<dyn Summarizer>>,
    pub limits: Limits,
}

impl Service {
    /// Bundled taxonomy and templates, deterministic summaries.
    pub fn new(cache: CacheStore, fetcher: Arc<dyn HttpGet>) -> Self {
        Self {
            taxonomy: bundled::taxonomy(),
            templates: bundled::templates(),
            params: DetectionParams::default(),
            layout: LayoutConfig::default(),
            cache,
            fetcher,
            summarizer: Arc::new(ExtractiveSummarizer),
            external: None,
            limits: Limits::default(),
        }
    }

    /// Cache directory and summarizer from the environment, live HTTP fetches.
    pub fn from_env() -> Result<Self, String> {
        let cache = CacheStore::from_env().map_err(|e| e.to_string())?;
        let mut service = Self::new(cache, Arc::new(UreqGet::new(Duration::from_secs(20))));
        service.summarizer = Arc::from(summarizer_from_env()?);
        service.external = std::env::var(SUMMARIZER_URL_ENV)
            .ok()
            .map(|url| Arc::new(HttpSummarizer::new(url, std::env::var(SUMMARIZER_KEY_ENV).ok())) as Arc<dyn Summarizer>);
        Ok(service)
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }
}

/// Per-request overrides sent in the `options` part.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanOptions {
    pub ncc_threshold: Option<f64>,
    pub nms_iou: Option<f64>,
    pub scales: Option<Vec<f64>>,
    /// `deterministic` or `external`.
    pub summarizer: Option<String>,
}

impl ScanOptions {
    pub fn parse(bytes: &[u8]) -> Result<Self, ScanError> {
        serde_json::from_slice(bytes).map_err(|e| ScanError::BadOptions(format!("options: {e}")))
    }

    fn params(&self, base: &DetectionParams) -> Result<DetectionParams, ScanError> {
        let mut p = base.clone();
        if let Some(t) = self.ncc_threshold {
            p.ncc_threshold = t;
        }
        if let Some(n) = self.nms_iou {
            p.nms_iou = n;
        }
        if let Some(s) = &self.scales {
            p.scales.clone_from(s);
        }
        p.validate().map_err(|e| ScanError::BadOptions(e.to_string()))?;
        Ok(p)
    }

    fn summarizer(&self, service: &Service) -> Result<Arc<dyn Summarizer>, ScanError> {
        match self.summarizer.as_deref() {
            None => Ok(service.summarizer.clone()),
            Some("deterministic") => Ok(Arc::new(ExtractiveSummarizer)),
            Some("external") => service
                .external
                .clone()
                .ok_or_else(|| ScanError::BadOptions(format!("external summarizer requested but {SUMMARIZER_URL_ENV} is not set"))),
            Some(other) => Err(ScanError::BadOptions(format!("unknown summarizer `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScanRequest {
    pub screenshot: Vec<u8>,
    pub policy_url: String,
    pub ui_sidecar: Option<Vec<UiElement>>,
    pub options: ScanOptions,
}

fn ms(d: Duration) -> u64 {
    u64::try_from(d.as_millis()).unwrap_or(u64::MAX)
}

fn fetch_error(e: FetchError) -> ScanError {
    match e {
        FetchError::InvalidUrl(e) => ScanError::BadUrl(e.to_string()),
        FetchError::Cache(e) => ScanError::Internal(e.to_string()),
        other => ScanError::PolicyFetchFailed { upstream_status: other.upstream_status(), message: other.to_string() },
    }
}

/// Runs the three stages. `started` marks handler entry and anchors `overall_ms`.
pub fn handle_scan(service: &Service, request: ScanRequest, started: Instant) -> Result<ScanResult, ScanError> {
    let ScanRequest { screenshot, policy_url, ui_sidecar, options } = request;
    if screenshot.len() > MAX_SCREENSHOT_BYTES {
        return Err(ScanError::BadImage(format!(
            "screenshot is {} bytes; the limit is {MAX_SCREENSHOT_BYTES}",
            screenshot.len()
        )));
    }
    normalize_url(&policy_url).map_err(|e| ScanError::BadUrl(e.to_string()))?;
    let params = options.params(&service.params)?;
    let summarizer = options.summarizer(service)?;

    let t = Instant::now();
    let screen = RasterImage::from_png(&screenshot).map_err(|e| ScanError::BadImage(e.to_string()))?;
    let Detections { detections, mut warnings } =
        detect_context(&screen, ui_sidecar.as_deref(), &service.taxonomy, &service.templates, &params);
    let context_detection_ms = ms(t.elapsed());

    let mut result = ScanResult { detections, warnings: Vec::new(), ..ScanResult::default() };
    let (mut segment_extraction_ms, mut cpp_presentation_ms) = (0, 0);
    if !result.detections.is_empty() {
        let t = Instant::now();
        let doc = fetch_policy(&policy_url, &service.cache, service.fetcher.as_ref()).map_err(fetch_error)?;
        let segments = extract_segments(&doc, &service.taxonomy);
        segment_extraction_ms = ms(t.elapsed());
        result.policy_from_cache = doc.from_cache;
        if doc.truncated {
            warnings.push("policy text exceeded 2 MB and was truncated at a sentence end".to_string());
        }

        let t = Instant::now();
        let shown = present(&screen, &result.detections, &segments, &service.taxonomy, summarizer.as_ref(), &service.layout)
            .map_err(|e| ScanError::Internal(e.to_string()))?;
        warnings.extend(shown.warnings);
        let mut images = BTreeMap::new();
        let mut cards = BTreeMap::new();
        for img in shown.images {
            cards.insert(img.data_type.clone(), CardMeta::from(&img.card));
            images.insert(img.data_type, img.image.to_png());
        }
        result.images = images;
        result.cards = cards;
        cpp_presentation_ms = ms(t.elapsed());
    }

    result.warnings = warnings;
    result.timings = ScanTimings { context_detection_ms, segment_extraction_ms, cpp_presentation_ms, overall_ms: ms(started.elapsed()) };
    result.check().map_err(ScanError::Internal)?;
    Ok(result)
}
