//! Shortening policy segments into card text.

use std::time::Duration;

use serde_json::json;

use crate::segments::PolicySegment;
use crate::DataType;

pub const MAX_SUMMARY_CHARS: usize = 280;
const ELLIPSIS: char = '\u{2026}';
const TRUNCATED_CHARS: usize = MAX_SUMMARY_CHARS - 3;

pub const SUMMARIZER_ENV: &str = "PRIVSCAN_SUMMARIZER";
pub const SUMMARIZER_URL_ENV: &str = "PRIVSCAN_SUMMARIZER_URL";
pub const SUMMARIZER_KEY_ENV: &str = "PRIVSCAN_SUMMARIZER_KEY";

/// Produces card text for one data type from its (non-empty) segments.
pub trait Summarizer: Send + Sync {
    fn name(&self) -> &str;
    fn summarize(&self, segments: &[PolicySegment], data_type: &DataType) -> Result<String, String>;
}

/// First segment sentence, cut to fit. Needs no network.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExtractiveSummarizer;

impl Summarizer for ExtractiveSummarizer {
    fn name(&self) -> &str {
        "deterministic"
    }

    fn summarize(&self, segments: &[PolicySegment], _data_type: &DataType) -> Result<String, String> {
        segments.first().map(|s| truncate_summary(&s.text)).ok_or_else(|| "no segments".to_string())
    }
}

/// Chat-completion style HTTP backend (`{"messages":[...]}` in,
/// `choices[0].message.content` out).
#[derive(Clone, Debug)]
pub struct HttpSummarizer {
    url: String,
    key: Option<String>,
    model: String,
    agent: ureq::Agent,
}

impl HttpSummarizer {
    pub fn new(url: impl Into<String>, key: Option<String>) -> Self {
        let config = ureq::Agent::config_builder().timeout_global(Some(Duration::from_secs(30))).build();
        Self { url: url.into(), key, model: "gpt-4o-mini".to_string(), agent: config.into() }
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.model = model.into();
        self
    }

    fn prompt(segments: &[PolicySegment], data_type: &DataType) -> String {
        let body: Vec<&str> = segments.iter().map(|s| s.text.as_str()).collect();
        format!(
            "Summarize what this privacy policy says about {} data in one or two plain sentences, \
             at most {MAX_SUMMARY_CHARS} characters.\n\n{}",
            data_type.display_name,
            body.join("\n")
        )
    }
}

impl Summarizer for HttpSummarizer {
    fn name(&self) -> &str {
        "external"
    }

    fn summarize(&self, segments: &[PolicySegment], data_type: &DataType) -> Result<String, String> {
        let payload = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": Self::prompt(segments, data_type)}],
        });
        let mut req = self.agent.post(&self.url);
        if let Some(key) = &self.key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let body = serde_json::to_vec(&payload).expect("json payload");
        let mut resp = req.header("Content-Type", "application/json").send(&body[..]).map_err(|e| e.to_string())?;
        let raw = resp.body_mut().read_to_vec().map_err(|e| e.to_string())?;
        let value: serde_json::Value = serde_json::from_slice(&raw).map_err(|e| e.to_string())?;
        let text = value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| "summarizer response has no choices[0].message.content".to_string())?;
        Ok(text.to_string())
    }
}

/// Builds the summarizer named by `PRIVSCAN_SUMMARIZER` (`deterministic` or `external`).
pub fn summarizer_from_env() -> Result<Box<dyn Summarizer>, String> {
    match std::env::var(SUMMARIZER_ENV).as_deref() {
        Err(_) | Ok("") | Ok("deterministic") => Ok(Box::new(ExtractiveSummarizer)),
        Ok("external") => {
            let url = std::env::var(SUMMARIZER_URL_ENV).map_err(|_| format!("{SUMMARIZER_URL_ENV} is required for the external summarizer"))?;
            Ok(Box::new(HttpSummarizer::new(url, std::env::var(SUMMARIZER_KEY_ENV).ok())))
        }
        Ok(other) => Err(format!("unknown summarizer `{other}`")),
    }
}

/// Keeps text of at most 280 chars; longer text is cut at the last word boundary
/// within 277 chars and gets an ellipsis.
pub fn truncate_summary(text: &str) -> String {
    let text = text.trim();
    if text.chars().count() <= MAX_SUMMARY_CHARS {
        return text.to_string();
    }
    let cut = text.char_indices().nth(TRUNCATED_CHARS).map_or(text.len(), |(i, _)| i);
    let head = &text[..cut];
    let at_word_end = text[cut..].starts_with(char::is_whitespace);
    let head = if at_word_end {
        head
    } else {
        head.rfind(char::is_whitespace).map_or(head, |i| &head[..i])
    };
    let mut out = head.trim_end().to_string();
    out.push(ELLIPSIS);
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summary {
    pub text: String,
    pub undisclosed: bool,
    /// Set when the configured backend failed and the extractive fallback was used.
    pub warning: Option<String>,
}

/// Card text for `data_type`. Backend failures fall back to [`ExtractiveSummarizer`].
pub fn summarize(segments: &[PolicySegment], data_type: &DataType, backend: &dyn Summarizer) -> Summary {
    if segments.is_empty() {
        return Summary { text: format!("No disclosure found for {}.", data_type.display_name), undisclosed: true, warning: None };
    }
    match backend.summarize(segments, data_type) {
        Ok(text) if !text.trim().is_empty() => Summary { text: truncate_summary(&text), undisclosed: false, warning: None },
        other => {
            let reason = other.err().unwrap_or_else(|| "empty summary".to_string());
            let text = ExtractiveSummarizer.summarize(segments, data_type).expect("segments are non-empty");
            Summary {
                text,
                undisclosed: false,
                warning: Some(format!("summarizer `{}` failed for {}: {reason}; used extractive fallback", backend.name(), data_type.id)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(text: &str) -> PolicySegment {
        PolicySegment { data_type: "camera".into(), text: text.into(), sentence_index: 0, offset: 0, matched_phrase: "camera".into() }
    }

    fn camera() -> DataType {
        DataType { id: "camera".into(), display_name: "Camera".into() }
    }

    struct Failing;
    impl Summarizer for Failing {
        fn name(&self) -> &str {
            "failing"
        }
        fn summarize(&self, _: &[PolicySegment], _: &DataType) -> Result<String, String> {
            Err("boom".into())
        }
    }

    struct Verbose;
    impl Summarizer for Verbose {
        fn name(&self) -> &str {
            "verbose"
        }
        fn summarize(&self, _: &[PolicySegment], _: &DataType) -> Result<String, String> {
            Ok("word ".repeat(200))
        }
    }

    /// Truncation rule written out over a char vector.
    fn oracle(text: &str) -> String {
        let chars: Vec<char> = text.chars().collect();
        if chars.len() <= 280 {
            return text.to_string();
        }
        let mut end = 277;
        if !chars[277].is_whitespace() {
            while end > 0 && !chars[end - 1].is_whitespace() {
                end -= 1;
            }
            if end == 0 {
                end = 277;
            }
        }
        let mut s: String = chars[..end].iter().collect();
        while s.ends_with(char::is_whitespace) {
            s.pop();
        }
        s + "\u{2026}"
    }

    #[test]
    fn short_segment_is_verbatim() {
        let text = "We use your camera to scan QR codes ok.";
        let s = summarize(&[seg(text)], &camera(), &ExtractiveSummarizer);
        assert_eq!(s.text, text);
        assert!(!s.undisclosed);
    }

    #[test]
    fn long_segment_is_cut_on_word_boundary() {
        let long: String = (0..120).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        assert!(long.chars().count() > 600 - 200);
        let six_hundred = format!("{long} {}", "tail ".repeat(60)).chars().take(600).collect::<String>();
        assert_eq!(six_hundred.chars().count(), 600);
        let s = summarize(&[seg(&six_hundred)], &camera(), &ExtractiveSummarizer);
        assert_eq!(s.text, oracle(&six_hundred));
        assert!(s.text.ends_with('\u{2026}'));
        assert!(s.text.chars().count() <= 278);
        let prefix = s.text.trim_end_matches('\u{2026}');
        assert!(six_hundred.starts_with(prefix));
        assert!(six_hundred[prefix.len()..].starts_with(' '));
    }

    #[test]
    fn unbroken_text_is_hard_cut() {
        let s = truncate_summary(&"x".repeat(500));
        assert_eq!(s.chars().count(), 278);
        assert_eq!(s, oracle(&"x".repeat(500)));
    }

    #[test]
    fn no_segments_is_undisclosed() {
        let s = summarize(&[], &camera(), &ExtractiveSummarizer);
        assert_eq!(s.text, "No disclosure found for Camera.");
        assert!(s.undisclosed);
    }

    #[test]
    fn backend_failure_falls_back() {
        let s = summarize(&[seg("We use the camera.")], &camera(), &Failing);
        assert_eq!(s.text, "We use the camera.");
        assert!(s.warning.unwrap().contains("boom"));
    }

    #[test]
    fn backend_output_is_capped() {
        let s = summarize(&[seg("x")], &camera(), &Verbose);
        assert!(s.text.chars().count() <= MAX_SUMMARY_CHARS);
    }
}
