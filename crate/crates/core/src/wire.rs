//! JSON response schema of `POST /v1/scan`, shared by the service and the client.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::present::CppCard;
use crate::{BoundingBox, Detection, ScanTimings};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardMeta {
    pub summary: String,
    pub undisclosed: bool,
    pub segment_count: usize,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
}

impl From<&CppCard> for CardMeta {
    fn from(c: &CppCard) -> Self {
        Self { summary: c.summary.clone(), undisclosed: c.undisclosed, segment_count: c.segment_count, bbox: c.bbox }
    }
}

/// Product of one scan. Images are PNG bytes, base64 encoded on the wire.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub detections: Vec<Detection>,
    #[serde(with = "base64_map")]
    pub images: BTreeMap<String, Vec<u8>>,
    pub cards: BTreeMap<String, CardMeta>,
    pub timings: ScanTimings,
    pub warnings: Vec<String>,
    pub policy_from_cache: bool,
}

impl ScanResult {
    /// Checks the structural invariants a well-formed response must satisfy.
    pub fn check(&self) -> Result<(), String> {
        let types: std::collections::BTreeSet<&str> = self.detections.iter().map(|d| d.data_type.as_str()).collect();
        let image_keys: std::collections::BTreeSet<&str> = self.images.keys().map(String::as_str).collect();
        let card_keys: std::collections::BTreeSet<&str> = self.cards.keys().map(String::as_str).collect();
        if image_keys != types || card_keys != types {
            return Err(format!("image keys {image_keys:?} / card keys {card_keys:?} differ from detected types {types:?}"));
        }
        if !self.timings.is_consistent() {
            return Err(format!("overall_ms {} < component sum {}", self.timings.overall_ms, self.timings.component_sum()));
        }
        if let Some(d) = self.detections.iter().find(|d| !(0.0..=1.0).contains(&d.score)) {
            return Err(format!("score {} outside [0, 1]", d.score));
        }
        Ok(())
    }
}

/// Error body for non-200 responses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upstream_status: Option<u16>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
}

pub fn encode_result(result: &ScanResult) -> Vec<u8> {
    serde_json::to_vec(result).expect("scan result serializes")
}

pub fn decode_result(bytes: &[u8]) -> Result<ScanResult, serde_json::Error> {
    serde_json::from_slice(bytes)
}

mod base64_map {
    use std::collections::BTreeMap;

    use base64::engine::general_purpose::STANDARD;
    use base64::Engine;
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<String, Vec<u8>>, s: S) -> Result<S::Ok, S::Error> {
        let encoded: BTreeMap<&str, String> = map.iter().map(|(k, v)| (k.as_str(), STANDARD.encode(v))).collect();
        encoded.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, Vec<u8>>, D::Error> {
        let encoded = BTreeMap::<String, String>::deserialize(d)?;
        encoded
            .into_iter()
            .map(|(k, v)| STANDARD.decode(v.as_bytes()).map(|b| (k, b)).map_err(D::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DetectionSource;

    #[test]
    fn empty_result_encoding() {
        let body = String::from_utf8(encode_result(&ScanResult::default())).unwrap();
        assert!(body.starts_with(r#"{"detections":[],"images":{},"cards":{},"timings":{"context_detection_ms":0"#), "{body}");
        assert!(body.ends_with(r#""warnings":[],"policy_from_cache":false}"#));
    }

    #[test]
    fn round_trip() {
        let bbox = BoundingBox::new(1, 2, 30, 40).unwrap();
        let mut r = ScanResult::default();
        r.detections.push(Detection::new(bbox, "camera", 0.91, DetectionSource::Icon));
        r.images.insert("camera".into(), vec![137, 80, 78, 71, 0, 255]);
        r.cards.insert("camera".into(), CardMeta { summary: "s".into(), undisclosed: false, segment_count: 2, bbox });
        r.timings = ScanTimings { context_detection_ms: 3, segment_extraction_ms: 1, cpp_presentation_ms: 2, overall_ms: 7 };
        r.check().unwrap();
        assert_eq!(decode_result(&encode_result(&r)).unwrap(), r);
        let v: serde_json::Value = serde_json::from_slice(&encode_result(&r)).unwrap();
        assert_eq!(v["detections"][0]["box"], serde_json::json!([1, 2, 30, 40]));
        assert_eq!(v["detections"][0]["source"], "icon");
        assert_eq!(v["images"]["camera"], "iVBORwD/");
    }

    #[test]
    fn check_catches_mismatched_keys() {
        let mut r = ScanResult::default();
        r.images.insert("camera".into(), vec![]);
        assert!(r.check().is_err());
        let mut r = ScanResult::default();
        r.timings.context_detection_ms = 5;
        assert!(r.check().is_err());
    }
}
