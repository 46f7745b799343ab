//! Domain types shared by every pipeline stage.

mod lexicon;
mod taxonomy;

use serde::{Deserialize, Serialize};

use crate::{BoundingBox, Scalar};

pub use lexicon::{normalize_phrase, phrase_matches};
pub use taxonomy::{load_taxonomy, DataType, Taxonomy, TaxonomyError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionSource {
    Icon,
    Text,
}

/// A screen region tagged with the personal-data type it relates to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection<T: Scalar = f64> {
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub data_type: String,
    pub score: T,
    pub source: DetectionSource,
}

impl<T: Scalar> Detection<T> {
    pub fn new(bbox: BoundingBox, data_type: impl Into<String>, score: T, source: DetectionSource) -> Self {
        Self { bbox, data_type: data_type.into(), score, source }
    }

    pub fn cast<U: Scalar>(&self) -> Detection<U> {
        Detection {
            bbox: self.bbox,
            data_type: self.data_type.clone(),
            score: U::from_f64_lossy(self.score.to_f64_lossy()),
            source: self.source,
        }
    }
}

/// One entry of the UI-text sidecar: a view's bounds and its visible text.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UiElement {
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub text: String,
}

/// Wall-clock milliseconds spent in each pipeline stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanTimings {
    pub context_detection_ms: u64,
    pub segment_extraction_ms: u64,
    pub cpp_presentation_ms: u64,
    pub overall_ms: u64,
}

impl ScanTimings {
    pub fn component_sum(&self) -> u64 {
        self.context_detection_ms + self.segment_extraction_ms + self.cpp_presentation_ms
    }

    /// Overall time covers the stages plus unmeasured glue, so it can never be smaller.
    pub fn is_consistent(&self) -> bool {
        self.overall_ms >= self.component_sum()
    }
}
