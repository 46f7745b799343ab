use serde::Deserialize;
use thiserror::Error;

use crate::model::{normalize_phrase, Detection};
use crate::{DetectionSource, Scalar, Taxonomy, UiElement};

#[derive(Debug, Error)]
pub enum SidecarError {
    #[error("sidecar schema error: {0}")]
    Schema(String),
    #[error("sidecar element {0} has no visible text")]
    EmptyText(usize),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SidecarDocument {
    elements: Vec<UiElement>,
}

/// Parses `{"elements":[{"box":[l,t,r,b],"text":"..."}]}`.
pub fn parse_sidecar(bytes: &[u8]) -> Result<Vec<UiElement>, SidecarError> {
    let doc: SidecarDocument = serde_json::from_slice(bytes).map_err(|e| SidecarError::Schema(e.to_string()))?;
    if let Some(i) = doc.elements.iter().position(|e| e.text.split_whitespace().next().is_none()) {
        return Err(SidecarError::EmptyText(i));
    }
    Ok(doc.elements)
}

pub fn sidecar_to_json(elements: &[UiElement]) -> Vec<u8> {
    serde_json::to_vec(&serde_json::json!({ "elements": elements })).expect("sidecar serializes")
}

/// One text detection per (element, data type) whose lexicon hits the element text.
pub fn match_text<T: Scalar>(sidecar: &[UiElement], taxonomy: &Taxonomy) -> Vec<Detection<T>> {
    let mut out = Vec::new();
    for element in sidecar {
        let lowered = normalize_phrase(&element.text);
        for ty in taxonomy.types() {
            if taxonomy.matching_phrase(&ty.id, &lowered).is_some() {
                out.push(Detection::new(element.bbox, ty.id.clone(), T::one(), DetectionSource::Text));
            }
        }
    }
    out
}
