//! Segment extraction: the policy sentences that disclose practices for each data type.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::policy::PolicyDocument;
use crate::Taxonomy;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicySegment {
    pub data_type: String,
    /// Verbatim sentence.
    pub text: String,
    pub sentence_index: usize,
    /// Byte offset of `text` in the document text.
    pub offset: usize,
    pub matched_phrase: String,
}

/// Data type id to its segments in document order. Every taxonomy type is present.
pub type SegmentMap = BTreeMap<String, Vec<PolicySegment>>;

/// Every sentence whose lowercase form contains one of the type's lexicon phrases.
/// A sentence can be listed under several types.
pub fn extract_segments(doc: &PolicyDocument, taxonomy: &Taxonomy) -> SegmentMap {
    let lowered: Vec<String> = doc.sentences.iter().map(|s| s.text.to_lowercase()).collect();
    taxonomy
        .types()
        .iter()
        .map(|ty| {
            let segments = doc
                .sentences
                .iter()
                .zip(&lowered)
                .filter_map(|(s, low)| {
                    let phrase = taxonomy.matching_phrase(&ty.id, low)?;
                    Some(PolicySegment {
                        data_type: ty.id.clone(),
                        text: s.text.clone(),
                        sentence_index: s.index,
                        offset: s.offset,
                        matched_phrase: phrase.to_string(),
                    })
                })
                .collect();
            (ty.id.clone(), segments)
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentStats {
    pub per_type: BTreeMap<String, usize>,
    pub distinct_sentences: usize,
}

pub fn segment_stats(map: &SegmentMap) -> SegmentStats {
    let per_type = map.iter().map(|(k, v)| (k.clone(), v.len())).collect();
    let distinct: BTreeSet<usize> = map.values().flatten().map(|s| s.sentence_index).collect();
    SegmentStats { per_type, distinct_sentences: distinct.len() }
}
