use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::lexicon::{normalize_phrase, phrase_matches};

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("taxonomy schema error: {0}")]
    Schema(String),
    #[error("taxonomy {section} key `{key}` does not name a declared data type")]
    Reference { section: &'static str, key: String },
    #[error("duplicate data type id `{0}`")]
    DuplicateId(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataType {
    pub id: String,
    pub display_name: String,
}

/// Data types plus the phrases and icon templates that identify each of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Taxonomy {
    types: Vec<DataType>,
    lexicon: BTreeMap<String, Vec<String>>,
    templates: BTreeMap<String, Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaxonomyDocument {
    types: Vec<DataType>,
    #[serde(default)]
    lexicon: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    templates: BTreeMap<String, Vec<String>>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.bytes().all(|b| b.is_ascii_lowercase() || b == b'_')
}

/// Parses and validates a taxonomy document (JSON).
pub fn load_taxonomy(document: &[u8]) -> Result<Taxonomy, TaxonomyError> {
    let doc: TaxonomyDocument =
        serde_json::from_slice(document).map_err(|e| TaxonomyError::Schema(e.to_string()))?;
    if doc.types.is_empty() {
        return Err(TaxonomyError::Schema("`types` must not be empty".into()));
    }
    let mut seen = HashSet::new();
    for t in &doc.types {
        if !valid_id(&t.id) {
            return Err(TaxonomyError::Schema(format!("invalid data type id `{}`", t.id)));
        }
        if t.display_name.trim().is_empty() {
            return Err(TaxonomyError::Schema(format!("data type `{}` has no display name", t.id)));
        }
        if !seen.insert(t.id.as_str()) {
            return Err(TaxonomyError::DuplicateId(t.id.clone()));
        }
    }
    for (section, map) in [("lexicon", &doc.lexicon), ("templates", &doc.templates)] {
        if let Some(key) = map.keys().find(|k| !seen.contains(k.as_str())) {
            return Err(TaxonomyError::Reference { section, key: key.clone() });
        }
    }

    let mut lexicon = BTreeMap::new();
    for (id, phrases) in doc.lexicon {
        let mut normalized: Vec<String> = Vec::with_capacity(phrases.len());
        for raw in phrases {
            let phrase = normalize_phrase(&raw);
            if phrase.is_empty() {
                return Err(TaxonomyError::Schema(format!("empty lexicon phrase for `{id}`")));
            }
            if !normalized.contains(&phrase) {
                normalized.push(phrase);
            }
        }
        lexicon.insert(id, normalized);
    }
    for (id, refs) in &doc.templates {
        if refs.iter().any(|r| r.trim().is_empty()) {
            return Err(TaxonomyError::Schema(format!("empty template reference for `{id}`")));
        }
    }

    Ok(Taxonomy { types: doc.types, lexicon, templates: doc.templates })
}

impl Taxonomy {
    pub fn types(&self) -> &[DataType] {
        &self.types
    }

    pub fn get(&self, id: &str) -> Option<&DataType> {
        self.types.iter().find(|t| t.id == id)
    }

    pub fn display_name<'a>(&'a self, id: &'a str) -> &'a str {
        self.get(id).map_or(id, |t| t.display_name.as_str())
    }

    pub fn phrases(&self, id: &str) -> &[String] {
        self.lexicon.get(id).map_or(&[], Vec::as_slice)
    }

    pub fn templates(&self) -> &BTreeMap<String, Vec<String>> {
        &self.templates
    }

    /// First lexicon phrase of `id` found in `lowered` (already lowercase).
    pub fn matching_phrase(&self, id: &str, lowered: &str) -> Option<&str> {
        self.phrases(id).iter().find(|p| phrase_matches(lowered, p)).map(String::as_str)
    }

    /// Returns a copy with `phrase` appended to the lexicon of `id`.
    pub fn with_phrase(&self, id: &str, phrase: &str) -> Result<Self, TaxonomyError> {
        if self.get(id).is_none() {
            return Err(TaxonomyError::Reference { section: "lexicon", key: id.to_string() });
        }
        let phrase = normalize_phrase(phrase);
        if phrase.is_empty() {
            return Err(TaxonomyError::Schema(format!("empty lexicon phrase for `{id}`")));
        }
        let mut out = self.clone();
        let list = out.lexicon.entry(id.to_string()).or_default();
        if !list.contains(&phrase) {
            list.push(phrase);
        }
        Ok(out)
    }

    /// Serializes back to the document format accepted by [`load_taxonomy`].
    pub fn to_document(&self) -> Vec<u8> {
        let doc = TaxonomyDocument {
            types: self.types.clone(),
            lexicon: self.lexicon.clone(),
            templates: self.templates.clone(),
        };
        serde_json::to_vec_pretty(&doc).expect("taxonomy serializes")
    }
}
