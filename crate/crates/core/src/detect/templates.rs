use thiserror::Error;

use crate::raster::RasterError;
use crate::{RasterImage, Taxonomy};

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("cannot read template `{name}`: {source}")]
    Read { name: String, source: std::io::Error },
    #[error("template `{name}` is not a valid png: {source}")]
    Decode { name: String, source: RasterError },
}

/// An RGBA icon whose alpha channel selects the pixels that take part in matching.
#[derive(Clone, Debug)]
pub struct IconTemplate {
    pub data_type: String,
    pub name: String,
    pub image: RasterImage,
}

#[derive(Clone, Debug, Default)]
pub struct TemplateSet {
    templates: Vec<IconTemplate>,
}

impl TemplateSet {
    pub fn new(templates: Vec<IconTemplate>) -> Self {
        Self { templates }
    }

    /// Loads every template referenced by `taxonomy` through `read`, which maps a
    /// template reference (a relative path) to PNG bytes.
    pub fn from_taxonomy<F>(taxonomy: &Taxonomy, mut read: F) -> Result<Self, TemplateError>
    where
        F: FnMut(&str) -> std::io::Result<Vec<u8>>,
    {
        let mut templates = Vec::new();
        for (data_type, refs) in taxonomy.templates() {
            for name in refs {
                let bytes = read(name).map_err(|source| TemplateError::Read { name: name.clone(), source })?;
                let image = RasterImage::from_png(&bytes)
                    .map_err(|source| TemplateError::Decode { name: name.clone(), source })?;
                templates.push(IconTemplate { data_type: data_type.clone(), name: name.clone(), image });
            }
        }
        Ok(Self { templates })
    }

    /// Loads templates from files relative to `base`.
    pub fn from_dir(taxonomy: &Taxonomy, base: &std::path::Path) -> Result<Self, TemplateError> {
        Self::from_taxonomy(taxonomy, |name| std::fs::read(base.join(name)))
    }

    pub fn iter(&self) -> impl Iterator<Item = &IconTemplate> {
        self.templates.iter()
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}
