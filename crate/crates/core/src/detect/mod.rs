//! Context detection: which on-screen elements relate to which personal-data type.
//!
//! Icons are found by masked template correlation over a scale ladder; text comes
//! from an optional UI sidecar matched against the taxonomy lexicon. Both feed one
//! per-type non-maximum suppression pass.

mod ncc;
mod nms;
mod params;
mod templates;
mod text;

use rayon::prelude::*;

use crate::model::Detection;
use crate::{BoundingBox, DetectionSource, RasterImage, Scalar, Taxonomy, UiElement};

pub use ncc::COARSE_FLOOR;
pub use nms::{canonical_order, dedup_nms};
pub use params::{DetectionParams, ParamsError};
pub use templates::{IconTemplate, TemplateError, TemplateSet};
pub use text::{match_text, parse_sidecar, sidecar_to_json, SidecarError};

use ncc::{find_peaks, Plane, Pyramid, ScaledTemplate};

/// Detections together with non-fatal notes (skipped scales, unusable templates).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Detections<T: Scalar = f64> {
    pub detections: Vec<Detection<T>>,
    pub warnings: Vec<String>,
}

/// Runs every template at every scale over `screen`. Raw peaks, not yet deduplicated.
pub fn match_icons<T: Scalar>(screen: &RasterImage, templates: &TemplateSet, params: &DetectionParams<T>) -> Detections<T> {
    let mut warnings = Vec::new();
    if templates.is_empty() {
        warnings.push("no icon templates registered".to_string());
        return Detections { detections: Vec::new(), warnings };
    }
    let pyramid = Pyramid::new(Plane::new(screen.width(), screen.height(), screen.to_gray::<T>()));

    let jobs: Vec<(&IconTemplate, T)> =
        templates.iter().flat_map(|t| params.scales.iter().map(move |&s| (t, s))).collect();
    let results: Vec<Result<Vec<Detection<T>>, String>> = jobs
        .par_iter()
        .map(|&(tpl, scale)| {
            let scaled = scale_template(&tpl.image, scale);
            if scaled.width > screen.width() || scaled.height > screen.height() {
                return Err(format!(
                    "template `{}` at scale {scale} ({}x{}) exceeds the {}x{} screen; scale skipped",
                    tpl.name,
                    scaled.width,
                    scaled.height,
                    screen.width(),
                    screen.height()
                ));
            }
            Ok(find_peaks(&pyramid, &scaled, params.ncc_threshold)
                .into_iter()
                .map(|p| {
                    let bbox = BoundingBox::from_origin(p.x, p.y, scaled.width, scaled.height).expect("non-empty template");
                    Detection::new(bbox, tpl.data_type.clone(), p.score, DetectionSource::Icon)
                })
                .collect())
        })
        .collect();

    let mut detections = Vec::new();
    let mut skipped = 0;
    for r in results {
        match r {
            Ok(found) => detections.extend(found),
            Err(w) => {
                skipped += 1;
                warnings.push(w);
            }
        }
    }
    if skipped == jobs.len() {
        warnings.push("every template is larger than the screen at every scale".to_string());
    }
    detections.sort_by(canonical_order);
    Detections { detections, warnings }
}

fn scale_template<T: Scalar>(image: &RasterImage, scale: T) -> ScaledTemplate<T> {
    let s = scale.to_f64_lossy();
    let w = ((f64::from(image.width()) * s).round() as u32).max(1);
    let h = ((f64::from(image.height()) * s).round() as u32).max(1);
    let resized = if (w, h) == (image.width(), image.height()) { image.clone() } else { image.resize(w, h) };
    ScaledTemplate { width: w, height: h, gray: resized.to_gray(), alpha: resized.alpha() }
}

/// Icon and sidecar detections, deduplicated per type, clipped to the screen and
/// ordered by data type, then top, then left.
pub fn detect_context<T: Scalar>(
    screen: &RasterImage,
    sidecar: Option<&[UiElement]>,
    taxonomy: &Taxonomy,
    templates: &TemplateSet,
    params: &DetectionParams<T>,
) -> Detections<T> {
    let Detections { mut detections, warnings } = match_icons(screen, templates, params);
    if let Some(elements) = sidecar {
        detections.extend(match_text::<T>(elements, taxonomy));
    }
    let clipped: Vec<Detection<T>> = detections
        .into_iter()
        .filter_map(|mut d| {
            d.bbox = d.bbox.clip(screen.width(), screen.height())?;
            Some(d)
        })
        .collect();
    Detections { detections: dedup_nms(&clipped, params.nms_iou), warnings }
}
