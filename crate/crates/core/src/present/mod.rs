//! CPP presentation: one annotated overlay per detected data type.
//!
//! For each type the card goes into the tallest horizontal band free of that type's
//! boxes; only the type's own boxes count, other types may be covered.

pub mod draw;
mod gaps;
mod layout;
mod summarize;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Detection;
use crate::raster::Rgba;
use crate::segments::SegmentMap;
use crate::{BoundingBox, DataType, RasterImage, Scalar, Taxonomy};

pub use gaps::{compute_gaps, select_gap, VerticalGap};
pub use layout::{layout_card, CardPlacement, LayoutConfig};
pub use summarize::{
    summarize, summarizer_from_env, truncate_summary, ExtractiveSummarizer, HttpSummarizer, Summarizer, Summary,
    MAX_SUMMARY_CHARS, SUMMARIZER_ENV, SUMMARIZER_KEY_ENV, SUMMARIZER_URL_ENV,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PresentError {
    #[error("nothing to present: no detections")]
    EmptyDetections,
    #[error("render expects detections of `{expected}` only, found `{found}`")]
    MixedTypes { expected: String, found: String },
}

/// The user-facing unit: data type, summarized snippet and where it is drawn.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CppCard {
    pub data_type: String,
    pub summary: String,
    pub segment_count: usize,
    pub undisclosed: bool,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedImage {
    pub data_type: String,
    pub image: RasterImage,
    pub card: CppCard,
    pub detection_boxes: Vec<BoundingBox>,
    pub overflow: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Presentation {
    pub images: Vec<AnnotatedImage>,
    pub warnings: Vec<String>,
}

const CARD_FILL: Rgba = [252, 252, 250, 255];
const BODY_TEXT: Rgba = [33, 33, 33, 255];
const PALETTE: [Rgba; 8] = [
    [229, 57, 53, 255],
    [30, 136, 229, 255],
    [67, 160, 71, 255],
    [142, 36, 170, 255],
    [251, 140, 0, 255],
    [0, 137, 123, 255],
    [216, 27, 96, 255],
    [94, 53, 177, 255],
];
const OUTLINE: u32 = 3;
const OUTLINE_RADIUS: u32 = 6;
const CARD_RADIUS: u32 = 10;

pub fn accent(data_type: &str) -> Rgba {
    // FNV-1a
    let h = data_type.bytes().fold(0x811c_9dc5u32, |h, b| (h ^ u32::from(b)).wrapping_mul(0x0100_0193));
    PALETTE[(h % PALETTE.len() as u32) as usize]
}

struct CardText {
    title: String,
    body: Vec<String>,
}

fn card_text(data_type: &DataType, summary: &str, screen_width: u32, config: &LayoutConfig) -> CardText {
    let scale = config.glyph_scale_for(screen_width);
    let inner = config.card_width(screen_width).saturating_sub(2 * config.padding);
    let max_chars = (inner / (draw::GLYPH * scale)).max(1) as usize;
    let mut title = data_type.display_name.clone();
    title.truncate(title.char_indices().nth(max_chars).map_or(title.len(), |(i, _)| i));
    CardText { title, body: draw::wrap(summary, max_chars) }
}

/// Height needed to show the card text at the configured glyph size.
pub fn card_height(data_type: &DataType, summary: &str, screen_width: u32, config: &LayoutConfig) -> u32 {
    let text = card_text(data_type, summary, screen_width, config);
    let line_h = draw::GLYPH * config.glyph_scale_for(screen_width) + config.line_spacing;
    let content = line_h * (1 + text.body.len() as u32) + 2 * config.line_spacing;
    (content + 2 * config.padding).max(config.min_card_height)
}

/// Copy of `screen` with the type's boxes outlined, a leader line and the card on top.
pub fn render_annotated<T: Scalar>(
    screen: &RasterImage,
    data_type: &DataType,
    detections: &[Detection<T>],
    card: &CppCard,
    overflow: bool,
    config: &LayoutConfig,
) -> Result<AnnotatedImage, PresentError> {
    if detections.is_empty() {
        return Err(PresentError::EmptyDetections);
    }
    if let Some(d) = detections.iter().find(|d| d.data_type != data_type.id) {
        return Err(PresentError::MixedTypes { expected: data_type.id.clone(), found: d.data_type.clone() });
    }
    let color = accent(&data_type.id);
    let mut image = screen.clone();
    let boxes: Vec<BoundingBox> = detections.iter().map(|d| d.bbox).collect();

    let c = card.bbox;
    let nearest = boxes
        .iter()
        .min_by_key(|b| {
            let vertical = if b.bottom() <= c.top() {
                c.top() - b.bottom()
            } else if b.top() >= c.bottom() {
                b.top() - c.bottom()
            } else {
                0
            };
            (vertical, b.center().0.abs_diff(c.center().0), b.top(), b.left())
        })
        .expect("non-empty");
    let bx = i64::from(nearest.center().0);
    let anchor_x = bx.clamp(i64::from(c.left() + CARD_RADIUS), i64::from(c.right().saturating_sub(CARD_RADIUS)).max(i64::from(c.left())));
    let (from, to) = if nearest.bottom() <= c.top() {
        ((anchor_x, i64::from(c.top())), (bx, i64::from(nearest.bottom())))
    } else if nearest.top() >= c.bottom() {
        ((anchor_x, i64::from(c.bottom()) - 1), (bx, i64::from(nearest.top())))
    } else {
        let (cx, cy) = c.center();
        ((i64::from(cx), i64::from(cy)), (bx, i64::from(nearest.center().1)))
    };
    draw::line(&mut image, from, to, 2, color);

    for b in &boxes {
        draw::stroke_rounded_rect(&mut image, b, OUTLINE, OUTLINE_RADIUS, color);
    }

    draw::fill_rounded_rect(&mut image, &c, CARD_RADIUS, color);
    if let Some(inner) = BoundingBox::new(c.left() + 2, c.top() + 2, c.right().saturating_sub(2), c.bottom().saturating_sub(2)).ok() {
        draw::fill_rounded_rect(&mut image, &inner, CARD_RADIUS - 2, CARD_FILL);
    }
    let text = card_text(data_type, &card.summary, screen.width(), config);
    let scale = config.glyph_scale_for(screen.width());
    let line_h = draw::GLYPH * scale + config.line_spacing;
    let (x, mut y) = (c.left() + config.padding, c.top() + config.padding);
    draw::text(&mut image, x, y, &text.title, scale, color);
    draw::text(&mut image, x + 1, y, &text.title, scale, color);
    y += line_h + 2 * config.line_spacing;
    for line in &text.body {
        if y + draw::GLYPH * scale > c.bottom() {
            break;
        }
        draw::text(&mut image, x, y, line, scale, BODY_TEXT);
        y += line_h;
    }

    Ok(AnnotatedImage { data_type: data_type.id.clone(), image, card: card.clone(), detection_boxes: boxes, overflow })
}

/// One annotated image per distinct detected type, ordered by data type id.
pub fn present<T: Scalar>(
    screen: &RasterImage,
    detections: &[Detection<T>],
    segments: &SegmentMap,
    taxonomy: &Taxonomy,
    summarizer: &dyn Summarizer,
    config: &LayoutConfig,
) -> Result<Presentation, PresentError> {
    if detections.is_empty() {
        return Err(PresentError::EmptyDetections);
    }
    let mut by_type: BTreeMap<&str, Vec<Detection<T>>> = BTreeMap::new();
    for d in detections {
        by_type.entry(d.data_type.as_str()).or_default().push(d.clone());
    }
    let groups: Vec<(&str, Vec<Detection<T>>)> = by_type.into_iter().collect();

    let rendered: Vec<Result<(AnnotatedImage, Option<String>), PresentError>> = groups
        .par_iter()
        .map(|(id, dets)| {
            let data_type = taxonomy
                .get(id)
                .cloned()
                .unwrap_or_else(|| DataType { id: id.to_string(), display_name: id.to_string() });
            let segs = segments.get(*id).map_or(&[][..], Vec::as_slice);
            let summary = summarize(segs, &data_type, summarizer);
            let boxes: Vec<BoundingBox> = dets.iter().map(|d| d.bbox).collect();
            let gap = select_gap(&compute_gaps(screen.height(), &boxes));
            let needed = card_height(&data_type, &summary.text, screen.width(), config);
            let placement = layout_card(gap, screen.width(), screen.height(), needed, config);
            let card = CppCard {
                data_type: data_type.id.clone(),
                summary: summary.text,
                segment_count: segs.len(),
                undisclosed: summary.undisclosed,
                bbox: placement.bbox,
            };
            let image = render_annotated(screen, &data_type, dets, &card, placement.overflow, config)?;
            Ok((image, summary.warning))
        })
        .collect();

    let mut out = Presentation::default();
    for r in rendered {
        let (image, warning) = r?;
        out.warnings.extend(warning);
        out.images.push(image);
    }
    Ok(out)
}
