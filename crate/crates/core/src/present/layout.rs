use serde::{Deserialize, Serialize};

use super::gaps::VerticalGap;
use crate::BoundingBox;

/// Card geometry knobs. Ratios are in percent so that placement stays integer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutConfig {
    pub card_width_pct: u32,
    pub bottom_margin_pct: u32,
    pub min_card_height: u32,
    pub padding: u32,
    /// Integer magnification of the 8x8 glyphs; `None` scales with screen width.
    pub glyph_scale: Option<u32>,
    pub line_spacing: u32,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self { card_width_pct: 90, bottom_margin_pct: 2, min_card_height: 120, padding: 12, glyph_scale: None, line_spacing: 4 }
    }
}

impl LayoutConfig {
    pub fn glyph_scale_for(&self, screen_width: u32) -> u32 {
        self.glyph_scale.unwrap_or((screen_width / 540).clamp(1, 4) + 1).max(1)
    }

    pub fn card_width(&self, screen_width: u32) -> u32 {
        (screen_width * self.card_width_pct / 100).max(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardPlacement {
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    /// The card did not fit in the gap and was pinned to the bottom of the screen.
    pub overflow: bool,
}

/// Centers the card in `gap` when it fits, otherwise pins it near the bottom edge.
pub fn layout_card(gap: Option<VerticalGap>, screen_width: u32, screen_height: u32, required_height: u32, config: &LayoutConfig) -> CardPlacement {
    let width = config.card_width(screen_width).min(screen_width);
    let left = (screen_width - width) / 2;
    let height = required_height.clamp(1, screen_height);
    let (top, overflow) = match gap {
        Some(g) if g.height() >= required_height => (g.top + (g.height() - required_height) / 2, false),
        _ => {
            let margin = screen_height * config.bottom_margin_pct / 100;
            let bottom = screen_height.saturating_sub(margin).max(height);
            (bottom - height, true)
        }
    };
    let bbox = BoundingBox::from_origin(left, top, width, height).expect("card has positive size");
    CardPlacement { bbox, overflow }
}
